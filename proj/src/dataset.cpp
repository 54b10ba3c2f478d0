// SPDX-License-Identifier: Apache-2.0

#include "sptw/dataset.hpp"

#include "sptw/bytes.hpp"
#include "sptw/channel.hpp"
#include "sptw/config.hpp"
#include "sptw/error.hpp"
#include "sptw/parallel.hpp"
#include "sptw/rng.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <sstream>

using nlohmann::json;

namespace sptw::dataset {

namespace {

constexpr std::uint64_t kTapStream = 0x74617073ULL;
constexpr std::uint64_t kRadarPoolStream = 0x706f6f6cULL;

void require(bool ok, const std::string& what)
{
    if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

std::uint32_t crc_of(const std::uint8_t* p, std::size_t n)
{
    return static_cast<std::uint32_t>(::crc32(0L, p, static_cast<uInt>(n)));
}

DatasetRecord decode_record(const std::uint8_t* p, std::uint64_t index)
{
    const std::size_t body = kRecordSize - 4;
    if (crc_of(p, body) != bytes::get_u32(p + body))
        throw Error(ErrorCode::CorruptRecord, "checksum mismatch at record " + std::to_string(index));
    DatasetRecord r;
    std::size_t off = 0;
    for (auto& f : r.features) {
        f = bytes::get_f32(p + off);
        off += 4;
    }
    r.label = p[off];
    const std::uint8_t combo = p[off + 1];
    const std::uint8_t flags = p[off + 2];
    off += 4;
    if (combo > 3) throw Error(ErrorCode::CorruptRecord, "bad combo at record " + std::to_string(index));
    r.meta.combo = static_cast<Combo>(combo);
    const double snr = bytes::get_f64(p + off);
    const double sinr = bytes::get_f64(p + off + 8);
    r.meta.seed = bytes::get_u64(p + off + 16);
    if (flags & 1u) r.meta.snr_db = snr;
    if (flags & 2u) r.meta.sinr_db = sinr;
    try {
        r.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptRecord, "record " + std::to_string(index) + ": " + e.what());
    }
    return r;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j)
{
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

} // namespace

std::string to_string(Combo c)
{
    switch (c) {
    case Combo::Empty: return "empty";
    case Combo::CellOnly: return "cell_only";
    case Combo::RadarOnly: return "radar_only";
    case Combo::Both: return "both";
    }
    return "?";
}

Combo combo_from_string(const std::string& s)
{
    for (Combo c : kAllCombos)
        if (to_string(c) == s) return c;
    throw Error(ErrorCode::InvalidParams, "unknown combo '" + s + "'");
}

std::string to_string(FeatureDomain d) { return d == FeatureDomain::Frequency ? "frequency" : "time"; }

FeatureDomain feature_domain_from_string(const std::string& s)
{
    if (s == "frequency") return FeatureDomain::Frequency;
    if (s == "time") return FeatureDomain::Time;
    throw Error(ErrorCode::InvalidParams, "unknown feature domain '" + s + "'");
}

void DatasetRecord::validate() const
{
    require(label == (radar_present(meta.combo) ? 1 : 0), "label disagrees with combo");
    double p = 0.0;
    for (float f : features) {
        require(std::isfinite(f), "non-finite feature");
        p += static_cast<double>(f) * static_cast<double>(f);
    }
    p /= static_cast<double>(iqcore::kWindowLength);
    require(std::abs(p - 1.0) <= 1e-5, "feature power is not 1");
    if (meta.snr_db) require(std::isfinite(*meta.snr_db), "non-finite snr");
    if (meta.sinr_db) require(std::isfinite(*meta.sinr_db), "non-finite sinr");
}

DatasetRecord record_from_window(const iqcore::Window1024& w)
{
    DatasetRecord r;
    for (std::size_t k = 0; k < iqcore::kWindowLength; ++k) {
        r.features[2 * k] = w.values[k].real();
        r.features[2 * k + 1] = w.values[k].imag();
    }
    return r;
}

std::vector<std::uint8_t> encode_record(const DatasetRecord& r)
{
    std::vector<std::uint8_t> out;
    out.reserve(kRecordSize);
    for (float f : r.features) bytes::put_f32(out, f);
    bytes::put_u8(out, r.label);
    bytes::put_u8(out, static_cast<std::uint8_t>(r.meta.combo));
    bytes::put_u8(out, static_cast<std::uint8_t>((r.meta.snr_db ? 1u : 0u) | (r.meta.sinr_db ? 2u : 0u)));
    bytes::put_u8(out, 0);
    bytes::put_f64(out, r.meta.snr_db.value_or(0.0));
    bytes::put_f64(out, r.meta.sinr_db.value_or(0.0));
    bytes::put_u64(out, r.meta.seed);
    bytes::put_u32(out, crc_of(out.data(), out.size()));
    return out;
}

RecordWriter::RecordWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path)
{
    if (!out_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> h;
    bytes::put_str(h, std::string(kRecordMagic, 4));
    bytes::put_u32(h, kFormatVersion);
    bytes::put_u32(h, kRecordSize);
    out_.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
}

void RecordWriter::write(const DatasetRecord& r)
{
    r.validate();
    const auto b = encode_record(r);
    out_.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    if (!out_) throw Error(ErrorCode::IoFailure, "write failed for " + path_.string());
    ++count_;
}

void RecordWriter::close()
{
    out_.close();
    if (!out_) throw Error(ErrorCode::IoFailure, "close failed for " + path_.string());
}

RecordReader::RecordReader(const std::filesystem::path& path) : in_(path, std::ios::binary)
{
    if (!in_) throw Error(ErrorCode::MalformedFile, "cannot open " + path.string());
    std::uint8_t h[kHeaderSize];
    in_.read(reinterpret_cast<char*>(h), kHeaderSize);
    if (in_.gcount() != static_cast<std::streamsize>(kHeaderSize) || std::memcmp(h, kRecordMagic, 4) != 0)
        throw Error(ErrorCode::MalformedFile, path.string() + " is not a record file");
    if (bytes::get_u32(h + 4) != kFormatVersion)
        throw Error(ErrorCode::FormatVersionMismatch, "unsupported record format version " + std::to_string(bytes::get_u32(h + 4)));
    if (bytes::get_u32(h + 8) != kRecordSize)
        throw Error(ErrorCode::FormatVersionMismatch, "unexpected record size " + std::to_string(bytes::get_u32(h + 8)));
}

std::optional<DatasetRecord> RecordReader::next()
{
    std::vector<std::uint8_t> buf(kRecordSize);
    in_.read(reinterpret_cast<char*>(buf.data()), kRecordSize);
    const auto got = in_.gcount();
    if (got == 0) return std::nullopt;
    if (got != static_cast<std::streamsize>(kRecordSize))
        throw Error(ErrorCode::CorruptRecord, "file truncated inside record " + std::to_string(index_));
    auto r = decode_record(buf.data(), index_);
    ++index_;
    return r;
}

std::vector<DatasetRecord> read_records(const std::filesystem::path& path)
{
    RecordReader reader(path);
    std::vector<DatasetRecord> out;
    while (auto r = reader.next()) out.push_back(std::move(*r));
    return out;
}

void write_records(const std::vector<DatasetRecord>& records, const std::filesystem::path& path)
{
    RecordWriter w(path);
    for (const auto& r : records) w.write(r);
    w.close();
}

void DatasetConfig::validate() const
{
    require(!snr_grid_db.empty(), "snr grid is empty");
    require(records_per_cell >= 1, "records_per_cell must be >= 1");
    require(radar_pool >= 1, "radar_pool must be >= 1");
    for (double s : snr_grid_db) require(std::isfinite(s), "snr grid value must be finite");
    for (double s : sinr_grid_db) require(std::isfinite(s), "sinr grid value must be finite");
    for (double s : snr_grid_db) {
        const bool feasible = std::any_of(sinr_grid_db.begin(), sinr_grid_db.end(), [&](double x) { return x < s; });
        require(feasible, "no sinr grid value below snr " + std::to_string(s) + " dB");
    }
    const double fsum = split_fractions[0] + split_fractions[1] + split_fractions[2];
    for (double f : split_fractions) require(f >= 0.0 && f <= 1.0, "split fractions must lie in [0, 1]");
    require(std::abs(fsum - 1.0) <= 1e-9, "split fractions must sum to 1");
    radar.validate();
    cellular.validate();
    require(radar.sample_rate_hz == cellular.sample_rate_hz, "radar and cellular sample rates differ");
    if (apply_channel) scenario.validate();
}

std::vector<CellInfo> build_cells(const DatasetConfig& cfg)
{
    std::vector<CellInfo> cells;
    for (Combo c : kAllCombos)
        for (double snr : cfg.snr_grid_db) {
            CellInfo cell;
            cell.combo = c;
            if (c != Combo::Empty) cell.snr_db = snr;
            if (c == Combo::Both)
                for (double x : cfg.sinr_grid_db)
                    if (x < snr) cell.sinr_values_db.push_back(x);
            cells.push_back(std::move(cell));
        }
    return cells;
}

RecordFactory::RecordFactory(const DatasetConfig& cfg) : cfg_(cfg)
{
    cfg.validate();
    for (int i = 0; i < cfg.radar_pool; ++i) {
        auto rp = cfg.radar;
        rp.seed = derive_seed(cfg.seed, {kRadarPoolStream, static_cast<std::uint64_t>(i)});
        radar_pool_.push_back(waveforms::gen_radar(rp));
    }
    if (!cfg.apply_channel) return;
    const auto taps = scenario::build_scenario_taps(cfg.scenario, derive_seed(cfg.seed, {kTapStream}));
    for (const auto& l : taps.links) {
        const auto ra = cfg.scenario.node(l.a).role;
        const auto rb = cfg.scenario.node(l.b).role;
        using scenario::Role;
        const bool ship = ra == Role::Ship || rb == Role::Ship;
        const bool bs_ue = (ra == Role::BS && rb == Role::UE) || (ra == Role::UE && rb == Role::BS);
        for (const auto& ts : l.steps) {
            if (ship) radar_links_.push_back(scenario::normalized(ts));
            if (bs_ue) cell_links_.push_back(scenario::normalized(ts));
        }
    }
    require(!radar_links_.empty(), "scenario has no ship links to carry radar");
    require(!cell_links_.empty(), "scenario has no BS-UE links to carry cellular traffic");
}

std::optional<DatasetRecord> RecordFactory::make(const CellInfo& cell, std::uint32_t cell_id, std::uint32_t index) const
{
    const std::uint64_t seed = derive_seed(cfg_.seed, {cell_id, index});
    Rng rng(seed);
    const std::size_t win = iqcore::kWindowLength;
    const std::size_t len = win + kLeadIn;
    const double fs = cfg_.radar.sample_rate_hz;

    auto through_channel = [&](const iqcore::IQBuffer& x, const std::vector<scenario::TapSet>& pool) {
        iqcore::IQBuffer y = x;
        if (cfg_.apply_channel) {
            const auto& ts = pool[static_cast<std::size_t>(rng() % pool.size())];
            y = channel::emulate_link(x, {ts}, static_cast<double>(len) / fs, 0.0, 0.0, seed);
        }
        y.samples.erase(y.samples.begin(), y.samples.begin() + static_cast<std::ptrdiff_t>(kLeadIn));
        return y;
    };
    auto radar = [&] {
        const auto& cap = radar_pool_[static_cast<std::size_t>(rng() % radar_pool_.size())];
        const auto off = static_cast<std::size_t>(rng() % cap.size());
        return through_channel(waveforms::cyclic_extend(cap, len, off), radar_links_);
    };
    auto cellular = [&] {
        const auto sym = static_cast<std::size_t>(cfg_.cellular.num_subcarriers + cfg_.cellular.cp_len);
        const auto nsym = static_cast<std::int64_t>(len / sym + 2);
        auto full = waveforms::gen_cellular(cfg_.cellular, nsym, derive_seed(seed, {1}));
        const auto off = static_cast<std::size_t>(rng() % (full.size() - len + 1));
        iqcore::IQBuffer slice;
        slice.sample_rate_hz = full.sample_rate_hz;
        slice.samples.assign(full.samples.begin() + static_cast<std::ptrdiff_t>(off),
                             full.samples.begin() + static_cast<std::ptrdiff_t>(off + len));
        return through_channel(slice, cell_links_);
    };

    const std::uint64_t mix_seed = derive_seed(seed, {2});
    iqcore::IQBuffer mixed;
    RecordMeta meta;
    meta.combo = cell.combo;
    meta.seed = seed;
    meta.snr_db = cell.snr_db;
    switch (cell.combo) {
    case Combo::Empty: mixed = waveforms::gen_noise(static_cast<std::int64_t>(win), 1.0, mix_seed, fs); break;
    case Combo::CellOnly: mixed = waveforms::mix_at_snr(cellular(), nullptr, *cell.snr_db, std::nullopt, mix_seed).mixed; break;
    case Combo::RadarOnly: mixed = waveforms::mix_at_snr(radar(), nullptr, *cell.snr_db, std::nullopt, mix_seed).mixed; break;
    case Combo::Both: {
        const double sinr = cell.sinr_values_db[index % cell.sinr_values_db.size()];
        meta.sinr_db = sinr;
        const auto r = radar();
        const auto c = cellular();
        mixed = waveforms::mix_at_snr(r, &c, *cell.snr_db, sinr, mix_seed).mixed;
        break;
    }
    }

    iqcore::Window1024 w;
    std::copy_n(mixed.samples.begin(), win, w.values.begin());
    try {
        if (cfg_.feature_domain == FeatureDomain::Frequency) {
            w = iqcore::to_frequency(w);
        } else {
            std::vector<iqcore::cd> v(w.values.begin(), w.values.end());
            iqcore::normalize_power(v);
            for (std::size_t k = 0; k < win; ++k)
                w.values[k] = iqcore::cf32(static_cast<float>(v[k].real()), static_cast<float>(v[k].imag()));
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroWindow) return std::nullopt;
        throw;
    }
    DatasetRecord rec = record_from_window(w);
    rec.label = radar_present(cell.combo) ? 1 : 0;
    rec.meta = meta;
    return rec;
}

std::string params_hash(const std::string& canonical_json)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_json) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

Splits split_dataset(const DatasetManifest& m, const std::array<double, 3>& fractions, std::uint64_t seed)
{
    for (double f : fractions) require(f >= 0.0 && f <= 1.0, "split fractions must lie in [0, 1]");
    require(std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) <= 1e-9, "split fractions must sum to 1");
    require(m.record_cells.size() == m.record_count, "manifest record_cells does not match record_count");

    std::vector<std::vector<std::uint64_t>> by_cell(m.cells.size());
    for (std::uint64_t i = 0; i < m.record_cells.size(); ++i) {
        const auto c = m.record_cells[i];
        require(c < m.cells.size(), "record refers to an unknown cell");
        by_cell[c].push_back(i);
    }
    Splits s;
    s.fractions = fractions;
    s.seed = seed;
    for (std::size_t c = 0; c < by_cell.size(); ++c) {
        auto& idx = by_cell[c];
        if (idx.empty()) continue;
        Rng rng(derive_seed(seed, {c}));
        for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[static_cast<std::size_t>(rng() % (i + 1))]);
        const auto n = static_cast<std::int64_t>(idx.size());
        const auto n_val = std::llround(static_cast<double>(n) * fractions[1]);
        const auto n_test = std::llround(static_cast<double>(n) * fractions[2]);
        const auto n_train = n - n_val - n_test;
        if (n_train < 0 || (fractions[0] > 0 && n_train == 0) || (fractions[1] > 0 && n_val == 0) ||
            (fractions[2] > 0 && n_test == 0))
            throw Error(ErrorCode::CellTooSmall, "cell " + std::to_string(c) + " has only " + std::to_string(n) +
                                                     " records, too few for every split");
        auto it = idx.begin();
        s.train.insert(s.train.end(), it, it + n_train);
        it += n_train;
        s.val.insert(s.val.end(), it, it + n_val);
        it += n_val;
        s.test.insert(s.test.end(), it, it + n_test);
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void save_dataset_manifest(const DatasetManifest& m, const std::filesystem::path& path)
{
    json cells = json::array();
    for (std::size_t i = 0; i < m.cells.size(); ++i)
        cells.push_back({{"id", i},
                         {"combo", to_string(m.cells[i].combo)},
                         {"snr_db", opt_json(m.cells[i].snr_db)},
                         {"sinr_values_db", m.cells[i].sinr_values_db}});
    json by_combo;
    for (Combo c : kAllCombos) by_combo[to_string(c)] = m.combo_counts[static_cast<std::size_t>(c)];
    json j{{"format_version", m.format_version},
           {"records_file", m.records_file},
           {"record_size", m.record_size},
           {"record_count", m.record_count},
           {"feature_domain", to_string(m.feature_domain)},
           {"params_hash", m.params_hash},
           {"config", m.config_json.empty() ? json(nullptr) : json::parse(m.config_json)},
           {"counts", {{"by_combo", by_combo}, {"by_label", {{"0", m.label_counts[0]}, {"1", m.label_counts[1]}}}}},
           {"discarded", m.discarded},
           {"cells", cells},
           {"record_cells", m.record_cells},
           {"splits",
            {{"fractions", m.splits.fractions},
             {"seed", m.splits.seed},
             {"train", m.splits.train},
             {"val", m.splits.val},
             {"test", m.splits.test}}}};
    config::write_json(j, path);
}

DatasetManifest load_dataset_manifest(const std::filesystem::path& path)
{
    const json j = config::read_json(path);
    DatasetManifest m;
    try {
        m.format_version = j.at("format_version").get<std::uint32_t>();
        if (m.format_version != kFormatVersion)
            throw Error(ErrorCode::FormatVersionMismatch, "unsupported manifest version " + std::to_string(m.format_version));
        m.records_file = j.at("records_file").get<std::string>();
        m.record_size = j.at("record_size").get<std::uint32_t>();
        m.record_count = j.at("record_count").get<std::uint64_t>();
        m.feature_domain = feature_domain_from_string(j.at("feature_domain").get<std::string>());
        m.params_hash = j.at("params_hash").get<std::string>();
        if (!j.at("config").is_null()) m.config_json = j.at("config").dump();
        for (Combo c : kAllCombos)
            m.combo_counts[static_cast<std::size_t>(c)] = j.at("counts").at("by_combo").at(to_string(c)).get<std::uint64_t>();
        m.label_counts[0] = j.at("counts").at("by_label").at("0").get<std::uint64_t>();
        m.label_counts[1] = j.at("counts").at("by_label").at("1").get<std::uint64_t>();
        m.discarded = j.value("discarded", std::uint64_t{0});
        for (const auto& c : j.at("cells")) {
            CellInfo ci;
            ci.combo = combo_from_string(c.at("combo").get<std::string>());
            ci.snr_db = opt_from(c.at("snr_db"));
            ci.sinr_values_db = c.at("sinr_values_db").get<std::vector<double>>();
            m.cells.push_back(std::move(ci));
        }
        m.record_cells = j.at("record_cells").get<std::vector<std::uint32_t>>();
        const auto& s = j.at("splits");
        m.splits.fractions = s.at("fractions").get<std::array<double, 3>>();
        m.splits.seed = s.at("seed").get<std::uint64_t>();
        m.splits.train = s.at("train").get<std::vector<std::uint64_t>>();
        m.splits.val = s.at("val").get<std::vector<std::uint64_t>>();
        m.splits.test = s.at("test").get<std::vector<std::uint64_t>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
    return m;
}

DatasetManifest gen_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir)
{
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    const auto cells = build_cells(cfg);
    const RecordFactory factory(cfg);

    DatasetManifest m;
    m.feature_domain = cfg.feature_domain;
    m.config_json = json(cfg).dump();
    m.params_hash = params_hash(m.config_json);
    m.cells = cells;

    RecordWriter writer(out_dir / m.records_file);
    const auto per_cell = static_cast<std::uint32_t>(cfg.records_per_cell);
    const std::size_t total = cells.size() * per_cell;
    constexpr std::size_t kChunk = 512;
    std::vector<std::optional<DatasetRecord>> chunk;
    for (std::size_t base = 0; base < total; base += kChunk) {
        const std::size_t n = std::min(kChunk, total - base);
        chunk.assign(n, std::nullopt);
        parallel_for(n, [&](std::size_t i) {
            const std::size_t unit = base + i;
            const auto cell_id = static_cast<std::uint32_t>(unit / per_cell);
            chunk[i] = factory.make(cells[cell_id], cell_id, static_cast<std::uint32_t>(unit % per_cell));
        });
        for (std::size_t i = 0; i < n; ++i) {
            const auto cell_id = static_cast<std::uint32_t>((base + i) / per_cell);
            if (!chunk[i]) {
                ++m.discarded;
                std::cerr << "gen_dataset: discarded all-zero window in cell " << cell_id << '\n';
                continue;
            }
            writer.write(*chunk[i]);
            m.record_cells.push_back(cell_id);
            ++m.combo_counts[static_cast<std::size_t>(chunk[i]->meta.combo)];
            ++m.label_counts[chunk[i]->label];
        }
    }
    writer.close();
    m.record_count = writer.count();
    m.splits = split_dataset(m, cfg.split_fractions, cfg.seed);
    save_dataset_manifest(m, out_dir / "manifest.json");
    return m;
}

} // namespace sptw::dataset
