// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sptw/iqcore.hpp"
#include "sptw/scenario.hpp"
#include "sptw/waveforms.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace sptw::dataset {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr char kRecordMagic[4] = {'S', 'P', 'T', 'W'};
inline constexpr std::size_t kFeatureCount = 2 * iqcore::kWindowLength;
inline constexpr std::size_t kHeaderSize = 12;
/// features + label/combo/flags/reserved + snr + sinr + seed + crc32
inline constexpr std::uint32_t kRecordSize = kFeatureCount * 4 + 4 + 8 + 8 + 8 + 4;

enum class Combo : std::uint8_t { Empty = 0, CellOnly = 1, RadarOnly = 2, Both = 3 };
inline constexpr std::array<Combo, 4> kAllCombos = {Combo::Empty, Combo::CellOnly, Combo::RadarOnly, Combo::Both};

std::string to_string(Combo c);
Combo combo_from_string(const std::string& s);
inline bool radar_present(Combo c) noexcept { return c == Combo::RadarOnly || c == Combo::Both; }

enum class FeatureDomain { Frequency, Time };
std::string to_string(FeatureDomain d);
FeatureDomain feature_domain_from_string(const std::string& s);

struct RecordMeta {
    Combo combo = Combo::Empty;
    std::optional<double> snr_db;
    std::optional<double> sinr_db;
    std::uint64_t seed = 0;
};

/// One window. features[2k] = Re, features[2k+1] = Im of bin (or sample) k.
struct DatasetRecord {
    std::array<float, kFeatureCount> features{};
    std::uint8_t label = 0;
    RecordMeta meta;

    /// Label matches combo, features finite, mean complex power 1 within 1e-5.
    /// Throws InvalidParams otherwise.
    void validate() const;
};

/// Packs a unit-power window into a record (no label or meta).
DatasetRecord record_from_window(const iqcore::Window1024& w);

// Record file: 12-byte header ("SPTW", u32 version, u32 record size), then packed little-endian
// records, each closed by a CRC32 over its preceding bytes.
std::vector<std::uint8_t> encode_record(const DatasetRecord& r);

class RecordWriter {
public:
    explicit RecordWriter(const std::filesystem::path& path);
    void write(const DatasetRecord& r);
    void close();
    std::uint64_t count() const noexcept { return count_; }

private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::uint64_t count_ = 0;
};

class RecordReader {
public:
    /// Throws MalformedFile (not a record file) or FormatVersionMismatch.
    explicit RecordReader(const std::filesystem::path& path);
    /// Next record in file order, or nullopt at a clean end of file. Throws CorruptRecord on a
    /// truncated tail, checksum failure or a record that breaks its invariants.
    std::optional<DatasetRecord> next();
    std::uint64_t index() const noexcept { return index_; }

private:
    std::ifstream in_;
    std::uint64_t index_ = 0;
};

std::vector<DatasetRecord> read_records(const std::filesystem::path& path);
void write_records(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);

struct DatasetConfig {
    std::vector<double> snr_grid_db = {-20, -15, -10, -5, 0, 5, 10, 15, 20};
    /// Radar-to-cellular-plus-noise targets for Both cells; each SNR cell uses the values below it.
    std::vector<double> sinr_grid_db = {-30, -25, -20, -15, -10, -5, 0, 5, 10, 15};
    int records_per_cell = 100;
    std::uint64_t seed = 1;
    FeatureDomain feature_domain = FeatureDomain::Frequency;
    bool apply_channel = true;
    int radar_pool = 4; ///< distinct radar captures to draw windows from
    waveforms::RadarParams radar;
    waveforms::CellularParams cellular;
    scenario::ScenarioSpec scenario = scenario::default_scenario();
    std::array<double, 3> split_fractions = {0.7, 0.15, 0.15};

    void validate() const;
};

struct CellInfo {
    Combo combo = Combo::Empty;
    std::optional<double> snr_db;
    std::vector<double> sinr_values_db; ///< cycled over the cell's records (Both only)
};

/// Cells in generation order: for each combo, one cell per SNR grid point.
std::vector<CellInfo> build_cells(const DatasetConfig& cfg);

struct Splits {
    std::vector<std::uint64_t> train, val, test;
    std::array<double, 3> fractions = {0.7, 0.15, 0.15};
    std::uint64_t seed = 0;
};

struct DatasetManifest {
    std::uint32_t format_version = kFormatVersion;
    std::string records_file = "records.bin";
    std::uint32_t record_size = kRecordSize;
    std::uint64_t record_count = 0;
    FeatureDomain feature_domain = FeatureDomain::Frequency;
    std::string params_hash;
    std::string config_json;
    std::vector<CellInfo> cells;
    std::vector<std::uint32_t> record_cells; ///< cell id per record, file order
    std::array<std::uint64_t, 4> combo_counts{};
    std::array<std::uint64_t, 2> label_counts{};
    std::uint64_t discarded = 0;
    Splits splits;
};

void save_dataset_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest load_dataset_manifest(const std::filesystem::path& path);

/// Stratified by cell: each cell is shuffled with its own seed and cut into
/// llround(n * f_val) validation, llround(n * f_test) test and the rest train.
/// Throws CellTooSmall if any split with a positive fraction would get no record of a cell.
Splits split_dataset(const DatasetManifest& m, const std::array<double, 3>& fractions, std::uint64_t seed);

/// Generates one record of a cell. Deterministic in (cfg, cell, index).
struct RecordFactory {
    explicit RecordFactory(const DatasetConfig& cfg);
    std::optional<DatasetRecord> make(const CellInfo& cell, std::uint32_t cell_id, std::uint32_t index) const;

    static constexpr std::size_t kLeadIn = 128;

private:
    const DatasetConfig& cfg_;
    std::vector<iqcore::IQBuffer> radar_pool_;
    std::vector<scenario::TapSet> radar_links_;
    std::vector<scenario::TapSet> cell_links_;
};

/// Writes <out_dir>/records.bin and <out_dir>/manifest.json; returns the manifest.
/// Output bytes depend only on the config.
DatasetManifest gen_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir);

std::string params_hash(const std::string& canonical_json);

} // namespace sptw::dataset
