// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

#include "sptw/channel.hpp"
#include "sptw/config.hpp"
#include "sptw/controlplane.hpp"
#include "sptw/dataset.hpp"
#include "sptw/detector.hpp"
#include "sptw/iqcore.hpp"
#include "sptw/scenario.hpp"
#include "sptw/waveforms.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sptw;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::ofstream open_csv(const fs::path& path, const std::string& header)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    out << std::setprecision(12) << header << '\n';
    return out;
}

void print_summary(const json& j) { std::cout << j.dump(2) << '\n'; }

template <class T>
T load_or_default(const std::string& path)
{
    return path.empty() ? T{} : config::load<T>(path);
}

iqcore::IQBuffer load_input(const fs::path& path, double fallback_rate)
{
    if (fs::exists(iqcore::manifest_path_for(path))) return iqcore::load_iq_with_manifest(path);
    if (fallback_rate <= 0.0) throw Error(ErrorCode::MalformedFile, path.string() + " has no manifest; pass --sample-rate");
    return iqcore::load_iq_file(path, fallback_rate);
}

void ensure_parent(const fs::path& p)
{
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// ---- synth-radar ----

struct SynthRadarOpts {
    std::string config, out;
    std::optional<std::uint64_t> seed;
};

int run_synth_radar(const SynthRadarOpts& o)
{
    auto p = load_or_default<waveforms::RadarParams>(o.config);
    if (o.seed) p.seed = *o.seed;
    const auto buf = waveforms::gen_radar(p);
    ensure_parent(o.out);
    iqcore::save_iq_with_manifest(buf, o.out, "pulsed radar, seed " + std::to_string(p.seed));
    print_summary({{"samples", buf.size()}, {"sample_rate_hz", buf.sample_rate_hz}, {"duration_s", buf.duration_s()}});
    return 0;
}

// ---- synth-cellular ----

struct SynthCellOpts {
    std::string config, out;
    std::int64_t symbols = 200;
    std::uint64_t seed = 1;
};

int run_synth_cellular(const SynthCellOpts& o)
{
    const auto p = load_or_default<waveforms::CellularParams>(o.config);
    const auto buf = waveforms::gen_cellular(p, o.symbols, o.seed);
    ensure_parent(o.out);
    iqcore::save_iq_with_manifest(buf, o.out, "OFDM cellular proxy, seed " + std::to_string(o.seed));
    print_summary({{"samples", buf.size()}, {"sample_rate_hz", buf.sample_rate_hz}, {"symbols", o.symbols}});
    return 0;
}

// ---- make-scenario ----

struct MakeScenarioOpts {
    std::string config, out;
    std::uint64_t seed = 1;
    double heatmap_t = 0.0;
};

int run_make_scenario(const MakeScenarioOpts& o)
{
    const auto spec = o.config.empty() ? scenario::default_scenario() : config::load<scenario::ScenarioSpec>(o.config);
    spec.validate();
    const fs::path dir = o.out;
    fs::create_directories(dir);
    config::write_json(json(spec), dir / "scenario.json");
    scenario::write_heatmap_csv(spec, scenario::path_loss_matrix(spec, o.heatmap_t), dir / "pathloss_heatmap.csv");
    const auto taps = scenario::build_scenario_taps(spec, o.seed);
    auto out = open_csv(dir / "taps.csv", "node_a,node_b,step,t_s,delay_s,gain_re,gain_im");
    for (const auto& l : taps.links)
        for (std::size_t s = 0; s < l.steps.size(); ++s)
            for (const auto& t : l.steps[s].taps)
                out << l.a << ',' << l.b << ',' << s << ',' << l.steps[s].t_s << ',' << t.delay_s << ',' << t.gain.real()
                    << ',' << t.gain.imag() << '\n';
    print_summary({{"nodes", spec.nodes.size()}, {"links", taps.links.size()}, {"timesteps", spec.num_timesteps()},
                   {"tap_sets", taps.entry_count()}});
    return 0;
}

// ---- approx-taps ----

struct ApproxOpts {
    std::string in, out;
    int k = static_cast<int>(scenario::kMaxTaps);
    double max_spread = scenario::kMaxDelaySpreadS;
    std::uint64_t seed = scenario::kApproxSeed;
};

int run_approx_taps(const ApproxOpts& o)
{
    const auto raw = scenario::read_taps_csv(o.in);
    double p_in = 0.0;
    for (const auto& t : raw) p_in += std::norm(t.gain);
    const auto ts = scenario::approx_taps(raw, o.k, o.max_spread, o.seed);
    ensure_parent(o.out);
    scenario::write_taps_csv(ts.taps, o.out);
    print_summary({{"input_taps", raw.size()}, {"output_taps", ts.taps.size()}, {"delay_spread_s", ts.delay_spread()},
                   {"power_in", p_in}, {"power_out", ts.total_power()}});
    return 0;
}

// ---- gen-dataset ----

struct GenDatasetOpts {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> records_per_cell;
};

int run_gen_dataset(const GenDatasetOpts& o)
{
    auto cfg = load_or_default<dataset::DatasetConfig>(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.records_per_cell) cfg.records_per_cell = *o.records_per_cell;
    const auto m = dataset::gen_dataset(cfg, o.out);
    print_summary({{"records", m.record_count},
                   {"discarded", m.discarded},
                   {"label_counts", m.label_counts},
                   {"train", m.splits.train.size()},
                   {"val", m.splits.val.size()},
                   {"test", m.splits.test.size()},
                   {"params_hash", m.params_hash}});
    return 0;
}

// ---- emulate ----

struct EmulateOpts {
    std::string input, taps, out;
    double noise_power = 0.0, rx_gain_db = 0.0, sample_rate = 0.0;
    std::uint64_t seed = 1;
};

int run_emulate(const EmulateOpts& o)
{
    const auto tx = load_input(o.input, o.sample_rate);
    scenario::TapSet ts;
    ts.taps = scenario::read_taps_csv(o.taps);
    ts.validate();
    const auto rx = channel::emulate_link(tx, {ts}, std::max(tx.duration_s(), 1.0 / tx.sample_rate_hz), o.noise_power,
                                          o.rx_gain_db, o.seed);
    ensure_parent(o.out);
    iqcore::save_iq_with_manifest(rx, o.out, "emulated link output, seed " + std::to_string(o.seed));
    print_summary({{"samples", rx.size()}, {"power", iqcore::measure_power(rx)}});
    return 0;
}

// ---- detect ----

struct DetectOpts {
    std::string weights, input, out, domain = "frequency";
    std::size_t batch = 10, ring = 100;
    bool baseline = false;
    double threshold = detector::BaselineConfig{}.threshold;
    double sample_rate = 0.0;
};

int run_detect(const DetectOpts& o)
{
    if (o.weights.empty() && !o.baseline) throw CLI::ValidationError("detect", "pass --weights or --baseline");
    const auto rx = load_input(o.input, o.sample_rate);
    std::unique_ptr<detector::WindowDetector> det;
    if (o.baseline) {
        detector::BaselineConfig bc;
        bc.threshold = o.threshold;
        bc.radar.sample_rate_hz = rx.sample_rate_hz;
        det = std::make_unique<detector::BaselineDetector>(bc);
    } else {
        det = std::make_unique<detector::CnnDetector>(detector::load_model(o.weights), dataset::feature_domain_from_string(o.domain));
    }
    const std::size_t w = iqcore::kWindowLength;
    const std::size_t n_windows = rx.size() / w;
    const std::size_t n_batches = n_windows / o.batch;
    if (n_batches == 0) throw Error(ErrorCode::BufferTooShort, "input holds fewer than one batch of windows");
    // Zero history in front so early batches have the look-back a detector needs.
    const std::size_t pad = det->history_needed(o.batch) - o.batch * w;
    std::vector<iqcore::cf32> padded(pad, iqcore::cf32{});
    padded.insert(padded.end(), rx.samples.begin(), rx.samples.begin() + static_cast<std::ptrdiff_t>(n_batches * o.batch * w));

    detector::VoteState vote(o.batch, o.ring);
    std::optional<std::ofstream> csv;
    if (!o.out.empty()) csv = open_csv(o.out, "batch,window,probability,radar_present");
    std::optional<std::uint64_t> first_radar_window;
    std::optional<detector::DetectionVerdict> last;
    std::size_t positives = 0;
    for (std::size_t b = 0; b < n_batches; ++b) {
        const std::size_t end = pad + (b + 1) * o.batch * w;
        const auto tail = std::span<const iqcore::cf32>(padded).first(end);
        const auto probs = det->probabilities(tail, o.batch);
        const auto v = vote.step(probs, 0.0);
        if (v) last = v;
        if (v && v->radar_present && !first_radar_window) first_radar_window = v->window_index;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            positives += probs[i] >= 0.5 ? 1 : 0;
            if (csv) *csv << b << ',' << b * o.batch + i << ',' << probs[i] << ',' << (v ? (v->radar_present ? "1" : "0") : "") << '\n';
        }
    }
    json s = {{"windows", n_batches * o.batch}, {"batches", n_batches}, {"positive_windows", positives},
              {"detector", o.baseline ? "baseline" : "cnn"}};
    s["first_radar_window"] = first_radar_window ? json(*first_radar_window) : json(nullptr);
    s["final_verdict"] = last ? json{{"radar_present", last->radar_present}, {"vote_fraction", last->vote_fraction}} : json(nullptr);
    print_summary(s);
    return 0;
}

// ---- run-experiment ----

struct ExperimentOpts {
    std::string config, out, weights;
    std::optional<std::uint64_t> seed;
};

int run_run_experiment(const ExperimentOpts& o)
{
    auto cfg = load_or_default<controlplane::ExperimentConfig>(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (!o.weights.empty()) {
        cfg.weights = o.weights;
        cfg.detector = controlplane::DetectorKind::Cnn;
    }
    const auto r = controlplane::run_experiment(cfg);
    const fs::path dir = o.out;
    fs::create_directories(dir);
    controlplane::write_event_log(r.events, dir / "events.jsonl");
    controlplane::write_kpi_csv(r.kpi, dir / "kpi.csv");
    controlplane::write_occupancy_csv(r.occupancy, dir / "occupancy.csv");
    json s = {{"batches", r.batches}, {"windows", r.windows}, {"events", r.events.size()}};
    s["detection_delay_s"] = r.detection_delay_s ? json(*r.detection_delay_s) : json(nullptr);
    json timeline = json::array();
    for (const auto& e : r.events)
        if (e.kind != controlplane::EventKind::VerdictChange) timeline.push_back({{"t_s", e.t_s}, {"event", controlplane::to_string(e.kind)}});
    s["timeline"] = timeline;
    print_summary(s);
    return 0;
}

// ---- bench-latency ----

struct BenchOpts {
    std::string weights, out;
    std::vector<std::size_t> batches = {1, 10, 100};
    int trials = 10;
    std::uint64_t seed = 1;
};

int run_bench_latency(const BenchOpts& o)
{
    const auto model = o.weights.empty() ? detector::Model::from_weights(detector::make_random_weights({}, o.seed))
                                         : detector::load_model(o.weights);
    const auto rep = detector::bench_latency(model, o.batches, o.trials, o.seed);
    if (!o.out.empty()) {
        auto csv = open_csv(o.out, "batch,mean_s,std_s,cv");
        for (const auto& p : rep.points) csv << p.batch << ',' << p.mean_s << ',' << p.std_s << ',' << p.cv << '\n';
    }
    json pts = json::array();
    for (const auto& p : rep.points) pts.push_back({{"batch", p.batch}, {"mean_s", p.mean_s}, {"std_s", p.std_s}, {"cv", p.cv}});
    print_summary({{"points", pts}, {"monotone", rep.monotone}, {"slope_s", rep.slope_s}, {"intercept_s", rep.intercept_s},
                   {"r2", rep.r2}, {"weights", o.weights.empty() ? "random" : o.weights}});
    return 0;
}

// ---- export-psd ----

struct PsdOpts {
    std::string input, out;
    std::size_t nfft = 1024;
    double sample_rate = 0.0;
};

int run_export_psd(const PsdOpts& o)
{
    const auto buf = load_input(o.input, o.sample_rate);
    const auto psd = iqcore::psd_estimate(buf, o.nfft);
    const auto freq = iqcore::psd_frequencies(o.nfft, buf.sample_rate_hz);
    auto csv = open_csv(o.out, "freq_hz,psd_db");
    for (std::size_t i = 0; i < psd.size(); ++i) csv << freq[i] << ',' << psd[i] << '\n';
    print_summary({{"bins", psd.size()}, {"sample_rate_hz", buf.sample_rate_hz}});
    return 0;
}

// ---- export-correlation ----

struct CorrOpts {
    std::string input, templ, radar_config, out;
    double sample_rate = 0.0;
    bool keep_dc = false;
};

int run_export_correlation(const CorrOpts& o)
{
    const auto rx = load_input(o.input, o.sample_rate);
    iqcore::IQBuffer t;
    if (!o.templ.empty()) {
        t = load_input(o.templ, rx.sample_rate_hz);
    } else {
        auto p = load_or_default<waveforms::RadarParams>(o.radar_config);
        p.sample_rate_hz = rx.sample_rate_hz;
        t = waveforms::radar_pulse_template(p);
    }
    const auto rho = channel::correlate_template(rx, t, !o.keep_dc);
    auto csv = open_csv(o.out, "lag,rho");
    for (std::size_t i = 0; i < rho.size(); ++i) csv << i << ',' << rho[i] << '\n';
    const auto peak = std::max_element(rho.begin(), rho.end());
    print_summary({{"lags", rho.size()}, {"template_length", t.size()}, {"peak", *peak}, {"peak_lag", peak - rho.begin()}});
    return 0;
}

// ---- evaluate ----

struct EvalOpts {
    std::string weights, dataset, out, split = "test";
    std::size_t batch = 64;
};

int run_evaluate(const EvalOpts& o)
{
    const fs::path dir = o.dataset;
    const auto m = dataset::load_dataset_manifest(dir / "manifest.json");
    const auto model = detector::load_model(o.weights);
    std::vector<std::uint64_t> wanted;
    if (o.split == "train") wanted = m.splits.train;
    else if (o.split == "val") wanted = m.splits.val;
    else if (o.split == "test") wanted = m.splits.test;
    else if (o.split == "all") {
        wanted.resize(m.record_count);
        for (std::uint64_t i = 0; i < m.record_count; ++i) wanted[i] = i;
    } else throw CLI::ValidationError("--split", "must be train, val, test or all");
    std::sort(wanted.begin(), wanted.end());

    struct Bin {
        std::uint64_t n = 0, correct = 0;
    };
    std::map<std::string, Bin> by_snr, by_sinr;
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::vector<dataset::DatasetRecord> pending;
    auto flush = [&] {
        if (pending.empty()) return;
        std::vector<float> x;
        x.reserve(pending.size() * dataset::kFeatureCount);
        for (const auto& r : pending) x.insert(x.end(), r.features.begin(), r.features.end());
        const auto p = model.forward(x, pending.size());
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const bool pred = p[i] >= 0.5, truth = pending[i].label == 1;
            (pred ? (truth ? tp : fp) : (truth ? fn : tn))++;
            const auto key = [](const std::optional<double>& v) {
                if (!v) return std::string("none");
                std::ostringstream s;
                s << *v;
                return s.str();
            };
            auto& a = by_snr[key(pending[i].meta.snr_db)];
            auto& b = by_sinr[key(pending[i].meta.sinr_db)];
            ++a.n;
            ++b.n;
            a.correct += pred == truth;
            b.correct += pred == truth;
        }
        pending.clear();
    };
    dataset::RecordReader reader(dir / m.records_file);
    std::size_t next = 0;
    while (next < wanted.size()) {
        const std::uint64_t idx = reader.index();
        auto rec = reader.next();
        if (!rec) throw Error(ErrorCode::CorruptRecord, "record file shorter than its manifest");
        if (idx != wanted[next]) continue;
        ++next;
        pending.push_back(std::move(*rec));
        if (pending.size() == o.batch) flush();
    }
    flush();
    const double total = static_cast<double>(tp + fp + tn + fn);
    if (!o.out.empty()) {
        auto csv = open_csv(o.out, "axis,bin,count,accuracy");
        for (const auto& [k, b] : by_snr) csv << "snr_db," << k << ',' << b.n << ',' << static_cast<double>(b.correct) / b.n << '\n';
        for (const auto& [k, b] : by_sinr) csv << "sinr_db," << k << ',' << b.n << ',' << static_cast<double>(b.correct) / b.n << '\n';
    }
    print_summary({{"records", tp + fp + tn + fn},
                   {"accuracy", total > 0 ? static_cast<double>(tp + tn) / total : 0.0},
                   {"precision", tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0},
                   {"recall", tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0}});
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectrum-sharing digital twin toolkit"};
    app.require_subcommand(1);
    std::function<int()> action;

    SynthRadarOpts radar;
    auto* c = app.add_subcommand("synth-radar", "Generate the pulsed radar waveform");
    c->add_option("--config", radar.config, "Radar parameters JSON")->check(CLI::ExistingFile);
    c->add_option("--out", radar.out, "Output .iq path")->required();
    c->add_option("--seed", radar.seed, "Pulse jitter seed");
    c->callback([&] { action = [&] { return run_synth_radar(radar); }; });

    SynthCellOpts cell;
    c = app.add_subcommand("synth-cellular", "Generate the OFDM cellular proxy");
    c->add_option("--config", cell.config, "Cellular parameters JSON")->check(CLI::ExistingFile);
    c->add_option("--out", cell.out, "Output .iq path")->required();
    c->add_option("--symbols", cell.symbols, "Number of OFDM symbols")->check(CLI::PositiveNumber);
    c->add_option("--seed", cell.seed, "QAM payload seed");
    c->callback([&] { action = [&] { return run_synth_cellular(cell); }; });

    MakeScenarioOpts scen;
    c = app.add_subcommand("make-scenario", "Write scenario JSON, path-loss heatmap and per-link taps");
    c->add_option("--config", scen.config, "Scenario JSON (default layout if omitted)")->check(CLI::ExistingFile);
    c->add_option("--out", scen.out, "Output directory")->required();
    c->add_option("--seed", scen.seed, "Multipath seed");
    c->add_option("--heatmap-t", scen.heatmap_t, "Scenario time of the heatmap in seconds");
    c->callback([&] { action = [&] { return run_make_scenario(scen); }; });

    ApproxOpts approx;
    c = app.add_subcommand("approx-taps", "Reduce a raw tap profile to the emulator tap budget");
    c->add_option("--in", approx.in, "Raw taps CSV (delay_s,gain_re,gain_im)")->required()->check(CLI::ExistingFile);
    c->add_option("--out", approx.out, "Output taps CSV")->required();
    c->add_option("--k", approx.k, "Maximum number of taps")->check(CLI::PositiveNumber);
    c->add_option("--max-spread", approx.max_spread, "Maximum delay spread in seconds");
    c->add_option("--seed", approx.seed, "k-means seed");
    c->callback([&] { action = [&] { return run_approx_taps(approx); }; });

    GenDatasetOpts gen;
    c = app.add_subcommand("gen-dataset", "Generate the labelled window corpus");
    c->add_option("--config", gen.config, "Dataset config JSON")->check(CLI::ExistingFile);
    c->add_option("--out", gen.out, "Output directory")->required();
    c->add_option("--seed", gen.seed, "Master seed");
    c->add_option("--records-per-cell", gen.records_per_cell, "Records per (combo, SNR) cell")->check(CLI::PositiveNumber);
    c->callback([&] { action = [&] { return run_gen_dataset(gen); }; });

    EmulateOpts emu;
    c = app.add_subcommand("emulate", "Pass an IQ file through a tap set");
    c->add_option("--input", emu.input, "Input .iq")->required()->check(CLI::ExistingFile);
    c->add_option("--taps", emu.taps, "Taps CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--out", emu.out, "Output .iq")->required();
    c->add_option("--noise-power", emu.noise_power, "AWGN power per sample")->check(CLI::NonNegativeNumber);
    c->add_option("--rx-gain-db", emu.rx_gain_db, "Receiver gain in dB");
    c->add_option("--sample-rate", emu.sample_rate, "Sample rate when the input has no manifest");
    c->add_option("--seed", emu.seed, "Noise seed");
    c->callback([&] { action = [&] { return run_emulate(emu); }; });

    DetectOpts det;
    c = app.add_subcommand("detect", "Run the detector and vote over an IQ file");
    c->add_option("--weights", det.weights, "SPTWNN weights file")->check(CLI::ExistingFile);
    c->add_flag("--baseline", det.baseline, "Use the matched-filter baseline instead of the CNN");
    c->add_option("--threshold", det.threshold, "Baseline correlation threshold");
    c->add_option("--input", det.input, "Input .iq")->required()->check(CLI::ExistingFile);
    c->add_option("--batch", det.batch, "Windows per batch")->check(CLI::PositiveNumber);
    c->add_option("--ring", det.ring, "Vote ring size")->check(CLI::PositiveNumber);
    c->add_option("--domain", det.domain, "CNN feature domain")->check(CLI::IsMember({"frequency", "time"}));
    c->add_option("--sample-rate", det.sample_rate, "Sample rate when the input has no manifest");
    c->add_option("--out", det.out, "Per-window CSV");
    c->callback([&] { action = [&] { return run_detect(det); }; });

    ExperimentOpts exp;
    c = app.add_subcommand("run-experiment", "Run the vacate/resume control loop over model time");
    c->add_option("--config", exp.config, "Experiment config JSON")->check(CLI::ExistingFile);
    c->add_option("--out", exp.out, "Output directory")->required();
    c->add_option("--weights", exp.weights, "Use the CNN detector with these weights")->check(CLI::ExistingFile);
    c->add_option("--seed", exp.seed, "Experiment seed");
    c->callback([&] { action = [&] { return run_run_experiment(exp); }; });

    BenchOpts bench;
    c = app.add_subcommand("bench-latency", "Time forward() per batch size");
    c->add_option("--weights", bench.weights, "SPTWNN weights file (random weights if omitted)")->check(CLI::ExistingFile);
    c->add_option("--batches", bench.batches, "Batch sizes")->delimiter(',');
    c->add_option("--trials", bench.trials, "Timed calls per batch size (>= 10)");
    c->add_option("--seed", bench.seed, "Seed for random weights and inputs");
    c->add_option("--out", bench.out, "Latency CSV");
    c->callback([&] { action = [&] { return run_bench_latency(bench); }; });

    PsdOpts psd;
    c = app.add_subcommand("export-psd", "Welch PSD of an IQ file as CSV");
    c->add_option("--input", psd.input, "Input .iq")->required()->check(CLI::ExistingFile);
    c->add_option("--out", psd.out, "Output CSV")->required();
    c->add_option("--nfft", psd.nfft, "Segment length")->check(CLI::PositiveNumber);
    c->add_option("--sample-rate", psd.sample_rate, "Sample rate when the input has no manifest");
    c->callback([&] { action = [&] { return run_export_psd(psd); }; });

    CorrOpts corr;
    c = app.add_subcommand("export-correlation", "Normalized correlation against a template as CSV");
    c->add_option("--input", corr.input, "Received .iq")->required()->check(CLI::ExistingFile);
    c->add_option("--template", corr.templ, "Template .iq (one radar pulse if omitted)")->check(CLI::ExistingFile);
    c->add_option("--radar-config", corr.radar_config, "Radar parameters for the default template")->check(CLI::ExistingFile);
    c->add_flag("--keep-dc", corr.keep_dc, "Do not remove the mean before correlating");
    c->add_option("--sample-rate", corr.sample_rate, "Sample rate when the input has no manifest");
    c->add_option("--out", corr.out, "Output CSV")->required();
    c->callback([&] { action = [&] { return run_export_correlation(corr); }; });

    EvalOpts ev;
    c = app.add_subcommand("evaluate", "Accuracy of a weights file on a dataset split, per SNR and SINR");
    c->add_option("--weights", ev.weights, "SPTWNN weights file")->required()->check(CLI::ExistingFile);
    c->add_option("--dataset", ev.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("--split", ev.split, "train, val, test or all");
    c->add_option("--batch", ev.batch, "Inference batch size")->check(CLI::PositiveNumber);
    c->add_option("--out", ev.out, "Per-bin accuracy CSV");
    c->callback([&] { action = [&] { return run_evaluate(ev); }; });

    try {
        app.parse(argc, argv);
        return action();
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
