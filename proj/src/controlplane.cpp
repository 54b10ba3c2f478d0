// SPDX-License-Identifier: Apache-2.0

#include "sptw/controlplane.hpp"

#include "sptw/channel.hpp"
#include "sptw/config.hpp"
#include "sptw/error.hpp"
#include "sptw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

using nlohmann::json;

namespace sptw::controlplane {

using iqcore::cf32;

namespace {

constexpr std::uint64_t kTapStream = 0x7a9;
constexpr std::uint64_t kCellStream = 0xce11;
constexpr std::uint64_t kNoiseStream = 0x9015e;
constexpr std::int64_t kCellSymbols = 128;

void require(bool ok, const std::string& what)
{
    if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

Event make_event(double t, EventKind k, json payload = json::object())
{
    return Event{t, k, std::move(payload)};
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) noexcept
{
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

void ControlConfig::validate() const
{
    require(clear_streak >= 1, "clear_streak must be at least 1");
    require(powerup_delay_s >= 0.0 && std::isfinite(powerup_delay_s), "powerup_delay_s must be finite and >= 0");
    require(ue_reconnect_s >= 0.0 && std::isfinite(ue_reconnect_s), "ue_reconnect_s must be finite and >= 0");
}

void check_transition(BSStateKind from, BSStateKind to)
{
    const bool ok = (from == BSStateKind::Transmitting && to == BSStateKind::Vacated) ||
                    (from == BSStateKind::Vacated && to == BSStateKind::PoweringUp) ||
                    (from == BSStateKind::PoweringUp && to == BSStateKind::Transmitting);
    if (!ok) throw Error(ErrorCode::IllegalTransition, "illegal transition " + to_string(from) + " -> " + to_string(to));
}

StepResult advance_timers(const BSState& s, double t_s, const ControlConfig& cfg)
{
    StepResult r{s, {}};
    auto& st = r.state;
    if (st.kind == BSStateKind::PoweringUp && t_s >= st.since_s + cfg.powerup_delay_s) {
        const double at = st.since_s + cfg.powerup_delay_s;
        check_transition(st.kind, BSStateKind::Transmitting);
        st.kind = BSStateKind::Transmitting;
        st.since_s = at;
        st.clear_count = 0;
        st.reconnect_at_s = at + cfg.ue_reconnect_s;
        r.events.push_back(make_event(at, EventKind::BSResumed, {{"powerup_s", cfg.powerup_delay_s}}));
    }
    if (st.kind == BSStateKind::Transmitting && st.reconnect_at_s && t_s >= *st.reconnect_at_s) {
        r.events.push_back(make_event(*st.reconnect_at_s, EventKind::UEReconnected));
        st.reconnect_at_s.reset();
    }
    return r;
}

StepResult step_state(const BSState& s, const std::optional<detector::DetectionVerdict>& verdict, double t_s,
                      const ControlConfig& cfg)
{
    StepResult r = advance_timers(s, t_s, cfg);
    auto& st = r.state;
    const bool radar = verdict && verdict->radar_present;
    const double fraction = verdict ? verdict->vote_fraction : 0.0;
    switch (st.kind) {
    case BSStateKind::Transmitting:
        if (radar) {
            check_transition(st.kind, BSStateKind::Vacated);
            st = BSState{BSStateKind::Vacated, t_s, 0, std::nullopt};
            r.events.push_back(make_event(t_s, EventKind::BSShutdown, {{"vote_fraction", fraction}}));
        }
        break;
    case BSStateKind::Vacated:
        st.clear_count = radar ? 0 : st.clear_count + 1;
        if (st.clear_count >= cfg.clear_streak) {
            check_transition(st.kind, BSStateKind::PoweringUp);
            st = BSState{BSStateKind::PoweringUp, t_s, 0, std::nullopt};
            r.events.push_back(make_event(t_s, EventKind::BSPowerUpStart, {{"clear_streak", cfg.clear_streak}}));
        }
        break;
    case BSStateKind::PoweringUp:
        break;
    }
    return r;
}

const std::array<double, kCqiLevels>& cqi_thresholds_db()
{
    static const auto table = [] {
        std::array<double, kCqiLevels> t{};
        for (int i = 0; i < kCqiLevels; ++i) t[static_cast<std::size_t>(i)] = -6.0 + 26.0 * i / (kCqiLevels - 1);
        return t;
    }();
    return table;
}

const std::array<double, kCqiLevels>& cqi_efficiency()
{
    static const std::array<double, kCqiLevels> table = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
                                                         2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547};
    return table;
}

int cqi_from_sinr(double sinr_db)
{
    const auto& t = cqi_thresholds_db();
    int cqi = 1;
    for (int i = 0; i < kCqiLevels; ++i)
        if (sinr_db >= t[static_cast<std::size_t>(i)]) cqi = i + 1;
    return cqi;
}

KpiSample kpi_proxy(double sinr_db, BSStateKind state, const KpiConfig& cfg)
{
    KpiSample k;
    k.sinr_db = sinr_db;
    k.cqi = cqi_from_sinr(sinr_db);
    if (state == BSStateKind::Transmitting)
        k.throughput_mbps =
            std::min(cfg.offered_mbps, cqi_efficiency()[static_cast<std::size_t>(k.cqi - 1)] * cfg.bandwidth_factor_mhz);
    return k;
}

bool RadarSchedule::active(double t_s) const noexcept
{
    if (!radar_on_s) return false;
    return t_s >= *radar_on_s && (!radar_off_s || t_s < *radar_off_s);
}

void ExperimentConfig::validate() const
{
    scenario.validate();
    radar.validate();
    cellular.validate();
    control.validate();
    (void)scenario.index_of(bs_id);
    (void)scenario.index_of(ship_id);
    require(scenario.node(ship_id).role == scenario::Role::Ship, "experiment ship '" + ship_id + "' is not a ship");
    require(std::abs(cellular.sample_rate_hz - radar.sample_rate_hz) < 1e-6, "radar and cellular sample rates differ");
    require(batch_size >= 1 && ring_size >= 1, "batch and ring sizes must be positive");
    require(batch_period_s > 0.0 && std::isfinite(batch_period_s), "batch_period_s must be positive");
    require(kpi_step_s > 0.0 && std::isfinite(kpi_step_s), "kpi_step_s must be positive");
    require(std::isfinite(noise_figure_db), "noise_figure_db must be finite");
    require(!duration_s || (*duration_s > 0.0 && std::isfinite(*duration_s)), "duration_s must be positive");
    if (schedule.radar_on_s && schedule.radar_off_s)
        require(*schedule.radar_off_s > *schedule.radar_on_s, "radar_off_s must follow radar_on_s");
    require(!schedule.radar_off_s || schedule.radar_on_s, "radar_off_s given without radar_on_s");
    if (detector == DetectorKind::Cnn) require(!weights.empty(), "the CNN detector needs a weights file");
}

double ExperimentConfig::effective_duration_s() const { return duration_s.value_or(scenario.duration_s); }

double noise_floor_dbm(double bandwidth_hz, double noise_figure_db)
{
    require(bandwidth_hz > 0.0, "bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

namespace {

struct ComponentLink {
    const scenario::LinkTimeline* link = nullptr;
    double tx_power_dbm = 0.0;
    const std::vector<cf32>* source = nullptr; ///< cyclic, unit power
};

class ExperimentRunner {
public:
    ExperimentRunner(const ExperimentConfig& cfg, const detector::WindowDetector& det) : cfg_(cfg), det_(det)
    {
        cfg_.validate();
        fs_ = cfg_.radar.sample_rate_hz;
        taps_ = scenario::build_scenario_taps(cfg_.scenario, derive_seed(cfg_.seed, {kTapStream}));
        radar_ = unit_power(waveforms::gen_radar(cfg_.radar).samples);
        const auto& bs = cfg_.scenario.node(cfg_.bs_id);
        std::uint64_t k = 0;
        for (const auto& n : cfg_.scenario.nodes)
            if (n.role == scenario::Role::UE) {
                cell_.push_back(unit_power(waveforms::gen_cellular(cfg_.cellular, kCellSymbols, derive_seed(cfg_.seed, {kCellStream, k++})).samples));
                ue_ids_.push_back(n.id);
            }
        for (std::size_t i = 0; i < ue_ids_.size(); ++i) {
            const auto& n = cfg_.scenario.node(ue_ids_[i]);
            ue_links_.push_back({&taps_.link(bs.id, n.id), n.tx_power_dbm, &cell_[i]});
        }
        radar_link_ = {&taps_.link(bs.id, cfg_.ship_id), cfg_.scenario.node(cfg_.ship_id).tx_power_dbm, &radar_};
        noise_dbm_ = noise_floor_dbm(fs_, cfg_.noise_figure_db);
        history_ = det_.history_needed(cfg_.batch_size);
    }

    ExperimentResult run()
    {
        ExperimentResult res;
        detector::VoteState vote(cfg_.batch_size, cfg_.ring_size);
        BSState state;
        bool last_radar = false;
        const double duration = cfg_.effective_duration_s();
        const auto& sched = cfg_.schedule;
        if (sched.radar_on_s && *sched.radar_on_s <= duration)
            res.events.push_back(make_event(*sched.radar_on_s, EventKind::RadarOnsetTruth));
        if (sched.radar_off_s && *sched.radar_off_s <= duration)
            res.events.push_back(make_event(*sched.radar_off_s, EventKind::RadarEndTruth));

        for (std::uint64_t k = 0;; ++k) {
            const double t = static_cast<double>(k) * cfg_.batch_period_s;
            if (t > duration) break;
            const auto rx = receive(t, k, state.kind == BSStateKind::Transmitting);
            const auto probs = det_.probabilities(rx, cfg_.batch_size);
            const auto verdict = vote.step(probs, cfg_.batch_period_s);
            if (verdict && verdict->radar_present != last_radar) {
                last_radar = verdict->radar_present;
                res.events.push_back(make_event(t, EventKind::VerdictChange,
                                                {{"radar_present", last_radar}, {"vote_fraction", verdict->vote_fraction}}));
            }
            auto step = step_state(state, verdict, t, cfg_.control);
            state = step.state;
            res.events.insert(res.events.end(), step.events.begin(), step.events.end());
            res.occupancy.push_back({t, state.kind == BSStateKind::Transmitting});
            ++res.batches;
            res.windows += cfg_.batch_size;
        }
        auto tail = advance_timers(state, duration, cfg_.control);
        res.events.insert(res.events.end(), tail.events.begin(), tail.events.end());
        std::stable_sort(res.events.begin(), res.events.end(), [](const Event& a, const Event& b) { return a.t_s < b.t_s; });

        std::optional<double> onset, shutdown;
        for (const auto& e : res.events) {
            if (e.kind == EventKind::RadarOnsetTruth && !onset) onset = e.t_s;
            if (e.kind == EventKind::BSShutdown && onset && !shutdown) shutdown = e.t_s;
        }
        if (onset && shutdown) res.detection_delay_s = *shutdown - *onset;
        res.kpi = kpi_rows(res.events, duration);
        return res;
    }

private:
    static std::vector<cf32> unit_power(std::vector<cf32> x)
    {
        const double p = iqcore::measure_power(x);
        if (!(p > 0.0)) throw Error(ErrorCode::InvalidParams, "cannot normalize a zero-power waveform");
        const float s = static_cast<float>(1.0 / std::sqrt(p));
        for (auto& v : x) v *= s;
        return x;
    }

    int step_at(double t) const
    {
        const int steps = cfg_.scenario.num_timesteps();
        const auto i = static_cast<std::int64_t>(std::floor(t / cfg_.scenario.sampling_time_s));
        return static_cast<int>(floor_mod(i, steps));
    }

    // Adds `link`'s contribution over samples [n0 - lead, n0 + out.size()) into out.
    void add_component(std::vector<iqcore::cd>& out, std::int64_t n0, const ComponentLink& c, int step, bool gated) const
    {
        const auto taps = channel::quantize_taps(c.link->steps.at(static_cast<std::size_t>(step)), fs_);
        std::size_t lead = 0;
        for (const auto& tp : taps) lead = std::max(lead, tp.delay);
        const auto& src = *c.source;
        const auto m = static_cast<std::int64_t>(src.size());
        std::vector<iqcore::cd> x(out.size() + lead);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const std::int64_t n = n0 - static_cast<std::int64_t>(lead) + static_cast<std::int64_t>(i);
            if (gated && !cfg_.schedule.active(static_cast<double>(n) / fs_)) continue;
            x[i] = iqcore::cd(src[static_cast<std::size_t>(floor_mod(n, m))]);
        }
        const auto y = channel::fir_apply(x, taps);
        const double amp = std::pow(10.0, (c.tx_power_dbm - noise_dbm_) / 20.0);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += amp * y[lead + i];
    }

    std::vector<cf32> receive(double t, std::uint64_t k, bool bs_transmitting) const
    {
        const std::int64_t n0 = std::llround(t * fs_) - static_cast<std::int64_t>(history_);
        const int step = step_at(t);
        std::vector<iqcore::cd> acc(history_);
        const double first = static_cast<double>(n0) / fs_;
        const bool radar_in_window = cfg_.schedule.active(first) || cfg_.schedule.active(t) ||
                                     (cfg_.schedule.radar_on_s && *cfg_.schedule.radar_on_s > first && *cfg_.schedule.radar_on_s < t) ||
                                     (cfg_.schedule.radar_off_s && *cfg_.schedule.radar_off_s > first && *cfg_.schedule.radar_off_s < t);
        if (radar_in_window) add_component(acc, n0, radar_link_, step, true);
        if (bs_transmitting)
            for (const auto& c : ue_links_) add_component(acc, n0, c, step, false);
        const auto noise = waveforms::gen_noise(static_cast<std::int64_t>(history_), 1.0, derive_seed(cfg_.seed, {kNoiseStream, k}), fs_);
        std::vector<cf32> rx(history_);
        for (std::size_t i = 0; i < history_; ++i)
            rx[i] = cf32(static_cast<float>(acc[i].real()), static_cast<float>(acc[i].imag())) + noise.samples[i];
        return rx;
    }

    static BSStateKind state_at(const std::vector<Event>& events, double t)
    {
        BSStateKind s = BSStateKind::Transmitting;
        for (const auto& e : events) {
            if (e.t_s > t) break;
            if (e.kind == EventKind::BSShutdown) s = BSStateKind::Vacated;
            if (e.kind == EventKind::BSPowerUpStart) s = BSStateKind::PoweringUp;
            if (e.kind == EventKind::BSResumed) s = BSStateKind::Transmitting;
        }
        return s;
    }

    std::vector<KpiSample> kpi_rows(const std::vector<Event>& events, double duration) const
    {
        std::vector<KpiSample> rows;
        const double ue_noise = noise_floor_dbm(cfg_.cellular.bandwidth_hz, cfg_.noise_figure_db);
        const auto& bs = cfg_.scenario.node(cfg_.bs_id);
        const auto& ship = cfg_.scenario.node(cfg_.ship_id);
        for (std::int64_t i = 0;; ++i) {
            const double t = static_cast<double>(i) * cfg_.kpi_step_s;
            if (t > duration) break;
            const double t_geo = std::fmod(t, cfg_.scenario.duration_s);
            const auto pos = scenario::sample_positions(cfg_.scenario, t_geo);
            const auto st = state_at(events, t);
            for (const auto& id : ue_ids_) {
                const auto& ue = cfg_.scenario.node(id);
                const double s = bs.tx_power_dbm - scenario::path_loss_db(pos.at(bs.id), pos.at(id), cfg_.scenario.carrier_hz,
                                                                           scenario::link_exponent(cfg_.scenario, bs, ue));
                double in_mw = std::pow(10.0, ue_noise / 10.0);
                if (cfg_.schedule.active(t)) {
                    const double r = ship.tx_power_dbm - scenario::path_loss_db(pos.at(ship.id), pos.at(id), cfg_.scenario.carrier_hz,
                                                                                scenario::link_exponent(cfg_.scenario, ship, ue));
                    in_mw += std::pow(10.0, r / 10.0);
                }
                auto k = kpi_proxy(s - 10.0 * std::log10(in_mw), st, cfg_.kpi);
                k.t_s = t;
                k.ue_id = id;
                rows.push_back(std::move(k));
            }
        }
        return rows;
    }

    ExperimentConfig cfg_;
    const detector::WindowDetector& det_;
    double fs_ = 0.0;
    double noise_dbm_ = 0.0;
    std::size_t history_ = 0;
    scenario::ScenarioTaps taps_;
    std::vector<cf32> radar_;
    std::vector<std::vector<cf32>> cell_;
    std::vector<std::string> ue_ids_;
    std::vector<ComponentLink> ue_links_;
    ComponentLink radar_link_;
};

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const detector::WindowDetector& det)
{
    return ExperimentRunner(cfg, det).run();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.detector == DetectorKind::Cnn) {
        const detector::CnnDetector det(detector::load_model(cfg.weights), cfg.feature_domain);
        return run_experiment(cfg, det);
    }
    auto bc = cfg.baseline;
    bc.radar = cfg.radar;
    const detector::BaselineDetector det(bc);
    return run_experiment(cfg, det);
}

namespace {

const std::map<EventKind, std::string>& event_names()
{
    static const std::map<EventKind, std::string> names = {
        {EventKind::RadarOnsetTruth, "RadarOnsetTruth"}, {EventKind::RadarEndTruth, "RadarEndTruth"},
        {EventKind::VerdictChange, "VerdictChange"},     {EventKind::BSShutdown, "BSShutdown"},
        {EventKind::BSPowerUpStart, "BSPowerUpStart"},   {EventKind::BSResumed, "BSResumed"},
        {EventKind::UEReconnected, "UEReconnected"},
    };
    return names;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    out << std::setprecision(12);
    return out;
}

} // namespace

std::string to_string(EventKind k) { return event_names().at(k); }

std::string to_string(BSStateKind k)
{
    switch (k) {
    case BSStateKind::Transmitting: return "Transmitting";
    case BSStateKind::Vacated: return "Vacated";
    case BSStateKind::PoweringUp: return "PoweringUp";
    }
    return "?";
}

EventKind event_kind_from_string(const std::string& s)
{
    for (const auto& [k, name] : event_names())
        if (name == s) return k;
    throw Error(ErrorCode::InvalidParams, "unknown event '" + s + "'");
}

void write_event_log(const std::vector<Event>& events, const std::filesystem::path& path)
{
    auto out = open_out(path);
    for (const auto& e : events) out << json{{"t_s", e.t_s}, {"event", to_string(e.kind)}, {"payload", e.payload}}.dump() << '\n';
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<Event> read_event_log(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MalformedFile, "cannot open " + path.string());
    std::vector<Event> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            out.push_back({j.at("t_s").get<double>(), event_kind_from_string(j.at("event").get<std::string>()),
                           j.value("payload", json::object())});
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedFile, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedFile, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_kpi_csv(const std::vector<KpiSample>& kpi, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "t_s,ue_id,sinr_db,cqi,throughput_mbps\n";
    for (const auto& k : kpi) out << k.t_s << ',' << k.ue_id << ',' << k.sinr_db << ',' << k.cqi << ',' << k.throughput_mbps << '\n';
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

void write_occupancy_csv(const std::vector<OccupancySample>& occ, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "t_s,band_active\n";
    for (const auto& o : occ) out << o.t_s << ',' << (o.band_active ? 1 : 0) << '\n';
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j)
{
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

} // namespace

void to_json(json& j, const ExperimentConfig& c)
{
    j = json{{"scenario", c.scenario},
             {"radar_on_s", opt_json(c.schedule.radar_on_s)},
             {"radar_off_s", opt_json(c.schedule.radar_off_s)},
             {"duration_s", opt_json(c.duration_s)},
             {"bs_id", c.bs_id},
             {"ship_id", c.ship_id},
             {"seed", c.seed},
             {"detector", c.detector == DetectorKind::Cnn ? "cnn" : "baseline"},
             {"baseline", {{"threshold", c.baseline.threshold}, {"context", c.baseline.context}}},
             {"weights", c.weights.string()},
             {"feature_domain", dataset::to_string(c.feature_domain)},
             {"batch_size", c.batch_size},
             {"ring_size", c.ring_size},
             {"batch_period_s", c.batch_period_s},
             {"radar", c.radar},
             {"cellular", c.cellular},
             {"noise_figure_db", c.noise_figure_db},
             {"kpi_step_s", c.kpi_step_s},
             {"control",
              {{"clear_streak", c.control.clear_streak},
               {"powerup_delay_s", c.control.powerup_delay_s},
               {"ue_reconnect_s", c.control.ue_reconnect_s}}},
             {"kpi", {{"offered_mbps", c.kpi.offered_mbps}, {"bandwidth_factor_mhz", c.kpi.bandwidth_factor_mhz}}}};
}

void from_json(const json& j, ExperimentConfig& c)
{
    config::check_keys(j,
                       {"scenario", "radar_on_s", "radar_off_s", "duration_s", "bs_id", "ship_id", "seed", "detector",
                        "baseline", "weights", "feature_domain", "batch_size", "ring_size", "batch_period_s", "radar",
                        "cellular", "noise_figure_db", "kpi_step_s", "control", "kpi"},
                       "experiment config");
    if (j.contains("scenario")) c.scenario = j.at("scenario").get<scenario::ScenarioSpec>();
    if (j.contains("radar_on_s")) c.schedule.radar_on_s = opt_from(j.at("radar_on_s"));
    if (j.contains("radar_off_s")) c.schedule.radar_off_s = opt_from(j.at("radar_off_s"));
    if (j.contains("duration_s")) c.duration_s = opt_from(j.at("duration_s"));
    if (j.contains("bs_id")) c.bs_id = j.at("bs_id").get<std::string>();
    if (j.contains("ship_id")) c.ship_id = j.at("ship_id").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("detector")) {
        const auto d = j.at("detector").get<std::string>();
        if (d == "cnn") c.detector = DetectorKind::Cnn;
        else if (d == "baseline") c.detector = DetectorKind::Baseline;
        else throw Error(ErrorCode::InvalidParams, "detector must be 'baseline' or 'cnn'");
    }
    if (j.contains("baseline")) {
        const auto& b = j.at("baseline");
        config::check_keys(b, {"threshold", "context"}, "baseline config");
        if (b.contains("threshold")) c.baseline.threshold = b.at("threshold").get<double>();
        if (b.contains("context")) c.baseline.context = b.at("context").get<std::size_t>();
    }
    if (j.contains("weights")) c.weights = j.at("weights").get<std::string>();
    if (j.contains("feature_domain")) c.feature_domain = dataset::feature_domain_from_string(j.at("feature_domain").get<std::string>());
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("ring_size")) c.ring_size = j.at("ring_size").get<std::size_t>();
    if (j.contains("batch_period_s")) c.batch_period_s = j.at("batch_period_s").get<double>();
    if (j.contains("radar")) c.radar = j.at("radar").get<waveforms::RadarParams>();
    if (j.contains("cellular")) c.cellular = j.at("cellular").get<waveforms::CellularParams>();
    if (j.contains("noise_figure_db")) c.noise_figure_db = j.at("noise_figure_db").get<double>();
    if (j.contains("kpi_step_s")) c.kpi_step_s = j.at("kpi_step_s").get<double>();
    if (j.contains("control")) {
        const auto& b = j.at("control");
        config::check_keys(b, {"clear_streak", "powerup_delay_s", "ue_reconnect_s"}, "control config");
        if (b.contains("clear_streak")) c.control.clear_streak = b.at("clear_streak").get<std::size_t>();
        if (b.contains("powerup_delay_s")) c.control.powerup_delay_s = b.at("powerup_delay_s").get<double>();
        if (b.contains("ue_reconnect_s")) c.control.ue_reconnect_s = b.at("ue_reconnect_s").get<double>();
    }
    if (j.contains("kpi")) {
        const auto& b = j.at("kpi");
        config::check_keys(b, {"offered_mbps", "bandwidth_factor_mhz"}, "kpi config");
        if (b.contains("offered_mbps")) c.kpi.offered_mbps = b.at("offered_mbps").get<double>();
        if (b.contains("bandwidth_factor_mhz")) c.kpi.bandwidth_factor_mhz = b.at("bandwidth_factor_mhz").get<double>();
    }
}

} // namespace sptw::controlplane
