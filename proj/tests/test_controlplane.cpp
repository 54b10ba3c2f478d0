// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "test_util.hpp"

#include "sptw/config.hpp"
#include "sptw/controlplane.hpp"

#include <random>

namespace cp = sptw::controlplane;
using cp::BSStateKind;
using cp::EventKind;
using sptw::ErrorCode;
using testutil::error_code_of;

namespace {

sptw::detector::DetectionVerdict verdict(bool radar)
{
    sptw::detector::DetectionVerdict v;
    v.radar_present = radar;
    v.vote_fraction = radar ? 0.8 : 0.1;
    return v;
}

std::optional<double> first_time(const std::vector<cp::Event>& ev, EventKind k)
{
    for (const auto& e : ev)
        if (e.kind == k) return e.t_s;
    return std::nullopt;
}

std::size_t count(const std::vector<cp::Event>& ev, EventKind k)
{
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](const cp::Event& e) { return e.kind == k; }));
}

} // namespace

TEST_CASE("radar verdict shuts the BS down; unknown verdicts do nothing")
{
    const cp::ControlConfig cfg;
    cp::BSState s;
    auto r = cp::step_state(s, std::nullopt, 1.0, cfg);
    CHECK(r.state.kind == BSStateKind::Transmitting);
    CHECK(r.events.empty());
    r = cp::step_state(s, verdict(false), 1.0, cfg);
    CHECK(r.state.kind == BSStateKind::Transmitting);
    r = cp::step_state(s, verdict(true), 2.5, cfg);
    CHECK(r.state.kind == BSStateKind::Vacated);
    CHECK(r.state.since_s == 2.5);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].kind == EventKind::BSShutdown);
    CHECK(r.events[0].t_s == 2.5);
}

TEST_CASE("clear streak starts power-up and the BS resumes after the delay")
{
    const cp::ControlConfig cfg;
    cp::BSState s{BSStateKind::Vacated, 3.0, 0, std::nullopt};
    double t = 3.0;
    for (int i = 0; i < 4; ++i) {
        s = cp::step_state(s, verdict(false), t += 0.1, cfg).state;
        CHECK(s.kind == BSStateKind::Vacated);
    }
    // a radar verdict resets the streak
    s = cp::step_state(s, verdict(true), t += 0.1, cfg).state;
    CHECK(s.clear_count == 0);
    for (int i = 0; i < 4; ++i) s = cp::step_state(s, std::nullopt, t += 0.1, cfg).state;
    auto r = cp::step_state(s, std::nullopt, t += 0.1, cfg);
    REQUIRE(r.state.kind == BSStateKind::PoweringUp);
    const double start = t;
    CHECK(r.events.at(0).kind == EventKind::BSPowerUpStart);
    s = r.state;
    // radar during power-up is not a legal edge and is ignored
    s = cp::step_state(s, verdict(true), start + 5.0, cfg).state;
    CHECK(s.kind == BSStateKind::PoweringUp);
    r = cp::step_state(s, std::nullopt, start + 9.99, cfg);
    CHECK(r.state.kind == BSStateKind::PoweringUp);
    r = cp::step_state(r.state, std::nullopt, start + 10.5, cfg);
    CHECK(r.state.kind == BSStateKind::Transmitting);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].kind == EventKind::BSResumed);
    CHECK(r.events[0].t_s == start + 10.0);
    r = cp::step_state(r.state, std::nullopt, start + 25.0, cfg);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].kind == EventKind::UEReconnected);
    CHECK(r.events[0].t_s == start + 20.0);
}

TEST_CASE("shutdown cancels a pending UE reconnection")
{
    const cp::ControlConfig cfg;
    cp::BSState s{BSStateKind::PoweringUp, 0.0, 0, std::nullopt};
    auto r = cp::step_state(s, verdict(true), 12.0, cfg); // resumes at 10, then shuts down at 12
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].kind == EventKind::BSResumed);
    CHECK(r.events[1].kind == EventKind::BSShutdown);
    CHECK_FALSE(r.state.reconnect_at_s.has_value());
}

TEST_CASE("only the three listed transitions are legal")
{
    CHECK_NOTHROW(cp::check_transition(BSStateKind::Transmitting, BSStateKind::Vacated));
    CHECK_NOTHROW(cp::check_transition(BSStateKind::Vacated, BSStateKind::PoweringUp));
    CHECK_NOTHROW(cp::check_transition(BSStateKind::PoweringUp, BSStateKind::Transmitting));
    CHECK(error_code_of([] { cp::check_transition(BSStateKind::Transmitting, BSStateKind::PoweringUp); }) ==
          ErrorCode::IllegalTransition);
    CHECK(error_code_of([] { cp::check_transition(BSStateKind::PoweringUp, BSStateKind::Vacated); }) ==
          ErrorCode::IllegalTransition);
    CHECK(error_code_of([] { cp::check_transition(BSStateKind::Vacated, BSStateKind::Transmitting); }) ==
          ErrorCode::IllegalTransition);
}

TEST_CASE("random verdict streams never produce an illegal transition")
{
    std::mt19937_64 rng(17);
    cp::ControlConfig cfg;
    cfg.powerup_delay_s = 1.0;
    cfg.ue_reconnect_s = 0.5;
    for (int stream = 0; stream < 500; ++stream) {
        cp::BSState s;
        std::vector<cp::Event> log;
        double t = 0.0;
        const double p_radar = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
        for (int i = 0; i < 200; ++i) {
            t += std::uniform_real_distribution<double>(0.0, 0.3)(rng);
            std::optional<sptw::detector::DetectionVerdict> v;
            if (rng() % 5 != 0) v = verdict(std::bernoulli_distribution(p_radar)(rng));
            const auto before = s.kind;
            auto r = cp::step_state(s, v, t, cfg);
            if (r.state.kind != before && r.events.size() == 1) CHECK_NOTHROW(cp::check_transition(before, r.state.kind));
            s = r.state;
            log.insert(log.end(), r.events.begin(), r.events.end());
        }
        BSStateKind replay = BSStateKind::Transmitting;
        double last_t = 0.0;
        for (const auto& e : log) {
            CHECK(e.t_s >= last_t);
            last_t = e.t_s;
            BSStateKind next = replay;
            if (e.kind == EventKind::BSShutdown) next = BSStateKind::Vacated;
            if (e.kind == EventKind::BSPowerUpStart) next = BSStateKind::PoweringUp;
            if (e.kind == EventKind::BSResumed) next = BSStateKind::Transmitting;
            if (next != replay) CHECK_NOTHROW(cp::check_transition(replay, next));
            if (e.kind == EventKind::UEReconnected) CHECK(replay == BSStateKind::Transmitting);
            replay = next;
        }
        CHECK(replay == s.kind);
    }
}

TEST_CASE("KPI proxy table and invariants")
{
    CHECK(cp::cqi_from_sinr(-30.0) == 1);
    CHECK(cp::cqi_from_sinr(-6.0) == 1);
    CHECK(cp::cqi_from_sinr(20.0) == 15);
    CHECK(cp::cqi_from_sinr(40.0) == 15);
    CHECK(cp::kpi_proxy(25.0, BSStateKind::Vacated).throughput_mbps == 0.0);
    CHECK(cp::kpi_proxy(25.0, BSStateKind::PoweringUp).throughput_mbps == 0.0);
    CHECK(cp::kpi_proxy(25.0, BSStateKind::Transmitting).throughput_mbps > 0.0);
    cp::KpiConfig wide;
    wide.bandwidth_factor_mhz = 10.0;
    CHECK(cp::kpi_proxy(25.0, BSStateKind::Transmitting, wide).throughput_mbps == 10.0);

    int last_cqi = 0;
    double last_tp = -1.0;
    for (double s = -40.0; s <= 40.0; s += 0.25) {
        const auto k = cp::kpi_proxy(s, BSStateKind::Transmitting);
        CHECK(k.cqi >= last_cqi);
        CHECK(k.throughput_mbps >= last_tp);
        CHECK(k.cqi >= 1);
        CHECK(k.cqi <= 15);
        last_cqi = k.cqi;
        last_tp = k.throughput_mbps;
    }
    const auto& t = cp::cqi_thresholds_db();
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
    const auto& e = cp::cqi_efficiency();
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] > e[i - 1]);
}

TEST_CASE("scaled vacate experiment follows the expected timeline")
{
    cp::ExperimentConfig cfg;
    cfg.duration_s = 32.0;
    const auto a = cp::run_experiment(cfg);
    const auto onset = first_time(a.events, EventKind::RadarOnsetTruth);
    const auto down = first_time(a.events, EventKind::BSShutdown);
    const auto end = first_time(a.events, EventKind::RadarEndTruth);
    const auto up = first_time(a.events, EventKind::BSPowerUpStart);
    const auto resumed = first_time(a.events, EventKind::BSResumed);
    const auto reconnect = first_time(a.events, EventKind::UEReconnected);
    REQUIRE((onset && down && end && up && resumed && reconnect));
    CHECK(*onset < *down);
    CHECK(*down < *end);
    CHECK(*end < *up);
    CHECK(*up < *resumed);
    CHECK(*resumed - *up == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(*reconnect - *resumed == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(count(a.events, EventKind::BSShutdown) == 1);
    REQUIRE(a.detection_delay_s.has_value());
    CHECK(*a.detection_delay_s < 60.0);
    MESSAGE("detection delay " << *a.detection_delay_s << " s over " << a.batches << " batches");

    for (std::size_t i = 1; i < a.events.size(); ++i) CHECK(a.events[i].t_s >= a.events[i - 1].t_s);
    std::size_t quiet_rows = 0;
    for (const auto& k : a.kpi) {
        if (k.t_s >= *down && k.t_s < *resumed) {
            CHECK(k.throughput_mbps == 0.0);
            ++quiet_rows;
        } else {
            CHECK(k.throughput_mbps > 0.0);
        }
    }
    CHECK(quiet_rows > 0);
    for (const auto& o : a.occupancy) CHECK(o.band_active == (o.t_s < *down || o.t_s >= *resumed));

    const auto b = cp::run_experiment(cfg);
    REQUIRE(b.events.size() == a.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].t_s == b.events[i].t_s);
        CHECK(a.events[i].kind == b.events[i].kind);
        CHECK(a.events[i].payload == b.events[i].payload);
    }
}

TEST_CASE("without radar the BS keeps transmitting")
{
    cp::ExperimentConfig cfg;
    cfg.schedule.radar_on_s.reset();
    cfg.schedule.radar_off_s.reset();
    cfg.duration_s = 8.0;
    const auto r = cp::run_experiment(cfg);
    CHECK(r.events.empty());
    for (const auto& o : r.occupancy) CHECK(o.band_active);
    for (const auto& k : r.kpi) CHECK(k.throughput_mbps > 0.0);
    CHECK(r.batches == static_cast<std::size_t>(8.0 / cfg.batch_period_s) + 1);
}

TEST_CASE("experiment artifacts and config round trip")
{
    const auto dir = testutil::temp_dir("controlplane");
    std::vector<cp::Event> ev = {{1.0, EventKind::RadarOnsetTruth, nlohmann::json::object()},
                                 {1.5, EventKind::BSShutdown, {{"vote_fraction", 0.6}}}};
    cp::write_event_log(ev, dir / "events.jsonl");
    const auto back = cp::read_event_log(dir / "events.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[1].kind == EventKind::BSShutdown);
    CHECK(back[1].payload.at("vote_fraction") == 0.6);
    testutil::write_text(dir / "bad.jsonl", "{\"t_s\": 1, \"event\": \"Nope\"}\n");
    CHECK(error_code_of([&] { cp::read_event_log(dir / "bad.jsonl"); }) == ErrorCode::MalformedFile);

    cp::write_kpi_csv({{0.0, "ue-02", 12.5, 9, 3.4}}, dir / "kpi.csv");
    const auto bytes = testutil::read_bytes(dir / "kpi.csv");
    const std::string text(bytes.begin(), bytes.end());
    CHECK(text == "t_s,ue_id,sinr_db,cqi,throughput_mbps\n0,ue-02,12.5,9,3.4\n");

    cp::ExperimentConfig cfg;
    cfg.schedule.radar_off_s.reset();
    cfg.control.clear_streak = 3;
    nlohmann::json j = cfg;
    const auto parsed = sptw::config::parse<cp::ExperimentConfig>(j);
    CHECK(nlohmann::json(parsed) == j);
    CHECK_FALSE(parsed.schedule.radar_off_s.has_value());
    CHECK(parsed.control.clear_streak == 3);
    CHECK(error_code_of([] { sptw::config::parse<cp::ExperimentConfig>(nlohmann::json{{"radar_onn_s", 1}}); }) ==
          ErrorCode::InvalidParams);

    cp::ExperimentConfig bad;
    bad.ship_id = "ue-02";
    CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::InvalidParams);
}
