// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sptw/dataset.hpp"
#include "sptw/detector.hpp"
#include "sptw/scenario.hpp"
#include "sptw/waveforms.hpp"

#include "json.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sptw::controlplane {

// ---- base station state machine ----

enum class BSStateKind { Transmitting, Vacated, PoweringUp };

struct BSState {
    BSStateKind kind = BSStateKind::Transmitting;
    double since_s = 0.0;
    std::size_t clear_count = 0; ///< consecutive non-radar verdicts while Vacated
    /// Pending UE reconnection time after a resume; cleared by a shutdown.
    std::optional<double> reconnect_at_s;
};

enum class EventKind {
    RadarOnsetTruth,
    RadarEndTruth,
    VerdictChange,
    BSShutdown,
    BSPowerUpStart,
    BSResumed,
    UEReconnected,
};

struct Event {
    double t_s = 0.0;
    EventKind kind = EventKind::VerdictChange;
    nlohmann::json payload = nlohmann::json::object();
};

struct ControlConfig {
    std::size_t clear_streak = 5;
    double powerup_delay_s = 10.0;
    double ue_reconnect_s = 10.0;

    void validate() const;
};

/// Throws IllegalTransition unless from -> to is one of
/// Transmitting->Vacated, Vacated->PoweringUp, PoweringUp->Transmitting.
void check_transition(BSStateKind from, BSStateKind to);

struct StepResult {
    BSState state;
    std::vector<Event> events;
};

/// Fires timers due at or before t_s (power-up completion, UE reconnection) at their exact
/// times, then applies the verdict. A missing verdict counts as clear. Radar verdicts while
/// PoweringUp leave the state unchanged.
StepResult step_state(const BSState& s, const std::optional<detector::DetectionVerdict>& verdict, double t_s,
                      const ControlConfig& cfg);

/// Timers only; used to flush pending transitions at the end of a run.
StepResult advance_timers(const BSState& s, double t_s, const ControlConfig& cfg);

// ---- KPI proxy ----

inline constexpr int kCqiLevels = 15;

struct KpiConfig {
    double offered_mbps = 10.0;
    /// Per-UE spectrum share in MHz: 10 MHz channel, 75% usable, round-robin over 6 UEs.
    double bandwidth_factor_mhz = 1.25;
};

struct KpiSample {
    double t_s = 0.0;
    std::string ue_id;
    double sinr_db = 0.0;
    int cqi = 1;
    double throughput_mbps = 0.0;
};

/// SINR threshold for each CQI level, evenly spaced from -6 dB (CQI 1) to 20 dB (CQI 15).
const std::array<double, kCqiLevels>& cqi_thresholds_db();
/// Spectral efficiency in bit/s/Hz for each CQI level.
const std::array<double, kCqiLevels>& cqi_efficiency();
int cqi_from_sinr(double sinr_db);

KpiSample kpi_proxy(double sinr_db, BSStateKind state, const KpiConfig& cfg = {});

// ---- end-to-end experiment ----

struct RadarSchedule {
    std::optional<double> radar_on_s = 5.0;
    std::optional<double> radar_off_s = 9.0;

    bool active(double t_s) const noexcept;
};

enum class DetectorKind { Baseline, Cnn };

struct ExperimentConfig {
    scenario::ScenarioSpec scenario = scenario::default_scenario();
    RadarSchedule schedule;
    std::optional<double> duration_s; ///< defaults to the scenario duration
    std::string bs_id = "bs";
    std::string ship_id = "ship";
    std::uint64_t seed = 1;

    DetectorKind detector = DetectorKind::Baseline;
    detector::BaselineConfig baseline;
    std::filesystem::path weights; ///< required for DetectorKind::Cnn
    dataset::FeatureDomain feature_domain = dataset::FeatureDomain::Frequency;

    std::size_t batch_size = 10;
    std::size_t ring_size = 100;
    double batch_period_s = 0.0274; ///< model time between detector batches

    waveforms::RadarParams radar;
    waveforms::CellularParams cellular;
    double noise_figure_db = 7.0;
    double kpi_step_s = 1.0;

    ControlConfig control;
    KpiConfig kpi;

    void validate() const;
    double effective_duration_s() const;
};

struct OccupancySample {
    double t_s = 0.0;
    bool band_active = true;
};

struct ExperimentResult {
    std::vector<Event> events;
    std::vector<KpiSample> kpi;
    std::vector<OccupancySample> occupancy;
    std::size_t batches = 0;
    std::size_t windows = 0;
    /// BSShutdown - RadarOnsetTruth when both happened.
    std::optional<double> detection_delay_s;
};

/// Runs the detection and control loop over model time. Each batch looks at the newest
/// batch_size windows of the BS receive stream ending at the batch time. The stream is the
/// radar (when scheduled) through the ship-BS channel, UE uplink interference while the BS
/// transmits, and thermal noise, scaled by the scenario link budget with noise at unit power.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Same, with an externally constructed window detector.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const detector::WindowDetector& det);

/// Thermal noise floor in dBm over the given bandwidth.
double noise_floor_dbm(double bandwidth_hz, double noise_figure_db);

std::string to_string(EventKind k);
std::string to_string(BSStateKind k);
EventKind event_kind_from_string(const std::string& s);

void write_event_log(const std::vector<Event>& events, const std::filesystem::path& path);
std::vector<Event> read_event_log(const std::filesystem::path& path);
void write_kpi_csv(const std::vector<KpiSample>& kpi, const std::filesystem::path& path);
void write_occupancy_csv(const std::vector<OccupancySample>& occ, const std::filesystem::path& path);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

} // namespace sptw::controlplane
