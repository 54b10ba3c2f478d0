// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace sptw::scenario {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr std::size_t kMaxTaps = 4;
inline constexpr double kMaxDelaySpreadS = 5.12e-6;

enum class Role { BS, UE, Ship };

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

double distance(const Vec3& a, const Vec3& b) noexcept;

struct Node {
    std::string id;
    Role role = Role::UE;
    Vec3 position_m;
    double tx_power_dbm = 20.0;
};

/// Node with the role defaults applied: antenna height 3 m (BS, ship) or 1 m (UE),
/// transmit power 30 dBm (BS, ship) or 20 dBm (UE).
Node make_node(std::string id, Role role, double x, double y);

struct Waypoint {
    double t_s = 0.0;
    Vec3 position_m;
};

struct Trajectory {
    std::vector<Waypoint> waypoints;
    double speed_mps = 10.0;

    void validate() const;
    /// Linear interpolation, clamped to the first/last waypoint.
    Vec3 at(double t_s) const;
};

/// Two-waypoint trajectory from `start` to `end`, timed for `speed_mps`, starting at t = 0.
Trajectory straight_trajectory(const Vec3& start, const Vec3& end, double speed_mps);

struct ScenarioSpec {
    std::vector<Node> nodes;
    std::map<std::string, Trajectory> trajectories;
    double duration_s = 40.0;
    double sampling_time_s = 1.0;
    double area_x_m = 700.0;
    double area_y_m = 800.0;
    double carrier_hz = 3.6e9;
    double land_exponent = 2.7;
    double water_exponent = 2.0;

    void validate() const;
    int num_timesteps() const;
    std::size_t index_of(const std::string& id) const;
    const Node& node(const std::string& id) const { return nodes.at(index_of(id)); }
};

/// Coastal layout: one BS, six UEs around it, a ship sailing 400 m north to south over 40 s.
ScenarioSpec default_scenario();

std::map<std::string, Vec3> sample_positions(const ScenarioSpec& spec, double t_s);

/// Log-distance model: FSPL at 1 m plus 10 n log10(d).
double path_loss_db(const Vec3& a, const Vec3& b, double carrier_hz, double exponent = 2.0);

/// Links touching the ship propagate over water; the rest over land.
double link_exponent(const ScenarioSpec& spec, const Node& a, const Node& b);

/// Pairwise path loss at time t (diagonal 0), nodes in scenario order.
std::vector<std::vector<double>> path_loss_matrix(const ScenarioSpec& spec, double t_s);

struct Tap {
    double delay_s = 0.0;
    std::complex<double> gain;
};

struct TapSet {
    std::vector<Tap> taps;
    std::pair<std::string, std::string> link;
    double t_s = 0.0;

    double total_power() const noexcept;
    double delay_spread() const noexcept;
    /// Throws InvalidParams unless: <= max_taps nonzero taps, spread <= max_spread, power > 0.
    void validate(std::size_t max_taps = kMaxTaps, double max_spread_s = kMaxDelaySpreadS) const;
};

/// Same taps rescaled to unit total power.
TapSet normalized(const TapSet& ts);

struct MultipathParams {
    double max_excess_delay_s = 8e-6;
    double decay_s = 2e-6;             ///< reflection power falls as exp(-excess / decay_s)
    double reflection_power = 0.5;     ///< relative to LoS at zero excess delay, < 1
};

/// LoS tap plus num_paths-1 exponentially decaying reflections. LoS tap first.
std::vector<Tap> synth_tap_profile(const Node& a, const Node& b, double carrier_hz, int num_paths, std::uint64_t seed,
                                   double exponent = 2.0, const MultipathParams& mp = {});

struct KMeansResult {
    std::vector<int> assignment;
    std::vector<double> centroids;
    double objective = 0.0;
    /// Objective after every Lloyd iteration of the winning restart.
    std::vector<double> history;
};

/// Power-weighted 1-D k-means with k-means++ seeding; best of `restarts` runs.
KMeansResult kmeans_1d(const std::vector<double>& values, const std::vector<double>& weights, int k,
                       std::uint64_t seed, int max_iter = 100, int restarts = 8);

inline constexpr std::uint64_t kApproxSeed = 0x4b4d45414e53ULL;

/// Clusters raw taps on delay and collapses each cluster to one tap (power-weighted delay,
/// quadrature-summed magnitude, phase of the strongest member). Extreme clusters are then merged
/// into their nearest neighbour until the delay spread fits. Total power is conserved.
TapSet approx_taps(const std::vector<Tap>& raw, int k = static_cast<int>(kMaxTaps),
                   double max_spread_s = kMaxDelaySpreadS, std::uint64_t seed = kApproxSeed);

struct LinkTimeline {
    std::string a, b;
    std::vector<TapSet> steps;
};

struct ScenarioTaps {
    std::vector<LinkTimeline> links;
    double sampling_time_s = 1.0;

    const LinkTimeline& link(const std::string& a, const std::string& b) const;
    const TapSet& at(const std::string& a, const std::string& b, int step) const;
    std::size_t entry_count() const noexcept;
};

struct TapBuildOptions {
    int num_paths = 12;
    MultipathParams multipath;
};

/// Constrained TapSets for every unordered node pair and every timestep.
ScenarioTaps build_scenario_taps(const ScenarioSpec& spec, std::uint64_t seed, const TapBuildOptions& opt = {});

// CSV: header `delay_s,gain_re,gain_im`, one tap per row.
void write_taps_csv(const std::vector<Tap>& taps, const std::filesystem::path& path);
std::vector<Tap> read_taps_csv(const std::filesystem::path& path);
void write_heatmap_csv(const ScenarioSpec& spec, const std::vector<std::vector<double>>& matrix,
                       const std::filesystem::path& path);

std::string to_string(Role r);
Role role_from_string(const std::string& s);

} // namespace sptw::scenario
