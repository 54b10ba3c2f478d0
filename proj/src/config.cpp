// SPDX-License-Identifier: Apache-2.0

#include "sptw/config.hpp"

#include "sptw/error.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

using nlohmann::json;

namespace sptw::config {

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MalformedFile, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
}

void write_json(const json& j, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what)
{
    if (!j.is_object()) throw Error(ErrorCode::InvalidParams, std::string(what) + " must be a JSON object");
    for (const auto& item : j.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                    [&](const char* k) { return item.key() == k; });
        if (!ok) throw Error(ErrorCode::InvalidParams, std::string("unknown key '") + item.key() + "' in " + what);
    }
}

} // namespace sptw::config

namespace {

template <class T>
void opt(const json& j, const char* key, T& field)
{
    if (j.contains(key)) field = j.at(key).get<T>();
}

} // namespace

namespace sptw::waveforms {

void to_json(json& j, const RadarParams& p)
{
    j = json{{"sample_rate_hz", p.sample_rate_hz}, {"total_samples", p.total_samples}, {"pri_s", p.pri_s},
             {"pulse_width_s", p.pulse_width_s},   {"edge_s", p.edge_s},               {"chirp_bandwidth_hz", p.chirp_bandwidth_hz},
             {"pri_jitter_s", p.pri_jitter_s},     {"i_offset", p.i_offset},           {"q_offset", p.q_offset},
             {"amplitude", p.amplitude},           {"seed", p.seed}};
}

void from_json(const json& j, RadarParams& p)
{
    config::check_keys(j,
                       {"sample_rate_hz", "total_samples", "pri_s", "pulse_width_s", "edge_s", "chirp_bandwidth_hz",
                        "pri_jitter_s", "i_offset", "q_offset", "amplitude", "seed"},
                       "radar parameters");
    opt(j, "sample_rate_hz", p.sample_rate_hz);
    opt(j, "total_samples", p.total_samples);
    opt(j, "pri_s", p.pri_s);
    opt(j, "pulse_width_s", p.pulse_width_s);
    opt(j, "edge_s", p.edge_s);
    opt(j, "chirp_bandwidth_hz", p.chirp_bandwidth_hz);
    opt(j, "pri_jitter_s", p.pri_jitter_s);
    opt(j, "i_offset", p.i_offset);
    opt(j, "q_offset", p.q_offset);
    opt(j, "amplitude", p.amplitude);
    opt(j, "seed", p.seed);
}

void to_json(json& j, const CellularParams& p)
{
    j = json{{"bandwidth_hz", p.bandwidth_hz}, {"num_subcarriers", p.num_subcarriers}, {"cp_len", p.cp_len},
             {"taper_len", p.taper_len},       {"occupied_fraction", p.occupied_fraction}, {"sample_rate_hz", p.sample_rate_hz}};
}

void from_json(const json& j, CellularParams& p)
{
    config::check_keys(j, {"bandwidth_hz", "num_subcarriers", "cp_len", "taper_len", "occupied_fraction", "sample_rate_hz"},
                       "cellular parameters");
    opt(j, "bandwidth_hz", p.bandwidth_hz);
    opt(j, "num_subcarriers", p.num_subcarriers);
    opt(j, "cp_len", p.cp_len);
    opt(j, "taper_len", p.taper_len);
    opt(j, "occupied_fraction", p.occupied_fraction);
    opt(j, "sample_rate_hz", p.sample_rate_hz);
}

} // namespace sptw::waveforms

namespace sptw::scenario {

void to_json(json& j, const Vec3& v) { j = json::array({v.x, v.y, v.z}); }

void from_json(const json& j, Vec3& v)
{
    if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::InvalidParams, "position must be [x, y, z]");
    v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(json& j, const Node& n)
{
    j = json{{"id", n.id}, {"role", to_string(n.role)}, {"position_m", n.position_m}, {"tx_power_dbm", n.tx_power_dbm}};
}

void from_json(const json& j, Node& n)
{
    config::check_keys(j, {"id", "role", "position_m", "tx_power_dbm"}, "node");
    if (!j.contains("id") || !j.contains("role") || !j.contains("position_m"))
        throw Error(ErrorCode::InvalidParams, "node needs id, role and position_m");
    const Vec3 p = j.at("position_m").get<Vec3>();
    n = make_node(j.at("id").get<std::string>(), role_from_string(j.at("role").get<std::string>()), p.x, p.y);
    n.position_m.z = p.z;
    opt(j, "tx_power_dbm", n.tx_power_dbm);
}

void to_json(json& j, const Trajectory& t)
{
    json wps = json::array();
    for (const auto& w : t.waypoints) wps.push_back({{"t_s", w.t_s}, {"position_m", w.position_m}});
    j = json{{"speed_mps", t.speed_mps}, {"waypoints", wps}};
}

void from_json(const json& j, Trajectory& t)
{
    config::check_keys(j, {"speed_mps", "waypoints"}, "trajectory");
    t = Trajectory{};
    opt(j, "speed_mps", t.speed_mps);
    for (const auto& w : j.at("waypoints")) {
        config::check_keys(w, {"t_s", "position_m"}, "waypoint");
        t.waypoints.push_back({w.at("t_s").get<double>(), w.at("position_m").get<Vec3>()});
    }
}

void to_json(json& j, const ScenarioSpec& s)
{
    j = json{{"nodes", s.nodes},
             {"trajectories", s.trajectories},
             {"duration_s", s.duration_s},
             {"sampling_time_s", s.sampling_time_s},
             {"area_m", {s.area_x_m, s.area_y_m}},
             {"carrier_hz", s.carrier_hz},
             {"land_exponent", s.land_exponent},
             {"water_exponent", s.water_exponent}};
}

void from_json(const json& j, ScenarioSpec& s)
{
    config::check_keys(j,
                       {"nodes", "trajectories", "duration_s", "sampling_time_s", "area_m", "carrier_hz",
                        "land_exponent", "water_exponent"},
                       "scenario");
    s = ScenarioSpec{};
    if (j.contains("nodes")) s.nodes = j.at("nodes").get<std::vector<Node>>();
    if (j.contains("trajectories")) s.trajectories = j.at("trajectories").get<std::map<std::string, Trajectory>>();
    opt(j, "duration_s", s.duration_s);
    opt(j, "sampling_time_s", s.sampling_time_s);
    if (j.contains("area_m")) {
        const auto& a = j.at("area_m");
        if (!a.is_array() || a.size() != 2) throw Error(ErrorCode::InvalidParams, "area_m must be [x, y]");
        s.area_x_m = a[0].get<double>();
        s.area_y_m = a[1].get<double>();
    }
    opt(j, "carrier_hz", s.carrier_hz);
    opt(j, "land_exponent", s.land_exponent);
    opt(j, "water_exponent", s.water_exponent);
    // A trajectory pins its node's nominal position to the first waypoint.
    for (auto& n : s.nodes) {
        auto it = s.trajectories.find(n.id);
        if (it != s.trajectories.end() && !it->second.waypoints.empty())
            n.position_m = it->second.waypoints.front().position_m;
    }
}

} // namespace sptw::scenario

namespace sptw::dataset {

void to_json(json& j, const DatasetConfig& c)
{
    j = json{{"snr_grid_db", c.snr_grid_db},
             {"sinr_grid_db", c.sinr_grid_db},
             {"records_per_cell", c.records_per_cell},
             {"seed", c.seed},
             {"feature_domain", to_string(c.feature_domain)},
             {"apply_channel", c.apply_channel},
             {"radar_pool", c.radar_pool},
             {"radar", c.radar},
             {"cellular", c.cellular},
             {"scenario", c.scenario},
             {"split_fractions", c.split_fractions}};
}

void from_json(const json& j, DatasetConfig& c)
{
    config::check_keys(j,
                       {"snr_grid_db", "sinr_grid_db", "records_per_cell", "seed", "feature_domain", "apply_channel",
                        "radar_pool", "radar", "cellular", "scenario", "split_fractions"},
                       "dataset config");
    c = DatasetConfig{};
    opt(j, "snr_grid_db", c.snr_grid_db);
    opt(j, "sinr_grid_db", c.sinr_grid_db);
    opt(j, "records_per_cell", c.records_per_cell);
    opt(j, "seed", c.seed);
    if (j.contains("feature_domain")) c.feature_domain = feature_domain_from_string(j.at("feature_domain").get<std::string>());
    opt(j, "apply_channel", c.apply_channel);
    opt(j, "radar_pool", c.radar_pool);
    opt(j, "radar", c.radar);
    opt(j, "cellular", c.cellular);
    opt(j, "scenario", c.scenario);
    opt(j, "split_fractions", c.split_fractions);
}

} // namespace sptw::dataset
