// SPDX-License-Identifier: Apache-2.0

#include "sptw/scenario.hpp"

#include "sptw/error.hpp"
#include "sptw/parallel.hpp"
#include "sptw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace sptw::scenario {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

bool in_area(const Vec3& p, double ax, double ay)
{
    return p.x >= 0.0 && p.x <= ax && p.y >= 0.0 && p.y <= ay;
}

constexpr double kTimeTol = 1e-9;

} // namespace

double distance(const Vec3& a, const Vec3& b) noexcept
{
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

std::string to_string(Role r)
{
    switch (r) {
    case Role::BS: return "bs";
    case Role::UE: return "ue";
    case Role::Ship: return "ship";
    }
    return "?";
}

Role role_from_string(const std::string& s)
{
    if (s == "bs") return Role::BS;
    if (s == "ue") return Role::UE;
    if (s == "ship") return Role::Ship;
    throw Error(ErrorCode::InvalidParams, "unknown node role '" + s + "'");
}

Node make_node(std::string id, Role role, double x, double y)
{
    Node n;
    n.id = std::move(id);
    n.role = role;
    const bool tall = role != Role::UE;
    n.position_m = {x, y, tall ? 3.0 : 1.0};
    n.tx_power_dbm = tall ? 30.0 : 20.0;
    return n;
}

void Trajectory::validate() const
{
    require(!waypoints.empty(), "trajectory has no waypoints");
    require(std::isfinite(speed_mps) && speed_mps > 0.0, "trajectory speed must be positive");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const auto& p = waypoints[i - 1];
        const auto& q = waypoints[i];
        require(q.t_s > p.t_s, "trajectory timestamps must be strictly increasing");
        const double v = distance(p.position_m, q.position_m) / (q.t_s - p.t_s);
        require(std::abs(v - speed_mps) <= 1e-6, "trajectory segment speed differs from speed_mps");
    }
}

Vec3 Trajectory::at(double t_s) const
{
    if (waypoints.empty()) throw Error(ErrorCode::InvalidParams, "trajectory has no waypoints");
    if (t_s <= waypoints.front().t_s) return waypoints.front().position_m;
    if (t_s >= waypoints.back().t_s) return waypoints.back().position_m;
    auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t_s,
                               [](double t, const Waypoint& w) { return t < w.t_s; });
    const auto& q = *it;
    const auto& p = *(it - 1);
    const double u = (t_s - p.t_s) / (q.t_s - p.t_s);
    return {p.position_m.x + u * (q.position_m.x - p.position_m.x),
            p.position_m.y + u * (q.position_m.y - p.position_m.y),
            p.position_m.z + u * (q.position_m.z - p.position_m.z)};
}

Trajectory straight_trajectory(const Vec3& start, const Vec3& end, double speed_mps)
{
    require(std::isfinite(speed_mps) && speed_mps > 0.0, "trajectory speed must be positive");
    const double d = distance(start, end);
    require(d > 0.0, "trajectory endpoints coincide");
    Trajectory t;
    t.speed_mps = speed_mps;
    t.waypoints = {{0.0, start}, {d / speed_mps, end}};
    return t;
}

void ScenarioSpec::validate() const
{
    require(!nodes.empty(), "scenario has no nodes");
    require(area_x_m > 0.0 && area_y_m > 0.0, "area must be positive");
    require(duration_s > 0.0 && sampling_time_s > 0.0, "duration and sampling time must be positive");
    const double steps = duration_s / sampling_time_s;
    require(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps),
            "duration_s / sampling_time_s must be an integer");
    require(carrier_hz > 0.0, "carrier must be positive");
    require(land_exponent > 0.0 && water_exponent > 0.0, "path-loss exponents must be positive");
    std::set<std::string> ids;
    for (const auto& n : nodes) {
        require(!n.id.empty(), "node id is empty");
        require(ids.insert(n.id).second, "duplicate node id '" + n.id + "'");
        require(n.position_m.z > 0.0, "node '" + n.id + "' height must be positive");
        require(in_area(n.position_m, area_x_m, area_y_m), "node '" + n.id + "' lies outside the area");
        require(std::isfinite(n.tx_power_dbm), "node '" + n.id + "' tx power must be finite");
    }
    for (const auto& [id, traj] : trajectories) {
        require(ids.count(id) == 1, "trajectory for unknown node '" + id + "'");
        traj.validate();
        for (const auto& w : traj.waypoints) {
            require(w.position_m.z > 0.0, "trajectory of '" + id + "' has non-positive height");
            require(in_area(w.position_m, area_x_m, area_y_m), "trajectory of '" + id + "' leaves the area");
        }
    }
}

int ScenarioSpec::num_timesteps() const
{
    return static_cast<int>(std::llround(duration_s / sampling_time_s));
}

std::size_t ScenarioSpec::index_of(const std::string& id) const
{
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return i;
    throw Error(ErrorCode::InvalidParams, "unknown node '" + id + "'");
}

ScenarioSpec default_scenario()
{
    ScenarioSpec s;
    s.nodes.push_back(make_node("bs", Role::BS, 420.0, 450.0));
    s.nodes.push_back(make_node("ue-02", Role::UE, 480.0, 560.0));
    s.nodes.push_back(make_node("ue-03", Role::UE, 450.0, 330.0));
    s.nodes.push_back(make_node("ue-04", Role::UE, 360.0, 470.0));
    s.nodes.push_back(make_node("ue-05", Role::UE, 540.0, 300.0));
    s.nodes.push_back(make_node("ue-06", Role::UE, 600.0, 470.0));
    s.nodes.push_back(make_node("ue-07", Role::UE, 640.0, 690.0));
    const Vec3 start{120.0, 650.0, 3.0};
    const Vec3 end{120.0, 250.0, 3.0};
    s.nodes.push_back(make_node("ship", Role::Ship, start.x, start.y));
    s.trajectories["ship"] = straight_trajectory(start, end, 10.0);
    return s;
}

std::map<std::string, Vec3> sample_positions(const ScenarioSpec& spec, double t_s)
{
    if (!(t_s >= -kTimeTol && t_s <= spec.duration_s + kTimeTol))
        throw Error(ErrorCode::OutOfRange, "time outside [0, duration_s]");
    std::map<std::string, Vec3> out;
    for (const auto& n : spec.nodes) {
        auto it = spec.trajectories.find(n.id);
        out[n.id] = it == spec.trajectories.end() ? n.position_m : it->second.at(t_s);
    }
    return out;
}

double path_loss_db(const Vec3& a, const Vec3& b, double carrier_hz, double exponent)
{
    require(carrier_hz > 0.0 && std::isfinite(carrier_hz), "carrier must be positive");
    require(exponent > 0.0 && std::isfinite(exponent), "path-loss exponent must be positive");
    const double d = distance(a, b);
    if (!(d > 0.0)) throw Error(ErrorCode::CoincidentNodes, "path loss between coincident positions");
    constexpr double d0 = 1.0;
    return 20.0 * std::log10(4.0 * std::numbers::pi * d0 * carrier_hz / kSpeedOfLight) +
           10.0 * exponent * std::log10(d / d0);
}

double link_exponent(const ScenarioSpec& spec, const Node& a, const Node& b)
{
    return (a.role == Role::Ship || b.role == Role::Ship) ? spec.water_exponent : spec.land_exponent;
}

std::vector<std::vector<double>> path_loss_matrix(const ScenarioSpec& spec, double t_s)
{
    const auto pos = sample_positions(spec, t_s);
    const std::size_t n = spec.nodes.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& a = spec.nodes[i];
            const auto& b = spec.nodes[j];
            m[i][j] = m[j][i] = path_loss_db(pos.at(a.id), pos.at(b.id), spec.carrier_hz, link_exponent(spec, a, b));
        }
    return m;
}

double TapSet::total_power() const noexcept
{
    double p = 0.0;
    for (const auto& t : taps) p += std::norm(t.gain);
    return p;
}

double TapSet::delay_spread() const noexcept
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& t : taps) {
        if (t.gain == std::complex<double>{}) continue;
        lo = std::min(lo, t.delay_s);
        hi = std::max(hi, t.delay_s);
    }
    return hi >= lo ? hi - lo : 0.0;
}

void TapSet::validate(std::size_t max_taps, double max_spread_s) const
{
    std::size_t nonzero = 0;
    for (const auto& t : taps) {
        require(std::isfinite(t.delay_s) && t.delay_s >= 0.0, "tap delay must be finite and non-negative");
        require(std::isfinite(t.gain.real()) && std::isfinite(t.gain.imag()), "tap gain must be finite");
        if (t.gain != std::complex<double>{}) ++nonzero;
    }
    require(nonzero <= max_taps, "too many nonzero taps");
    require(delay_spread() <= max_spread_s, "delay spread exceeds limit");
    require(total_power() > 0.0, "tap set has zero power");
}

TapSet normalized(const TapSet& ts)
{
    const double p = ts.total_power();
    require(p > 0.0, "cannot normalize a zero-power tap set");
    TapSet out = ts;
    const double s = 1.0 / std::sqrt(p);
    for (auto& t : out.taps) t.gain *= s;
    return out;
}

std::vector<Tap> synth_tap_profile(const Node& a, const Node& b, double carrier_hz, int num_paths, std::uint64_t seed,
                                   double exponent, const MultipathParams& mp)
{
    require(num_paths >= 1, "num_paths must be at least 1");
    require(mp.max_excess_delay_s >= 0.0 && mp.decay_s > 0.0, "invalid multipath delay parameters");
    require(mp.reflection_power >= 0.0 && mp.reflection_power < 1.0, "reflection_power must be in [0, 1)");
    const double pl = path_loss_db(a.position_m, b.position_m, carrier_hz, exponent);
    const double d = distance(a.position_m, b.position_m);
    const double los_mag = std::pow(10.0, -pl / 20.0);
    const double los_delay = d / kSpeedOfLight;
    const double los_phase = -2.0 * std::numbers::pi * std::fmod(carrier_hz * los_delay, 1.0);

    std::vector<Tap> out;
    out.reserve(static_cast<std::size_t>(num_paths));
    out.push_back({los_delay, std::polar(los_mag, los_phase)});

    Rng rng(seed);
    std::uniform_real_distribution<double> excess(0.0, mp.max_excess_delay_s);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<Tap> refl;
    for (int i = 1; i < num_paths; ++i) {
        const double tau = excess(rng);
        const double rel = mp.reflection_power * std::exp(-tau / mp.decay_s);
        refl.push_back({los_delay + tau, std::polar(los_mag * std::sqrt(rel), phase(rng))});
    }
    std::stable_sort(refl.begin(), refl.end(), [](const Tap& x, const Tap& y) { return x.delay_s < y.delay_s; });
    out.insert(out.end(), refl.begin(), refl.end());
    return out;
}

namespace {

double weighted_objective(const std::vector<double>& x, const std::vector<double>& w, const std::vector<int>& assign,
                          const std::vector<double>& c)
{
    double obj = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - c[static_cast<std::size_t>(assign[i])];
        obj += w[i] * d * d;
    }
    return obj;
}

int nearest(double v, const std::vector<double>& c)
{
    int best = 0;
    double bd = std::abs(v - c[0]);
    for (std::size_t j = 1; j < c.size(); ++j) {
        const double d = std::abs(v - c[j]);
        if (d < bd) {
            bd = d;
            best = static_cast<int>(j);
        }
    }
    return best;
}

// Draws an index with probability proportional to p; p sums to `total` > 0.
std::size_t draw_index(const std::vector<double>& p, double total, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, total);
    const double r = u(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        last_positive = i;
        acc += p[i];
        if (r < acc) return i;
    }
    return last_positive;
}

KMeansResult lloyd_run(const std::vector<double>& x, const std::vector<double>& w, int k, int max_iter, Rng& rng)
{
    const std::size_t n = x.size();
    std::vector<double> centers;
    double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    centers.push_back(x[draw_index(w, wsum, rng)]);
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] - centers[static_cast<std::size_t>(nearest(x[i], centers))];
            d2[i] = w[i] * d * d;
            total += d2[i];
        }
        if (!(total > 0.0)) break;
        centers.push_back(x[draw_index(d2, total, rng)]);
    }

    KMeansResult r;
    r.centroids = centers;
    r.assignment.assign(n, -1);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int a = nearest(x[i], r.centroids);
            if (a != r.assignment[i]) {
                r.assignment[i] = a;
                changed = true;
            }
        }
        if (!changed && it > 0) break;
        std::vector<double> sw(r.centroids.size(), 0.0), sx(r.centroids.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            sw[static_cast<std::size_t>(r.assignment[i])] += w[i];
            sx[static_cast<std::size_t>(r.assignment[i])] += w[i] * x[i];
        }
        for (std::size_t j = 0; j < r.centroids.size(); ++j)
            if (sw[j] > 0.0) r.centroids[j] = sx[j] / sw[j];
        r.history.push_back(weighted_objective(x, w, r.assignment, r.centroids));
    }
    r.objective = weighted_objective(x, w, r.assignment, r.centroids);
    return r;
}

} // namespace

KMeansResult kmeans_1d(const std::vector<double>& values, const std::vector<double>& weights, int k,
                       std::uint64_t seed, int max_iter, int restarts)
{
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "k-means over no values");
    require(values.size() == weights.size(), "values and weights differ in length");
    require(k >= 1 && max_iter >= 1 && restarts >= 1, "k, max_iter and restarts must be positive");
    double wsum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(std::isfinite(values[i]), "k-means value must be finite");
        require(std::isfinite(weights[i]) && weights[i] >= 0.0, "k-means weight must be finite and non-negative");
        wsum += weights[i];
    }
    require(wsum > 0.0, "k-means weights sum to zero");

    Rng rng(seed);
    KMeansResult best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        KMeansResult run = lloyd_run(values, weights, k, max_iter, rng);
        if (!have || run.objective < best.objective) {
            best = std::move(run);
            have = true;
        }
    }

    // Relabel by ascending centroid, dropping clusters that received no members.
    std::vector<int> used(best.centroids.size(), 0);
    for (int a : best.assignment) used[static_cast<std::size_t>(a)] = 1;
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < best.centroids.size(); ++j)
        if (used[j]) order.push_back(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return best.centroids[a] < best.centroids[b]; });
    std::vector<int> relabel(best.centroids.size(), -1);
    std::vector<double> centroids;
    for (std::size_t j = 0; j < order.size(); ++j) {
        relabel[order[j]] = static_cast<int>(j);
        centroids.push_back(best.centroids[order[j]]);
    }
    for (int& a : best.assignment) a = relabel[static_cast<std::size_t>(a)];
    best.centroids = std::move(centroids);
    return best;
}

namespace {

// Collapses member taps into one: power-weighted delay, quadrature magnitude, strongest phase.
Tap collapse(const std::vector<Tap>& members)
{
    if (members.size() == 1) return members.front();
    double p = 0.0, pd = 0.0;
    const Tap* strongest = &members.front();
    for (const auto& t : members) {
        const double pw = std::norm(t.gain);
        p += pw;
        pd += pw * t.delay_s;
        if (pw > std::norm(strongest->gain)) strongest = &t;
    }
    return {pd / p, std::polar(std::sqrt(p), std::arg(strongest->gain))};
}

} // namespace

TapSet approx_taps(const std::vector<Tap>& raw, int k, double max_spread_s, std::uint64_t seed)
{
    require(k >= 1, "k must be at least 1");
    require(max_spread_s >= 0.0, "max spread must be non-negative");
    std::vector<Tap> taps;
    for (const auto& t : raw) {
        require(std::isfinite(t.delay_s) && t.delay_s >= 0.0, "tap delay must be finite and non-negative");
        require(std::isfinite(t.gain.real()) && std::isfinite(t.gain.imag()), "tap gain must be finite");
        if (t.gain != std::complex<double>{}) taps.push_back(t);
    }
    if (taps.empty()) throw Error(ErrorCode::EmptyInput, "raw profile has no nonzero taps");

    TapSet probe;
    probe.taps = taps;
    if (taps.size() <= static_cast<std::size_t>(k) && probe.delay_spread() <= max_spread_s) return probe;

    // Cluster in microseconds to keep squared distances well scaled.
    std::vector<double> x(taps.size()), w(taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i) {
        x[i] = taps[i].delay_s * 1e6;
        w[i] = std::norm(taps[i].gain);
    }
    const KMeansResult km = kmeans_1d(x, w, k, seed);
    std::vector<std::vector<Tap>> groups(km.centroids.size());
    for (std::size_t i = 0; i < taps.size(); ++i) groups[static_cast<std::size_t>(km.assignment[i])].push_back(taps[i]);

    auto collapsed = [&] {
        std::vector<Tap> c;
        for (const auto& g : groups) c.push_back(collapse(g));
        return c;
    };
    std::vector<Tap> cl = collapsed();
    while (cl.size() > 1 && cl.back().delay_s - cl.front().delay_s > max_spread_s) {
        const std::size_t m = cl.size();
        const double gap_front = cl[1].delay_s - cl[0].delay_s;
        const double gap_back = cl[m - 1].delay_s - cl[m - 2].delay_s;
        if (gap_front <= gap_back) {
            groups[1].insert(groups[1].begin(), groups[0].begin(), groups[0].end());
            groups.erase(groups.begin());
        } else {
            groups[m - 2].insert(groups[m - 2].end(), groups[m - 1].begin(), groups[m - 1].end());
            groups.pop_back();
        }
        cl = collapsed();
    }
    TapSet out;
    out.taps = std::move(cl);
    return out;
}

const LinkTimeline& ScenarioTaps::link(const std::string& a, const std::string& b) const
{
    for (const auto& l : links)
        if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l;
    throw Error(ErrorCode::InvalidParams, "no link between '" + a + "' and '" + b + "'");
}

const TapSet& ScenarioTaps::at(const std::string& a, const std::string& b, int step) const
{
    const auto& l = link(a, b);
    if (step < 0 || static_cast<std::size_t>(step) >= l.steps.size())
        throw Error(ErrorCode::OutOfRange, "timestep out of range");
    return l.steps[static_cast<std::size_t>(step)];
}

std::size_t ScenarioTaps::entry_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& l : links) n += l.steps.size();
    return n;
}

ScenarioTaps build_scenario_taps(const ScenarioSpec& spec, std::uint64_t seed, const TapBuildOptions& opt)
{
    spec.validate();
    const int steps = spec.num_timesteps();
    ScenarioTaps out;
    out.sampling_time_s = spec.sampling_time_s;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < spec.nodes.size(); ++i)
        for (std::size_t j = i + 1; j < spec.nodes.size(); ++j) {
            pairs.emplace_back(i, j);
            LinkTimeline l;
            l.a = spec.nodes[i].id;
            l.b = spec.nodes[j].id;
            l.steps.resize(static_cast<std::size_t>(steps));
            out.links.push_back(std::move(l));
        }

    const std::size_t total = pairs.size() * static_cast<std::size_t>(steps);
    parallel_for(total, [&](std::size_t unit) {
        const std::size_t li = unit / static_cast<std::size_t>(steps);
        const int s = static_cast<int>(unit % static_cast<std::size_t>(steps));
        const auto [i, j] = pairs[li];
        const double t = s * spec.sampling_time_s;
        const auto pos = sample_positions(spec, t);
        Node a = spec.nodes[i];
        Node b = spec.nodes[j];
        a.position_m = pos.at(a.id);
        b.position_m = pos.at(b.id);
        const std::uint64_t link_seed = derive_seed(seed, {i, j});
        const auto raw = synth_tap_profile(a, b, spec.carrier_hz, opt.num_paths, link_seed,
                                           link_exponent(spec, a, b), opt.multipath);
        TapSet ts = approx_taps(raw);
        ts.link = {a.id, b.id};
        ts.t_s = t;
        out.links[li].steps[static_cast<std::size_t>(s)] = std::move(ts);
    });
    return out;
}

void write_taps_csv(const std::vector<Tap>& taps, const std::filesystem::path& path)
{
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    f << "delay_s,gain_re,gain_im\n" << std::setprecision(17);
    for (const auto& t : taps) f << t.delay_s << ',' << t.gain.real() << ',' << t.gain.imag() << '\n';
    if (!f) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<Tap> read_taps_csv(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::MalformedFile, "cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw Error(ErrorCode::MalformedFile, "tap CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "delay_s,gain_re,gain_im") throw Error(ErrorCode::MalformedFile, "unexpected tap CSV header");
    std::vector<Tap> taps;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string c0, c1, c2, extra;
        if (!std::getline(row, c0, ',') || !std::getline(row, c1, ',') || !std::getline(row, c2, ',') ||
            std::getline(row, extra, ','))
            throw Error(ErrorCode::MalformedFile, "tap CSV line " + std::to_string(lineno) + " needs 3 columns");
        try {
            std::size_t p0 = 0, p1 = 0, p2 = 0;
            const double d = std::stod(c0, &p0), re = std::stod(c1, &p1), im = std::stod(c2, &p2);
            if (p0 != c0.size() || p1 != c1.size() || p2 != c2.size()) throw std::invalid_argument("trailing");
            if (!std::isfinite(d) || !std::isfinite(re) || !std::isfinite(im) || d < 0.0)
                throw std::invalid_argument("range");
            taps.push_back({d, {re, im}});
        } catch (const std::exception&) {
            throw Error(ErrorCode::MalformedFile, "tap CSV line " + std::to_string(lineno) + " is not numeric");
        }
    }
    return taps;
}

void write_heatmap_csv(const ScenarioSpec& spec, const std::vector<std::vector<double>>& matrix,
                       const std::filesystem::path& path)
{
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    f << "node";
    for (const auto& n : spec.nodes) f << ',' << n.id;
    f << '\n' << std::fixed << std::setprecision(3);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        f << spec.nodes.at(i).id;
        for (double v : matrix[i]) f << ',' << v;
        f << '\n';
    }
    if (!f) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

} // namespace sptw::scenario
