// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include "sptw/channel.hpp"
#include "sptw/controlplane.hpp"
#include "sptw/detector.hpp"
#include "sptw/rng.hpp"
#include "sptw/scenario.hpp"
#include "sptw/waveforms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace sptw;
using cd = std::complex<double>;
using cf32 = std::complex<float>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream time;
    time << std::fixed << std::setprecision(2) << dt << " s";
    if (limit_s > 0.0) {
        time << " (limit " << limit_s << " s)";
        if (dt >= limit_s) o.pass = false;
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << " | " << time.str() << std::endl;
    if (!o.pass) ++failures;
}

std::string fmt(double v, int prec = 4)
{
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    return s.str();
}

// ---- 1. radar waveform fidelity ----

Outcome radar_fidelity()
{
    const auto buf = waveforms::gen_radar({});
    std::size_t outside = 0;
    for (const auto& s : buf.samples)
        if (!(s.real() >= 0.0f && s.imag() >= 0.0f)) ++outside;
    const bool ok = buf.size() == 106657 && buf.sample_rate_hz == 6e6 && outside == 0 &&
                    std::abs(buf.duration_s() - 17.776e-3) < 1e-6;
    return {ok, "samples=" + std::to_string(buf.size()) + " fs=" + fmt(buf.sample_rate_hz) + " duration_ms=" +
                    fmt(buf.duration_s() * 1e3, 6) + " outside_first_quadrant=" + std::to_string(outside)};
}

// ---- 2. tap approximation ----

Outcome tap_approximation()
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(0.0, 700.0), uy(0.0, 800.0);
    const auto spec = scenario::default_scenario();
    std::size_t bad = 0, max_taps = 0;
    double worst_power = 0.0, worst_spread = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto a = scenario::make_node("a", scenario::Role::BS, ux(rng), uy(rng));
        auto b = scenario::make_node("b", scenario::Role::UE, ux(rng), uy(rng));
        if (scenario::distance(a.position_m, b.position_m) < 1.0) b.position_m.x += 5.0;
        const double n = (i % 2) ? spec.land_exponent : spec.water_exponent;
        const auto raw = scenario::synth_tap_profile(a, b, spec.carrier_hz, 12, rng(), n);
        double p_in = 0.0;
        for (const auto& t : raw) p_in += std::norm(t.gain);
        const auto ts = scenario::approx_taps(raw);
        std::size_t nonzero = 0;
        for (const auto& t : ts.taps) nonzero += std::abs(t.gain) > 0.0;
        const double rel = std::abs(ts.total_power() - p_in) / p_in;
        max_taps = std::max(max_taps, nonzero);
        worst_power = std::max(worst_power, rel);
        worst_spread = std::max(worst_spread, ts.delay_spread());
        if (raw.size() != 12 || nonzero > 4 || ts.delay_spread() > scenario::kMaxDelaySpreadS || rel > 1e-9) ++bad;
    }
    return {bad == 0, "profiles=1000 violations=" + std::to_string(bad) + " max_taps=" + std::to_string(max_taps) +
                          " max_spread_us=" + fmt(worst_spread * 1e6) + " max_rel_power_err=" + fmt(worst_power, 3)};
}

// ---- 3. FIR correctness ----

Outcome fir_correctness()
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    const double fs = 6e6;
    const int max_delay = static_cast<int>(scenario::kMaxDelaySpreadS * fs);
    double worst = 0.0, worst_lin = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 512 + rng() % 4096;
        iqcore::IQBuffer x;
        x.sample_rate_hz = fs;
        x.samples.resize(n);
        for (auto& s : x.samples) s = cf32(static_cast<float>(g(rng)), static_cast<float>(g(rng)));
        scenario::TapSet ts;
        const int k = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < k; ++i)
            ts.taps.push_back({static_cast<double>(rng() % static_cast<unsigned>(max_delay + 1)) / fs, {g(rng), g(rng)}});
        const auto y = channel::fir_apply(x, ts);
        for (std::size_t i = 0; i < n; ++i) {
            cd acc{};
            for (const auto& t : ts.taps) {
                const long d = std::lround(t.delay_s * fs);
                if (static_cast<long>(i) >= d) acc += t.gain * cd(x.samples[i - static_cast<std::size_t>(d)]);
            }
            worst = std::max(worst, std::abs(acc - cd(y.samples[i])));
        }
        // linearity of the double kernel
        const auto taps = channel::quantize_taps(ts, fs);
        std::vector<cd> u(n), v(n), mix(n);
        const cd a(g(rng), g(rng)), b(g(rng), g(rng));
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = {g(rng), g(rng)};
            v[i] = {g(rng), g(rng)};
            mix[i] = a * u[i] + b * v[i];
        }
        const auto fu = channel::fir_apply(u, taps), fv = channel::fir_apply(v, taps), fm = channel::fir_apply(mix, taps);
        for (std::size_t i = 0; i < n; ++i) worst_lin = std::max(worst_lin, std::abs(fm[i] - (a * fu[i] + b * fv[i])));
    }
    return {worst <= 1e-6 && worst_lin <= 1e-9,
            "pairs=100 max_abs_err=" + fmt(worst, 3) + " (<=1e-6) linearity_err=" + fmt(worst_lin, 3) + " (<=1e-9)"};
}

// ---- 4. periodic correlation ----

Outcome correlation_twin()
{
    const auto templ = waveforms::gen_radar({});
    const std::size_t T = templ.size();
    iqcore::IQBuffer tx = templ;
    for (int i = 1; i < 4; ++i) tx.samples.insert(tx.samples.end(), templ.samples.begin(), templ.samples.end());
    scenario::TapSet identity;
    identity.taps.push_back({0.0, {1.0, 0.0}});
    const auto rx = channel::emulate_link(tx, {identity}, tx.duration_s(), 0.0, 0.0, 1);
    const auto rho = channel::correlate_template(rx, templ);
    double min_peak = 1.0;
    bool peaks_at_multiples = true;
    for (std::size_t k = 0; k * T < rho.size(); ++k) {
        min_peak = std::min(min_peak, rho[k * T]);
        // the local maximum around each multiple sits on the multiple itself
        const std::size_t lo = k * T >= 32 ? k * T - 32 : 0, hi = std::min(rho.size(), k * T + 33);
        if (std::max_element(rho.begin() + static_cast<long>(lo), rho.begin() + static_cast<long>(hi)) - rho.begin() !=
            static_cast<long>(k * T))
            peaks_at_multiples = false;
    }
    double floor = 0.0;
    for (std::size_t l = 0; l < rho.size(); ++l) {
        const std::size_t off = l % T;
        if (std::min(off, T - off) < 64) continue;
        floor = std::max(floor, rho[l]);
    }
    return {min_peak >= 0.99 && floor <= 0.5 && peaks_at_multiples,
            "repeats=4 min_peak=" + fmt(min_peak, 6) + " (>=0.99) inter_peak_floor=" + fmt(floor) +
                " (<=0.5, 64-sample guard around peaks) peaks_at_multiples=" + (peaks_at_multiples ? "yes" : "no")};
}

// ---- 5. baseline detection ----

Outcome baseline_detection()
{
    const auto templ = waveforms::radar_pulse_template({});
    const std::size_t len = detector::BaselineConfig{}.context;
    const double thr = channel::calibrate_threshold(std::span<const cf32>(templ.samples), len, 2000, 0.999, 0xca11b);
    std::vector<iqcore::IQBuffer> pool;
    for (std::uint64_t s = 0; s < 8; ++s) {
        waveforms::RadarParams rp;
        rp.seed = 100 + s;
        pool.push_back(waveforms::gen_radar(rp));
    }
    std::ostringstream detail;
    detail << "calibrated_threshold=" << fmt(thr) << " (noise-only 99.9th percentile, 2000 trials)";
    bool ok = true;
    const int trials = 1000;
    for (double snr : {0.0, 10.0, 20.0}) {
        int tp = 0, fp = 0;
        std::mt19937_64 rng(derive_seed(5, {static_cast<std::uint64_t>(snr + 100)}));
        for (int i = 0; i < trials; ++i) {
            const auto& r = pool[static_cast<std::size_t>(i) % pool.size()];
            const std::size_t off = rng() % (r.size() - len);
            iqcore::IQBuffer seg;
            seg.sample_rate_hz = r.sample_rate_hz;
            seg.samples.assign(r.samples.begin() + static_cast<long>(off), r.samples.begin() + static_cast<long>(off + len));
            const auto mixed = waveforms::mix_at_snr(seg, nullptr, snr, std::nullopt, rng()).mixed;
            tp += channel::matched_filter_detect(mixed, templ, thr).detected;
            const auto noise = waveforms::gen_noise(static_cast<std::int64_t>(len), 1.0, rng());
            fp += channel::matched_filter_detect(noise, templ, thr).detected;
        }
        const double tpr = tp / double(trials), fpr = fp / double(trials);
        ok = ok && tpr >= 0.99 && fpr <= 0.01;
        detail << " snr" << snr << "dB: TP=" << fmt(tpr) << " FP=" << fmt(fpr);
    }
    detail << " (TP>=0.99, FP<=0.01, 1000 trials each)";
    return {ok, detail.str()};
}

// ---- 6. vote semantics ----

Outcome vote_semantics()
{
    std::mt19937_64 rng(6);
    std::size_t mismatches = 0, verdicts = 0;
    for (int stream = 0; stream < 10000; ++stream) {
        detector::VoteState v;
        std::deque<int> ring;
        const double rate = std::uniform_real_distribution<double>(0.35, 0.65)(rng);
        const int batches = 10 + static_cast<int>(rng() % 11);
        for (int b = 0; b < batches; ++b) {
            std::vector<double> p(10);
            for (auto& x : p) {
                const bool on = std::bernoulli_distribution(rate)(rng);
                x = on ? std::uniform_real_distribution<double>(0.5, 1.0)(rng) : std::uniform_real_distribution<double>(0.0, 0.4999)(rng);
                ring.push_back(on);
                if (ring.size() > 100) ring.pop_front();
            }
            const auto verdict = v.step(p);
            if (verdict.has_value() != (ring.size() == 100)) ++mismatches;
            if (verdict) {
                ++verdicts;
                const int pos = std::accumulate(ring.begin(), ring.end(), 0);
                if (verdict->radar_present != (pos > 50)) ++mismatches;
            }
        }
    }

    // End-to-end: noise, then high-SNR radar from a mid-window onset, through the baseline detector.
    const detector::BaselineDetector det;
    const std::size_t w = iqcore::kWindowLength, batch = 10;
    const std::size_t onset = 400 * w + 517;
    const std::size_t total = 800 * w;
    waveforms::RadarParams rp;
    rp.total_samples = static_cast<std::int64_t>(total - onset);
    const auto radar = waveforms::gen_radar(rp);
    const auto noise = waveforms::gen_noise(static_cast<std::int64_t>(total), 1.0, 61);
    std::vector<cf32> rx = noise.samples;
    const float amp = static_cast<float>(std::sqrt(std::pow(10.0, 2.0) / iqcore::measure_power(radar)));
    for (std::size_t i = 0; i < radar.size(); ++i) rx[onset + i] += amp * radar.samples[i];
    const std::size_t pad = det.history_needed(batch) - batch * w;
    std::vector<cf32> padded(pad, cf32{});
    padded.insert(padded.end(), rx.begin(), rx.end());
    detector::VoteState vote(batch, 100);
    std::optional<std::size_t> flip_window;
    bool false_alarm = false;
    for (std::size_t b = 0; b * batch * w < total && !flip_window; ++b) {
        const auto tail = std::span<const cf32>(padded).first(pad + (b + 1) * batch * w);
        const auto v = vote.step(det.probabilities(tail, batch));
        if (v && v->radar_present) {
            if ((b + 1) * batch * w <= onset) false_alarm = true;
            flip_window = (b + 1) * batch; // windows seen when the verdict flipped
        }
    }
    const std::size_t onset_window = onset / w; // window containing the onset
    const std::size_t arrivals = flip_window ? *flip_window - onset_window : 0;
    const bool flip_ok = flip_window && !false_alarm && arrivals >= 51 && arrivals <= 150;
    return {mismatches == 0 && flip_ok,
            "streams=10000 verdicts=" + std::to_string(verdicts) + " mismatches=" + std::to_string(mismatches) +
                " flip_after_onset=" + (flip_window ? std::to_string(arrivals) : std::string("never")) +
                " windows (in [51,150], 20 dB SNR, baseline detector)"};
}

// ---- 7. latency scaling ----

Outcome latency_scaling()
{
    const auto model = detector::Model::from_weights(detector::make_random_weights({}, 7));
    const auto rep = detector::bench_latency(model, {1, 10, 100}, 10, 7);
    std::ostringstream d;
    for (const auto& p : rep.points) d << "B=" << p.batch << ":" << fmt(p.mean_s * 1e3) << "ms(cv " << fmt(p.cv, 2) << ") ";
    d << "monotone=" << (rep.monotone ? "yes" : "no") << " R2=" << fmt(rep.r2, 6) << " (>=0.95)";
    return {rep.monotone && rep.r2 >= 0.95, d.str()};
}

// ---- 8. control-loop timeline ----

Outcome control_loop()
{
    controlplane::ExperimentConfig cfg;
    cfg.schedule.radar_on_s = 5.0;
    cfg.schedule.radar_off_s = 9.0;
    cfg.duration_s = 32.0;
    const auto r = controlplane::run_experiment(cfg);
    using controlplane::EventKind;
    auto first = [&](EventKind k) -> std::optional<double> {
        for (const auto& e : r.events)
            if (e.kind == k) return e.t_s;
        return std::nullopt;
    };
    const auto onset = first(EventKind::RadarOnsetTruth), down = first(EventKind::BSShutdown),
               end = first(EventKind::RadarEndTruth), up = first(EventKind::BSPowerUpStart), resumed = first(EventKind::BSResumed);
    if (!(onset && down && end && up && resumed)) return {false, "missing events in the log"};
    const bool order = *onset < *down && *down < *end && *end < *up && *up < *resumed;
    const double gap = *resumed - *up;
    std::size_t quiet = 0, nonzero_quiet = 0;
    for (const auto& k : r.kpi)
        if (k.t_s >= *down && k.t_s < *resumed) {
            ++quiet;
            if (k.throughput_mbps != 0.0) ++nonzero_quiet;
        }
    bool occupancy_ok = true;
    for (const auto& o : r.occupancy)
        if (o.t_s >= *down && o.t_s < *resumed && o.band_active) occupancy_ok = false;
    const bool ok = order && std::abs(gap - 10.0) <= 1e-9 && quiet > 0 && nonzero_quiet == 0 && occupancy_ok;
    std::ostringstream d;
    d << "onset=" << *onset << " shutdown=" << fmt(*down, 6) << " end=" << *end << " powerup=" << fmt(*up, 6)
      << " resumed=" << fmt(*resumed, 6) << " order=" << (order ? "ok" : "broken") << " resume-powerup=" << fmt(gap, 12)
      << "s kpi_rows_in_outage=" << quiet << " nonzero=" << nonzero_quiet;
    return {ok, d.str()};
}

// ---- 9. inference suite with random weights ----

Outcome inference_suite()
{
    std::mt19937_64 rng(9);
    std::normal_distribution<float> g(0.0f, 1.0f);
    auto randn = [&](std::size_t n, float scale = 1.0f) {
        std::vector<float> v(n);
        for (auto& x : v) x = g(rng) * scale;
        return v;
    };
    const auto model = detector::Model::from_weights(detector::make_random_weights({}, 99));

    // sigmoid range
    bool range_ok = true;
    for (float scale : {1e-3f, 1.0f, 1e3f})
        for (double p : model.forward(randn(3 * 2048, scale), 3)) range_ok = range_ok && p > 0.0 && p < 1.0;

    // batch permutation
    const std::size_t b = 5;
    const auto x = randn(b * 2048);
    const auto y = model.forward(x, b);
    std::vector<std::size_t> perm(b);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<float> xp(x.size());
    for (std::size_t i = 0; i < b; ++i)
        std::copy_n(x.begin() + static_cast<long>(perm[i] * 2048), 2048, xp.begin() + static_cast<long>(i * 2048));
    const auto yp = model.forward(xp, b);
    bool perm_ok = true;
    for (std::size_t i = 0; i < b; ++i) perm_ok = perm_ok && yp[i] == y[perm[i]];

    // NLB zero projection
    detector::NonLocalParams p;
    p.channels = 32;
    p.inner = 16;
    p.theta_w = randn(512);
    p.phi_w = randn(512);
    p.g_w = randn(512);
    p.theta_b = randn(16);
    p.phi_b = randn(16);
    p.g_b = randn(16);
    p.out_w.assign(512, 0.0f);
    p.out_b.assign(32, 0.0f);
    const auto xn = randn(64 * 32);
    const bool nlb_ok = detector::non_local_block(xn, 64, p) == xn;

    // conv against the naive triple loop
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t len = 16 + rng() % 100, c = 1 + rng() % 8, f = 1 + rng() % 8, k = 1 + 2 * (rng() % 3);
        const std::size_t stride = 1 + rng() % 2, pad = rng() % (k / 2 + 1);
        const auto in = randn(len * c), w = randn(k * c * f), bias = randn(f);
        const auto out = detector::conv1d(in, len, c, w, k, f, bias, stride, pad);
        const std::size_t out_len = (len + 2 * pad - k) / stride + 1;
        for (std::size_t l = 0; l < out_len; ++l)
            for (std::size_t o = 0; o < f; ++o) {
                double acc = bias[o];
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        const long src = static_cast<long>(l * stride + j) - static_cast<long>(pad);
                        if (src >= 0 && src < static_cast<long>(len))
                            acc += double(in[static_cast<std::size_t>(src) * c + ch]) * w[(j * c + ch) * f + o];
                    }
                worst = std::max(worst, std::abs(acc - out[l * f + o]));
            }
    }
    const bool conv_ok = worst <= 1e-5;
    return {range_ok && perm_ok && nlb_ok && conv_ok,
            std::string("sigmoid_range=") + (range_ok ? "ok" : "broken") + " batch_permutation=" + (perm_ok ? "ok" : "broken") +
                " nlb_zero_identity=" + (nlb_ok ? "exact" : "broken") + " conv_vs_naive=" + fmt(worst, 3) + " (<=1e-5)"};
}

} // namespace

int main()
{
    criterion("radar waveform fidelity", 1.0, radar_fidelity);
    criterion("tap approximation", 10.0, tap_approximation);
    criterion("FIR correctness", 10.0, fir_correctness);
    criterion("periodic correlation", 30.0, correlation_twin);
    criterion("baseline detection", 120.0, baseline_detection);
    criterion("vote semantics", 0.0, vote_semantics);
    criterion("latency scaling", 0.0, latency_scaling);
    criterion("control-loop timeline", 60.0, control_loop);
    criterion("inference suite with random weights", 0.0, inference_suite);
    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
