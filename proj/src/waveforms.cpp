// SPDX-License-Identifier: Apache-2.0

#include "sptw/waveforms.hpp"

#include "sptw/error.hpp"
#include "sptw/fft.hpp"
#include "sptw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sptw::waveforms {

using iqcore::cd;
using iqcore::cf32;

namespace {

constexpr std::uint64_t kRadarStream = 0x7261646172ULL;
constexpr std::uint64_t kCellStream = 0x63656c6cULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

void require(bool ok, const char* what)
{
    if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

// Envelope of one pulse sample: raised-cosine edges, flat top.
double pulse_envelope(std::int64_t i, std::int64_t n_pulse, std::int64_t n_edge)
{
    if (n_edge <= 0) return 1.0;
    if (i < n_edge) return 0.5 * (1.0 - std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n_edge)));
    const std::int64_t from_end = n_pulse - 1 - i;
    if (from_end < n_edge)
        return 0.5 * (1.0 - std::cos(std::numbers::pi * (static_cast<double>(from_end) + 0.5) / static_cast<double>(n_edge)));
    return 1.0;
}

struct PulseShape {
    std::int64_t n_pulse;
    std::int64_t n_edge;
    double sweep_rate; // Hz/s
    double width_s;
};

PulseShape pulse_shape(const RadarParams& p)
{
    PulseShape s{};
    s.n_pulse = std::max<std::int64_t>(1, std::llround(p.pulse_width_s * p.sample_rate_hz));
    s.n_edge = std::llround(p.edge_s * p.sample_rate_hz);
    s.width_s = static_cast<double>(s.n_pulse) / p.sample_rate_hz;
    s.sweep_rate = p.chirp_bandwidth_hz / s.width_s;
    return s;
}

cf32 radar_sample(const RadarParams& p, const PulseShape& s, std::int64_t i)
{
    const double env = pulse_envelope(i, s.n_pulse, s.n_edge);
    const double t = static_cast<double>(i) / p.sample_rate_hz - 0.5 * s.width_s;
    const double phase = std::numbers::pi * s.sweep_rate * t * t;
    const double mag = p.amplitude * env;
    // mag * |cos| <= amplitude <= offset, so both components stay >= 0.
    const double re = p.i_offset + mag * std::cos(phase);
    const double im = p.q_offset + mag * std::sin(phase);
    return {static_cast<float>(re), static_cast<float>(im)};
}

} // namespace

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

double linear_to_db(double x) noexcept { return 10.0 * std::log10(x); }

void RadarParams::validate() const
{
    require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "radar sample_rate_hz must be positive");
    require(total_samples >= 1, "radar total_samples must be >= 1");
    require(std::isfinite(pri_s) && pri_s > 0.0, "radar pri_s must be positive");
    require(std::isfinite(pulse_width_s) && pulse_width_s > 0.0 && pulse_width_s < pri_s,
            "radar pulse_width_s must be in (0, pri_s)");
    require(std::isfinite(edge_s) && edge_s >= 0.0 && 2.0 * edge_s <= pulse_width_s,
            "radar edge_s must satisfy 0 <= 2*edge_s <= pulse_width_s");
    require(std::isfinite(chirp_bandwidth_hz) && chirp_bandwidth_hz >= 0.0 && chirp_bandwidth_hz <= sample_rate_hz,
            "radar chirp_bandwidth_hz must be in [0, sample_rate_hz]");
    require(std::isfinite(pri_jitter_s) && pri_jitter_s >= 0.0 && pri_jitter_s + pulse_width_s < pri_s,
            "radar pri_jitter_s must keep pulses from overlapping");
    require(std::isfinite(i_offset) && i_offset > 0.0 && std::isfinite(q_offset) && q_offset > 0.0,
            "radar offsets must be positive");
    require(std::isfinite(amplitude) && amplitude >= 0.0 && amplitude <= std::min(i_offset, q_offset),
            "radar amplitude must be in [0, min(i_offset, q_offset)]");
}

IQBuffer gen_radar(const RadarParams& p)
{
    p.validate();
    IQBuffer buf;
    buf.sample_rate_hz = p.sample_rate_hz;
    buf.samples.assign(static_cast<std::size_t>(p.total_samples),
                       cf32(static_cast<float>(p.i_offset), static_cast<float>(p.q_offset)));

    const auto shape = pulse_shape(p);
    Rng rng(derive_seed(p.seed, {kRadarStream}));
    std::uniform_real_distribution<double> jitter(0.0, p.pri_jitter_s);

    for (std::int64_t k = 0;; ++k) {
        const double start_s = static_cast<double>(k) * p.pri_s + (p.pri_jitter_s > 0.0 ? jitter(rng) : 0.0);
        const std::int64_t start = std::llround(start_s * p.sample_rate_hz);
        if (start >= p.total_samples) break;
        for (std::int64_t i = 0; i < shape.n_pulse && start + i < p.total_samples; ++i)
            buf.samples[static_cast<std::size_t>(start + i)] = radar_sample(p, shape, i);
    }
    return buf;
}

IQBuffer radar_pulse_template(const RadarParams& p)
{
    p.validate();
    const auto shape = pulse_shape(p);
    IQBuffer buf;
    buf.sample_rate_hz = p.sample_rate_hz;
    buf.samples.resize(static_cast<std::size_t>(shape.n_pulse));
    for (std::int64_t i = 0; i < shape.n_pulse; ++i) buf.samples[static_cast<std::size_t>(i)] = radar_sample(p, shape, i);
    return buf;
}

void CellularParams::validate() const
{
    require(num_subcarriers >= 8, "cellular num_subcarriers must be >= 8");
    require(cp_len >= 0 && cp_len < num_subcarriers, "cellular cp_len must be in [0, num_subcarriers)");
    require(taper_len >= 0 && taper_len <= cp_len, "cellular taper_len must be in [0, cp_len]");
    require(std::isfinite(occupied_fraction) && occupied_fraction > 0.0 && occupied_fraction <= 1.0,
            "cellular occupied_fraction must be in (0, 1]");
    require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "cellular sample_rate_hz must be positive");
    require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0.0, "cellular bandwidth_hz must be positive");
    require(occupied_bandwidth_hz() <= sample_rate_hz, "cellular occupied bandwidth exceeds the sample rate");
    require(std::llround(occupied_fraction * static_cast<double>(num_subcarriers)) >= 2,
            "cellular occupied_fraction leaves no active subcarriers");
}

IQBuffer gen_cellular(const CellularParams& p, std::int64_t num_symbols, std::uint64_t seed)
{
    p.validate();
    require(num_symbols >= 1, "num_symbols must be >= 1");

    const auto n = static_cast<std::size_t>(p.num_subcarriers);
    const auto cp = static_cast<std::size_t>(p.cp_len);
    const auto taper = static_cast<std::size_t>(p.taper_len);
    const std::size_t sym_len = n + cp;
    const std::size_t occupied = static_cast<std::size_t>(std::llround(p.occupied_fraction * static_cast<double>(n)));
    const std::size_t half = std::max<std::size_t>(1, occupied / 2);

    // Active subcarriers: +-1 .. +-half, DC left empty.
    std::vector<std::size_t> active;
    for (std::size_t k = 1; k <= half && k < n / 2; ++k) {
        active.push_back(k);
        active.push_back(n - k);
    }

    Rng rng(derive_seed(seed, {kCellStream}));
    std::bernoulli_distribution bit(0.5);
    const double qpsk = std::numbers::sqrt2 / 2.0;

    std::vector<cd> taper_up(taper);
    for (std::size_t m = 0; m < taper; ++m)
        taper_up[m] = 0.5 * (1.0 - std::cos(std::numbers::pi * (static_cast<double>(m) + 0.5) / static_cast<double>(taper)));

    const std::size_t total = static_cast<std::size_t>(num_symbols) * sym_len;
    std::vector<cd> out(total + taper, cd{});
    std::vector<cd> freq(n);
    for (std::int64_t s = 0; s < num_symbols; ++s) {
        std::fill(freq.begin(), freq.end(), cd{});
        for (auto k : active) freq[k] = cd(bit(rng) ? qpsk : -qpsk, bit(rng) ? qpsk : -qpsk);
        const auto body = fft::inverse(freq);
        const std::size_t base = static_cast<std::size_t>(s) * sym_len;
        // Cyclic prefix + body + cyclic suffix of `taper` samples, edges windowed, overlap-added.
        for (std::size_t m = 0; m < sym_len + taper; ++m) {
            const cd v = body[(m + n - cp) % n];
            double w = 1.0;
            if (m < taper) w = taper_up[m].real();
            else if (m >= sym_len) w = 1.0 - taper_up[m - sym_len].real();
            out[base + m] += v * w;
        }
    }
    out.resize(total);

    double power = 0.0;
    for (const auto& v : out) power += std::norm(v);
    power /= static_cast<double>(total);
    const double scale = power > 0.0 ? 1.0 / std::sqrt(power) : 1.0;

    IQBuffer buf;
    buf.sample_rate_hz = p.sample_rate_hz;
    buf.samples.resize(total);
    for (std::size_t i = 0; i < total; ++i)
        buf.samples[i] = cf32(static_cast<float>(out[i].real() * scale), static_cast<float>(out[i].imag() * scale));
    return buf;
}

IQBuffer gen_noise(std::int64_t n, double power, std::uint64_t seed, double sample_rate_hz)
{
    require(n >= 1, "noise length must be >= 1");
    require(std::isfinite(power) && power > 0.0, "noise power must be positive");
    require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "noise sample_rate_hz must be positive");
    Rng rng(derive_seed(seed, {kNoiseStream}));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = std::sqrt(power);
    const double unit = std::numbers::sqrt2 / 2.0;
    IQBuffer buf;
    buf.sample_rate_hz = sample_rate_hz;
    buf.samples.resize(static_cast<std::size_t>(n));
    for (auto& s : buf.samples) {
        const double re = normal(rng) * unit;
        const double im = normal(rng) * unit;
        s = cf32(static_cast<float>(re * sigma), static_cast<float>(im * sigma));
    }
    return buf;
}

IQBuffer cyclic_extend(const IQBuffer& src, std::size_t n, std::size_t offset)
{
    if (src.empty()) throw Error(ErrorCode::LengthMismatch, "cannot extend an empty buffer");
    IQBuffer out;
    out.sample_rate_hz = src.sample_rate_hz;
    out.center_freq_hz = src.center_freq_hz;
    out.samples.resize(n);
    const std::size_t len = src.size();
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = src.samples[(offset + i) % len];
    return out;
}

MixResult mix_at_snr(const IQBuffer& signal, const IQBuffer* interferer, double snr_db,
                     std::optional<double> sinr_db, std::uint64_t seed, bool keep_components)
{
    require(std::isfinite(snr_db), "snr_db must be finite");
    if (sinr_db) require(std::isfinite(*sinr_db), "sinr_db must be finite");
    if (interferer && !sinr_db) throw Error(ErrorCode::InvalidParams, "an interferer needs a target sinr_db");
    if (!interferer && sinr_db) throw Error(ErrorCode::InvalidParams, "sinr_db given without an interferer");

    const std::size_t n = signal.size();
    const double p_sig = iqcore::measure_power(signal);
    require(p_sig > 0.0, "signal has zero power");

    IQBuffer extended;
    double p_int = 0.0;
    if (interferer) {
        if (interferer->empty()) throw Error(ErrorCode::LengthMismatch, "interferer is empty");
        if (interferer->sample_rate_hz != signal.sample_rate_hz)
            throw Error(ErrorCode::LengthMismatch, "signal and interferer sample rates differ");
        extended = cyclic_extend(*interferer, n);
        p_int = iqcore::measure_power(extended);
        require(p_int > 0.0, "interferer has zero power");
    }

    const IQBuffer noise = gen_noise(static_cast<std::int64_t>(n), 1.0, seed, signal.sample_rate_hz);
    const double p_noise = iqcore::measure_power(noise);

    MixMetadata meta;
    meta.signal_power = p_sig;
    meta.interferer_power = p_int;
    meta.noise_power = p_noise;
    meta.signal_scale = std::sqrt(db_to_linear(snr_db) * p_noise / p_sig);
    const double scaled_sig = meta.signal_scale * meta.signal_scale * p_sig;

    if (interferer) {
        if (*sinr_db > snr_db)
            throw Error(ErrorCode::InfeasibleSINR, "requested SINR exceeds SNR; a non-negative interferer cannot raise it");
        const double b2 = std::max(0.0, (scaled_sig / db_to_linear(*sinr_db) - p_noise) / p_int);
        meta.interferer_scale = std::sqrt(b2);
    }

    MixResult res;
    res.mixed.sample_rate_hz = signal.sample_rate_hz;
    res.mixed.center_freq_hz = signal.center_freq_hz;
    res.mixed.samples.resize(n);
    IQBuffer cs, ci;
    cs.sample_rate_hz = ci.sample_rate_hz = signal.sample_rate_hz;
    cs.samples.resize(n);
    if (interferer) ci.samples.resize(n);

    const double a = meta.signal_scale, b = meta.interferer_scale;
    for (std::size_t i = 0; i < n; ++i) {
        const cd s = cd(signal.samples[i].real(), signal.samples[i].imag()) * a;
        cd acc = s + cd(noise.samples[i].real(), noise.samples[i].imag());
        cs.samples[i] = cf32(static_cast<float>(s.real()), static_cast<float>(s.imag()));
        if (interferer) {
            const cd v = cd(extended.samples[i].real(), extended.samples[i].imag()) * b;
            acc += v;
            ci.samples[i] = cf32(static_cast<float>(v.real()), static_cast<float>(v.imag()));
        }
        res.mixed.samples[i] = cf32(static_cast<float>(acc.real()), static_cast<float>(acc.imag()));
    }

    const double ps = iqcore::measure_power(cs);
    meta.realized_snr_db = linear_to_db(ps / p_noise);
    if (interferer) meta.realized_sinr_db = linear_to_db(ps / (iqcore::measure_power(ci) + p_noise));

    res.meta = meta;
    if (keep_components) {
        res.scaled_signal = std::move(cs);
        if (interferer) res.scaled_interferer = std::move(ci);
        res.noise = noise;
    }
    return res;
}

} // namespace sptw::waveforms
