// SPDX-License-Identifier: Apache-2.0

#include "sptw/channel.hpp"

#include "sptw/error.hpp"
#include "sptw/fft.hpp"
#include "sptw/rng.hpp"
#include "sptw/stream.hpp"
#include "sptw/waveforms.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace sptw::channel {

namespace {

constexpr std::uint64_t kLinkNoiseStream = 0x6c696e6bULL;

void require(bool ok, const char* what)
{
    if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

} // namespace

std::vector<SampleTap> quantize_taps(const TapSet& taps, double sample_rate_hz)
{
    require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "sample rate must be positive");
    std::vector<SampleTap> out;
    out.reserve(taps.taps.size());
    for (const auto& t : taps.taps) {
        require(std::isfinite(t.delay_s) && t.delay_s >= 0.0, "tap delay must be finite and non-negative");
        require(std::isfinite(t.gain.real()) && std::isfinite(t.gain.imag()), "tap gain must be finite");
        const double d = std::round(t.delay_s * sample_rate_hz);
        if (d > 9.0e15) throw Error(ErrorCode::DelayOverflow, "tap delay too large");
        out.push_back({static_cast<std::size_t>(d), t.gain});
    }
    return out;
}

std::vector<cd> fir_apply(std::span<const cd> x, const std::vector<SampleTap>& taps)
{
    const std::size_t n = x.size();
    std::vector<cd> y(n, cd{});
    for (const auto& t : taps) {
        if (t.delay >= n) continue;
        for (std::size_t i = t.delay; i < n; ++i) y[i] += t.gain * x[i - t.delay];
    }
    return y;
}

IQBuffer fir_apply(const IQBuffer& buf, const TapSet& taps)
{
    const auto q = quantize_taps(taps, buf.sample_rate_hz);
    IQBuffer out;
    out.sample_rate_hz = buf.sample_rate_hz;
    out.center_freq_hz = buf.center_freq_hz;
    const std::size_t n = buf.samples.size();
    if (n == 0) return out;
    for (const auto& t : q)
        if (t.delay >= n) throw Error(ErrorCode::DelayOverflow, "rounded tap delay exceeds buffer length");
    std::vector<cd> x(buf.samples.begin(), buf.samples.end());
    const auto y = fir_apply(x, q);
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i] = cf32(static_cast<float>(y[i].real()), static_cast<float>(y[i].imag()));
    return out;
}

LinkEmulator::LinkEmulator(std::vector<TapSet> timeline, double epoch_s, double sample_rate_hz, double noise_power,
                           double rx_gain_db, std::uint64_t seed)
    : rng_(derive_seed(seed, {kLinkNoiseStream}))
{
    require(!timeline.empty(), "tap timeline is empty");
    require(std::isfinite(epoch_s) && epoch_s > 0.0, "epoch must be positive");
    require(std::isfinite(noise_power) && noise_power >= 0.0, "noise power must be non-negative");
    require(std::isfinite(rx_gain_db), "rx gain must be finite");
    const double len = std::round(epoch_s * sample_rate_hz);
    require(len >= 1.0, "epoch shorter than one sample");
    epoch_len_ = static_cast<std::size_t>(len);
    for (const auto& ts : timeline) {
        taps_.push_back(quantize_taps(ts, sample_rate_hz));
        for (const auto& t : taps_.back()) max_delay_ = std::max(max_delay_, t.delay);
    }
    noise_sigma_ = std::sqrt(noise_power / 2.0);
    gain_ = std::pow(10.0, rx_gain_db / 20.0);
    history_.assign(max_delay_, cd{});
}

std::vector<cf32> LinkEmulator::process(std::span<const cf32> block)
{
    const std::size_t m = block.size();
    const std::uint64_t last = n_ + m;
    if (m > 0 && (last - 1) / epoch_len_ >= taps_.size())
        throw Error(ErrorCode::TimelineTooShort, "tap timeline ends before the stream");

    std::vector<cd> ext(history_);
    ext.insert(ext.end(), block.begin(), block.end());
    std::vector<cf32> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& taps = taps_[static_cast<std::size_t>((n_ + i) / epoch_len_)];
        const std::size_t j = max_delay_ + i;
        cd y{};
        for (const auto& t : taps) y += t.gain * ext[j - t.delay];
        if (noise_sigma_ > 0.0) {
            const double re = normal_(rng_);
            const double im = normal_(rng_);
            y += cd(re, im) * noise_sigma_;
        }
        y *= gain_;
        out[i] = cf32(static_cast<float>(y.real()), static_cast<float>(y.imag()));
    }
    history_.assign(ext.end() - static_cast<std::ptrdiff_t>(max_delay_), ext.end());
    n_ = last;
    return out;
}

IQBuffer emulate_link(const IQBuffer& tx, const std::vector<TapSet>& timeline, double epoch_s, double noise_power,
                      double rx_gain_db, std::uint64_t seed)
{
    tx.validate();
    LinkEmulator link(timeline, epoch_s, tx.sample_rate_hz, noise_power, rx_gain_db, seed);
    const std::size_t n = tx.samples.size();
    const std::size_t epochs = (n + link.epoch_length() - 1) / link.epoch_length();
    if (timeline.size() < epochs) throw Error(ErrorCode::TimelineTooShort, "tap timeline covers too few epochs");
    IQBuffer out;
    out.sample_rate_hz = tx.sample_rate_hz;
    out.center_freq_hz = tx.center_freq_hz;
    out.samples = link.process(tx.samples);
    return out;
}

void stream_link(const IQBuffer& tx, LinkEmulator& link, const std::function<void(std::vector<cf32>&&)>& sink,
                 std::size_t block, std::size_t queue_depth)
{
    require(block > 0, "block size must be positive");
    BlockQueue<std::vector<cf32>> queue(queue_depth);
    std::exception_ptr producer_error;
    std::thread producer([&] {
        try {
            for (std::size_t pos = 0; pos < tx.samples.size(); pos += block) {
                const std::size_t len = std::min(block, tx.samples.size() - pos);
                if (!queue.push(link.process(std::span<const cf32>(tx.samples).subspan(pos, len)))) break;
            }
        } catch (...) {
            producer_error = std::current_exception();
        }
        queue.close();
    });
    std::exception_ptr consumer_error;
    try {
        while (auto b = queue.pop()) sink(std::move(*b));
    } catch (...) {
        consumer_error = std::current_exception();
        queue.close();
    }
    producer.join();
    if (producer_error) std::rethrow_exception(producer_error);
    if (consumer_error) std::rethrow_exception(consumer_error);
}

std::vector<double> correlate_template(std::span<const cf32> rx, std::span<const cf32> templ, bool remove_dc)
{
    const std::size_t t = templ.size();
    const std::size_t n = rx.size();
    if (t == 0) throw Error(ErrorCode::EmptyInput, "empty correlation template");
    if (t > n) throw Error(ErrorCode::TemplateTooLong, "template longer than received buffer");

    std::vector<cd> t0(templ.begin(), templ.end());
    if (remove_dc) {
        cd mean{};
        for (const auto& v : t0) mean += v;
        mean /= static_cast<double>(t);
        for (auto& v : t0) v -= mean;
    }
    double et = 0.0;
    for (const auto& v : t0) et += std::norm(v);
    if (!(et > 0.0)) throw Error(ErrorCode::DegenerateTemplate, "template has no energy to correlate");

    // Circular correlation is exact for lags 0..n-t once the transform covers n samples.
    const std::size_t m = fft::next_pow2(n);
    std::vector<cd> rp(m, cd{}), tp(m, cd{});
    std::copy(rx.begin(), rx.end(), rp.begin());
    std::copy(t0.begin(), t0.end(), tp.begin());
    auto rf = fft::forward(rp);
    const auto tf = fft::forward(tp);
    for (std::size_t k = 0; k < m; ++k) rf[k] *= std::conj(tf[k]);
    const auto c = fft::inverse(rf);

    // Window energies from prefix sums; long double keeps the DC-removal subtraction accurate.
    std::vector<long double> s2(n + 1, 0.0L), sr(n + 1, 0.0L), si(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        const long double re = rx[i].real(), im = rx[i].imag();
        s2[i + 1] = s2[i] + re * re + im * im;
        sr[i + 1] = sr[i] + re;
        si[i + 1] = si[i] + im;
    }
    const std::size_t lags = n - t + 1;
    std::vector<double> rho(lags, 0.0);
    const long double tl = static_cast<long double>(t);
    for (std::size_t l = 0; l < lags; ++l) {
        const long double e2 = s2[l + t] - s2[l];
        long double v = e2;
        if (remove_dc) {
            const long double mr = sr[l + t] - sr[l], mi = si[l + t] - si[l];
            v -= (mr * mr + mi * mi) / tl;
        }
        if (!(v > 1e-9L * e2) || !(v > 0.0L)) continue;
        rho[l] = std::abs(c[l]) / static_cast<double>(m) / std::sqrt(et * static_cast<double>(v));
    }
    return rho;
}

std::vector<double> correlate_template(const IQBuffer& rx, const IQBuffer& templ, bool remove_dc)
{
    return correlate_template(std::span<const cf32>(rx.samples), std::span<const cf32>(templ.samples), remove_dc);
}

MatchResult matched_filter_detect(std::span<const cf32> rx, std::span<const cf32> templ, double threshold)
{
    require(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0, 1)");
    const auto rho = correlate_template(rx, templ);
    const auto it = std::max_element(rho.begin(), rho.end());
    MatchResult r;
    r.peak = *it;
    r.lag = static_cast<std::size_t>(it - rho.begin());
    r.detected = r.peak >= threshold;
    return r;
}

MatchResult matched_filter_detect(const IQBuffer& rx, const IQBuffer& templ, double threshold)
{
    return matched_filter_detect(std::span<const cf32>(rx.samples), std::span<const cf32>(templ.samples), threshold);
}

double calibrate_threshold(std::span<const cf32> templ, std::size_t rx_length, int trials, double quantile,
                           std::uint64_t seed)
{
    require(trials >= 1, "trials must be positive");
    require(quantile > 0.0 && quantile <= 1.0, "quantile must lie in (0, 1]");
    std::vector<double> peaks;
    peaks.reserve(static_cast<std::size_t>(trials));
    for (int i = 0; i < trials; ++i) {
        const auto noise =
            waveforms::gen_noise(static_cast<std::int64_t>(rx_length), 1.0, derive_seed(seed, {static_cast<std::uint64_t>(i)}));
        const auto rho = correlate_template(std::span<const cf32>(noise.samples), templ);
        peaks.push_back(*std::max_element(rho.begin(), rho.end()));
    }
    std::sort(peaks.begin(), peaks.end());
    const auto idx = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(trials))) - 1;
    return peaks[std::min(idx, peaks.size() - 1)];
}

} // namespace sptw::channel
