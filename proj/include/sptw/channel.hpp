// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sptw/iqcore.hpp"
#include "sptw/scenario.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace sptw::channel {

using iqcore::cd;
using iqcore::cf32;
using iqcore::IQBuffer;
using scenario::TapSet;

inline constexpr std::size_t kStreamBlock = 10240;

/// A tap with its delay rounded to whole samples.
struct SampleTap {
    std::size_t delay = 0;
    cd gain;
};

/// Rounds each delay to the nearest sample at fs. Throws InvalidParams on negative or non-finite delays.
std::vector<SampleTap> quantize_taps(const TapSet& taps, double sample_rate_hz);

/// y[n] = sum_k g_k x[n - d_k], zero history before n = 0. Double precision throughout.
std::vector<cd> fir_apply(std::span<const cd> x, const std::vector<SampleTap>& taps);

/// Output has the input's length and sample rate. Throws DelayOverflow if a rounded delay >= length.
IQBuffer fir_apply(const IQBuffer& buf, const TapSet& taps);

/// Stateful link: per-epoch FIR with continuous input history, then AWGN, then rx gain.
/// Feeding a buffer in any chunking yields the same output as one call.
class LinkEmulator {
public:
    LinkEmulator(std::vector<TapSet> timeline, double epoch_s, double sample_rate_hz, double noise_power,
                 double rx_gain_db, std::uint64_t seed);

    std::vector<cf32> process(std::span<const cf32> block);
    std::uint64_t samples_processed() const noexcept { return n_; }
    std::size_t epoch_length() const noexcept { return epoch_len_; }

private:
    std::vector<std::vector<SampleTap>> taps_;
    std::size_t epoch_len_;
    std::size_t max_delay_ = 0;
    double noise_sigma_;
    double gain_;
    std::vector<cd> history_; // last max_delay_ input samples, oldest first
    std::uint64_t n_ = 0;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Whole-buffer link emulation. Throws TimelineTooShort if the timeline has fewer than
/// ceil(length / epoch) entries.
IQBuffer emulate_link(const IQBuffer& tx, const std::vector<TapSet>& timeline, double epoch_s, double noise_power,
                      double rx_gain_db, std::uint64_t seed);

/// Streams `tx` through a LinkEmulator on a producer thread, block by block, into `sink` on the
/// calling thread. The queue holds at most `queue_depth` blocks.
void stream_link(const IQBuffer& tx, LinkEmulator& link, const std::function<void(std::vector<cf32>&&)>& sink,
                 std::size_t block = kStreamBlock, std::size_t queue_depth = 4);

/// Normalized cross-correlation magnitude per lag, lags 0..N-T.
/// With remove_dc, the template and every rx window are mean-removed first, so a constant
/// offset cannot lift the floor. Windows with no energy give 0.
std::vector<double> correlate_template(std::span<const cf32> rx, std::span<const cf32> templ, bool remove_dc = true);
std::vector<double> correlate_template(const IQBuffer& rx, const IQBuffer& templ, bool remove_dc = true);

struct MatchResult {
    bool detected = false;
    double peak = 0.0;
    std::size_t lag = 0;
};

MatchResult matched_filter_detect(std::span<const cf32> rx, std::span<const cf32> templ, double threshold);
MatchResult matched_filter_detect(const IQBuffer& rx, const IQBuffer& templ, double threshold);

/// Monte-Carlo threshold: the `quantile` of the max correlation over noise-only segments of
/// rx_length samples.
double calibrate_threshold(std::span<const cf32> templ, std::size_t rx_length, int trials, double quantile,
                           std::uint64_t seed);

} // namespace sptw::channel
