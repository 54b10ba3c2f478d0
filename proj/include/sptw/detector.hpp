// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sptw/dataset.hpp"
#include "sptw/iqcore.hpp"
#include "sptw/waveforms.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sptw::detector {

using iqcore::cf32;

inline constexpr std::size_t kInputLength = iqcore::kWindowLength;
inline constexpr std::size_t kInputChannels = 2;
inline constexpr char kWeightsMagic[6] = {'S', 'P', 'T', 'W', 'N', 'N'};
inline constexpr std::uint32_t kWeightsVersion = 1;

// ---- layer kernels (row-major, activations are L x C) ----

/// out[l][f] = bias[f] + sum_{k,c} in[l*stride + k - padding][c] * kernel[k][c][f], zero outside.
/// Throws ShapeMismatch on inconsistent sizes or an empty output.
std::vector<float> conv1d(std::span<const float> in, std::size_t length, std::size_t channels,
                          std::span<const float> kernel, std::size_t k, std::size_t filters, std::span<const float> bias,
                          std::size_t stride = 1, std::size_t padding = 0);

/// Non-overlapping max pooling along L; a trailing partial window is dropped.
std::vector<float> maxpool1d(std::span<const float> in, std::size_t length, std::size_t channels, std::size_t pool = 2);

void relu_inplace(std::span<float> x) noexcept;

/// Row-wise softmax of a rows x cols matrix, max-subtracted.
void softmax_rows(std::span<float> m, std::size_t rows, std::size_t cols);

/// out[o] = bias[o] + sum_i in[i] * w[i][o].
std::vector<float> dense(std::span<const float> in, std::span<const float> w, std::span<const float> bias,
                         std::size_t in_dim, std::size_t out_dim);

/// Embedded-Gaussian non-local block: y = x + (softmax(theta phi^T) g) W_out + b_out.
struct NonLocalParams {
    std::size_t channels = 0; ///< C
    std::size_t inner = 0;    ///< Ci
    std::vector<float> theta_w, theta_b, phi_w, phi_b, g_w, g_b; ///< [C][Ci], [Ci]
    std::vector<float> out_w, out_b;                              ///< [Ci][C], [C]
};

std::vector<float> non_local_block(std::span<const float> x, std::size_t length, const NonLocalParams& p);

// ---- weights file ----

enum class LayerKind : std::uint8_t { Conv1D = 0, Dense = 1, NonLocal = 2, BatchNorm = 3 };

struct Tensor {
    std::string name;
    LayerKind kind = LayerKind::Conv1D;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t numel() const noexcept;
};

struct ModelWeights {
    std::uint32_t format_version = kWeightsVersion;
    std::vector<Tensor> tensors;

    const Tensor* find(const std::string& name) const noexcept;
};

/// Throws MalformedFile (bad magic), FormatVersionMismatch, ShapeCompositionError (truncated or
/// inconsistent tensor records), NonFiniteTensor.
ModelWeights load_weights(const std::filesystem::path& path);
void save_weights(const ModelWeights& w, const std::filesystem::path& path);

struct Architecture {
    std::vector<std::size_t> widths = {32, 64, 128, 128};
    std::vector<std::size_t> convs_per_block = {2, 2, 1, 1};
    std::vector<bool> nonlocal_after = {true, true, false, false};
    std::size_t kernel = 3;
    std::vector<std::size_t> dense_hidden = {128};
    bool batchnorm = false;
};

/// He-initialised weights for `arch`. With zero_nonlocal_out the non-local output projections
/// start at zero, as in the original non-local construction.
ModelWeights make_random_weights(const Architecture& arch, std::uint64_t seed, bool zero_nonlocal_out = false);

// ---- model ----

struct ConvLayer {
    std::size_t k = 0, in_ch = 0, out_ch = 0;
    std::vector<float> weight, bias;
    std::vector<float> bn_scale, bn_shift; ///< folded batch norm, empty when absent
};

struct Block {
    std::vector<ConvLayer> convs;
    std::optional<NonLocalParams> nonlocal;
};

struct DenseLayer {
    std::size_t in_dim = 0, out_dim = 0;
    std::vector<float> weight, bias;
};

/// Immutable after construction; forward() is safe to call from several threads.
class Model {
public:
    /// Checks that every tensor is recognised and that layer shapes compose.
    /// Throws ShapeCompositionError otherwise.
    static Model from_weights(const ModelWeights& w);

    /// batch is B x 1024 x 2 row-major. Returns B probabilities in the open interval (0, 1).
    /// Throws ShapeMismatch on a wrong input size, NonFiniteActivation if a block output is not finite.
    std::vector<double> forward(std::span<const float> batch, std::size_t b) const;

    /// Logit of one sample (pre-sigmoid).
    double logit(std::span<const float> sample) const;

    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    const std::vector<DenseLayer>& dense_layers() const noexcept { return dense_; }

private:
    std::vector<Block> blocks_;
    std::vector<DenseLayer> dense_;
};

Model load_model(const std::filesystem::path& path);

double sigmoid_open(double z) noexcept;

// ---- voting ----

struct DetectionVerdict {
    bool radar_present = false;
    double vote_fraction = 0.0;
    double latency_s = 0.0;
    std::uint64_t window_index = 0; ///< index of the newest window in the ring
};

/// Sliding majority vote over the last `ring_size` thresholded outputs.
class VoteState {
public:
    explicit VoteState(std::size_t batch_size = 10, std::size_t ring_size = 100);

    /// Pushes one batch (probability >= 0.5 counts as positive). Returns a verdict once the ring
    /// has been full at least once: radar_present iff positives > ring_size / 2.
    /// Throws BatchSizeMismatch if the batch has the wrong length.
    std::optional<DetectionVerdict> step(std::span<const double> probabilities, double latency_s = 0.0);

    std::size_t positives() const noexcept { return positives_; }
    std::size_t filled() const noexcept { return filled_; }
    std::size_t batch_size() const noexcept { return batch_; }
    std::size_t ring_size() const noexcept { return ring_.size(); }
    std::uint64_t windows_seen() const noexcept { return seen_; }
    bool warmed_up() const noexcept { return filled_ == ring_.size(); }

private:
    std::size_t batch_;
    std::vector<std::uint8_t> ring_;
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    std::size_t positives_ = 0;
    std::uint64_t seen_ = 0;
};

// ---- window detectors used by the detection loop ----

/// Turns the newest n windows of a stream into per-window radar probabilities.
class WindowDetector {
public:
    virtual ~WindowDetector() = default;
    /// Samples of history (ending at the newest window's last sample) needed for n windows.
    virtual std::size_t history_needed(std::size_t n_windows) const = 0;
    virtual std::vector<double> probabilities(std::span<const cf32> tail, std::size_t n_windows) const = 0;
};

/// CNN over each 1024-sample window, features built the same way as the dataset.
class CnnDetector : public WindowDetector {
public:
    explicit CnnDetector(Model model, dataset::FeatureDomain domain = dataset::FeatureDomain::Frequency);
    std::size_t history_needed(std::size_t n_windows) const override;
    std::vector<double> probabilities(std::span<const cf32> tail, std::size_t n_windows) const override;

private:
    Model model_;
    dataset::FeatureDomain domain_;
};

/// Packs 1024-sample windows into B x 1024 x 2 model input.
std::vector<float> window_features(std::span<const cf32> samples, std::size_t n_windows, dataset::FeatureDomain domain);

struct BaselineConfig {
    double threshold = 0.3;
    /// Look-back per window; covers the longest gap between pulse starts plus one pulse.
    std::size_t context = 8192;
    waveforms::RadarParams radar;
};

/// Matched filter against one radar pulse. A window is positive (probability 1) when the
/// normalized correlation peak over its look-back context reaches the threshold.
class BaselineDetector : public WindowDetector {
public:
    explicit BaselineDetector(const BaselineConfig& cfg = {});
    std::size_t history_needed(std::size_t n_windows) const override;
    std::vector<double> probabilities(std::span<const cf32> tail, std::size_t n_windows) const override;

    /// Correlation peak per window (the quantity thresholded above).
    std::vector<double> scores(std::span<const cf32> tail, std::size_t n_windows) const;
    const iqcore::IQBuffer& pulse_template() const noexcept { return template_; }
    const BaselineConfig& config() const noexcept { return cfg_; }

private:
    BaselineConfig cfg_;
    iqcore::IQBuffer template_;
};

// ---- latency ----

struct LatencyPoint {
    std::size_t batch = 0;
    double mean_s = 0.0;
    double std_s = 0.0;
    double cv = 0.0;
};

struct LatencyReport {
    std::vector<LatencyPoint> points;
    bool monotone = false; ///< mean time strictly increasing with batch size
    double slope_s = 0.0, intercept_s = 0.0, r2 = 0.0;
};

/// Single-threaded forward() wall time per batch size, after one warm-up call each.
/// Throws InvalidParams if trials < 10 or batch_sizes is empty.
LatencyReport bench_latency(const Model& model, const std::vector<std::size_t>& batch_sizes, int trials,
                            std::uint64_t seed = 1);

/// Least-squares line y = a + b x with its coefficient of determination.
struct LinearFit {
    double intercept = 0.0, slope = 0.0, r2 = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace sptw::detector
