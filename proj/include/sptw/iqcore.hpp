// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sptw::iqcore {

using cf32 = std::complex<float>;
using cd = std::complex<double>;

inline constexpr std::size_t kWindowLength = 1024;

/// A run of complex baseband samples plus the rate it was captured at.
struct IQBuffer {
    std::vector<cf32> samples;
    double sample_rate_hz = 1.0;
    double center_freq_hz = 0.0;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    double duration_s() const noexcept { return static_cast<double>(samples.size()) / sample_rate_hz; }

    /// Throws InvalidParams / NonFiniteSample if the buffer invariants are broken.
    void validate() const;
};

enum class Domain { Time, Frequency };

struct Window1024 {
    std::array<cf32, kWindowLength> values{};
    Domain domain = Domain::Time;
    /// Sample offset of the time window inside its source buffer.
    std::size_t source_offset = 0;
};

/// Sidecar metadata written next to every `.iq` file as `<file>.json`.
struct Manifest {
    double sample_rate_hz = 0.0;
    double center_freq_hz = 0.0;
    std::string description;
};

IQBuffer load_iq_file(const std::filesystem::path& path, double sample_rate_hz, double center_freq_hz = 0.0);
void save_iq_file(const IQBuffer& buf, const std::filesystem::path& path);

std::filesystem::path manifest_path_for(const std::filesystem::path& iq_path);
void save_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

/// Loads an `.iq` file taking its sample rate from the sidecar manifest.
IQBuffer load_iq_with_manifest(const std::filesystem::path& iq_path);
/// Saves the samples and a sidecar manifest describing them.
void save_iq_with_manifest(const IQBuffer& buf, const std::filesystem::path& iq_path, const std::string& description);

std::vector<Window1024> segment_windows(const IQBuffer& buf, std::size_t stride);

/// 1024-point DFT, fftshifted, scaled to unit mean power. Throws ZeroWindow for an all-zero window.
Window1024 to_frequency(const Window1024& w);

/// Same as to_frequency() on a time window, but returns the double-precision spectrum before
/// power normalization (used by tests and by feature builders that need the raw scale).
std::vector<cd> raw_spectrum(const Window1024& w);

/// Scales a window in place to unit mean power. Throws ZeroWindow if it has no energy.
void normalize_power(std::span<cd> values);

double measure_power(std::span<const cf32> samples);
double measure_power(const IQBuffer& buf);

inline constexpr double kPsdFloorDb = -120.0;

/// Welch averaged periodogram (Hann window, 50% overlap), DC-centred, dB relative to the peak bin.
std::vector<double> psd_estimate(const IQBuffer& buf, std::size_t nfft);

/// Frequency of each psd_estimate() bin in Hz, same ordering.
std::vector<double> psd_frequencies(std::size_t nfft, double sample_rate_hz);

} // namespace sptw::iqcore
