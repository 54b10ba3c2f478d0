// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sptw/iqcore.hpp"

#include <cstdint>
#include <optional>

namespace sptw::waveforms {

using iqcore::IQBuffer;

inline constexpr double kDefaultSampleRateHz = 6e6;

/// Pulsed radar riding on positive I/Q offsets. Every sample stays in the first quadrant
/// because the pulse amplitude never exceeds the smaller of the two offsets.
struct RadarParams {
    double sample_rate_hz = kDefaultSampleRateHz;
    std::int64_t total_samples = 106657;
    double pri_s = 1e-3;
    double pulse_width_s = 100e-6;
    double edge_s = 5e-6;          ///< raised-cosine rise/fall time, inside pulse_width_s
    double chirp_bandwidth_hz = 4e6; ///< intra-pulse linear FM sweep
    double pri_jitter_s = 100e-6;  ///< each pulse start is delayed by U[0, pri_jitter_s)
    double i_offset = 1.0;
    double q_offset = 1.0;
    double amplitude = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
    double duration_s() const noexcept { return static_cast<double>(total_samples) / sample_rate_hz; }
};

struct CellularParams {
    double bandwidth_hz = 10e6;     ///< nominal channel bandwidth (metadata, KPI proxy)
    std::int64_t num_subcarriers = 512;
    std::int64_t cp_len = 36;
    std::int64_t taper_len = 16;    ///< raised-cosine symbol edge taper, <= cp_len
    double occupied_fraction = 0.6; ///< of the sample rate
    double sample_rate_hz = kDefaultSampleRateHz;

    void validate() const;
    double occupied_bandwidth_hz() const noexcept { return occupied_fraction * sample_rate_hz; }
};

IQBuffer gen_radar(const RadarParams& p);

/// One radar pulse (envelope, chirp and offsets) as used by the matched-filter baseline.
IQBuffer radar_pulse_template(const RadarParams& p);

IQBuffer gen_cellular(const CellularParams& p, std::int64_t num_symbols, std::uint64_t seed);

/// Circularly-symmetric complex Gaussian noise with per-sample variance `power`.
IQBuffer gen_noise(std::int64_t n, double power, std::uint64_t seed, double sample_rate_hz = kDefaultSampleRateHz);

struct MixMetadata {
    double signal_scale = 0.0;       ///< a
    double interferer_scale = 0.0;   ///< b
    double signal_power = 0.0;       ///< P_sig before scaling
    double interferer_power = 0.0;   ///< P_int before scaling (after cyclic extension)
    double noise_power = 0.0;        ///< measured power of the generated noise
    double realized_snr_db = 0.0;
    std::optional<double> realized_sinr_db;
};

struct MixResult {
    IQBuffer mixed;
    MixMetadata meta;
    // Scaled components, populated only when requested.
    std::optional<IQBuffer> scaled_signal;
    std::optional<IQBuffer> scaled_interferer;
    std::optional<IQBuffer> noise;
};

/// a*signal + b*interferer + unit-power noise, with a and b solved from the measured
/// component powers so that the requested SNR and SINR hold exactly.
MixResult mix_at_snr(const IQBuffer& signal, const IQBuffer* interferer, double snr_db,
                     std::optional<double> sinr_db, std::uint64_t seed, bool keep_components = false);

/// Repeats `src` cyclically (starting at `offset`) to produce exactly `n` samples.
IQBuffer cyclic_extend(const IQBuffer& src, std::size_t n, std::size_t offset = 0);

double db_to_linear(double db) noexcept;
double linear_to_db(double x) noexcept;

} // namespace sptw::waveforms
