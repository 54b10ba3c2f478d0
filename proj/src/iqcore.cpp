// SPDX-License-Identifier: Apache-2.0

#include "sptw/iqcore.hpp"

#include "sptw/bytes.hpp"
#include "sptw/error.hpp"
#include "sptw/fft.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

namespace sptw::iqcore {

namespace fs = std::filesystem;

void IQBuffer::validate() const
{
    if (!std::isfinite(sample_rate_hz) || sample_rate_hz <= 0.0)
        throw Error(ErrorCode::InvalidParams, "sample_rate_hz must be finite and positive");
    if (!std::isfinite(center_freq_hz) || center_freq_hz < 0.0)
        throw Error(ErrorCode::InvalidParams, "center_freq_hz must be finite and non-negative");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag()))
            throw Error(ErrorCode::NonFiniteSample, "sample " + std::to_string(i) + " is not finite");
    }
}

IQBuffer load_iq_file(const fs::path& path, double sample_rate_hz, double center_freq_hz)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MalformedFile, "cannot open " + path.string());
    std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::MalformedFile, "read failure on " + path.string());
    if (raw.size() % 8 != 0)
        throw Error(ErrorCode::MalformedFile,
                    path.string() + ": byte length " + std::to_string(raw.size()) + " is not a multiple of 8");

    IQBuffer buf;
    buf.sample_rate_hz = sample_rate_hz;
    buf.center_freq_hz = center_freq_hz;
    buf.samples.resize(raw.size() / 8);
    for (std::size_t i = 0; i < buf.samples.size(); ++i) {
        const float re = bytes::get_f32(raw.data() + 8 * i);
        const float im = bytes::get_f32(raw.data() + 8 * i + 4);
        if (!std::isfinite(re) || !std::isfinite(im))
            throw Error(ErrorCode::NonFiniteSample, path.string() + ": sample " + std::to_string(i) + " is not finite");
        buf.samples[i] = {re, im};
    }
    buf.validate();
    return buf;
}

void save_iq_file(const IQBuffer& buf, const fs::path& path)
{
    buf.validate();
    std::vector<std::uint8_t> raw;
    raw.reserve(buf.samples.size() * 8);
    for (const auto& s : buf.samples) {
        bytes::put_f32(raw, s.real());
        bytes::put_f32(raw, s.imag());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failure on " + path.string());
}

fs::path manifest_path_for(const fs::path& iq_path)
{
    auto p = iq_path;
    p += ".json";
    return p;
}

void save_manifest(const Manifest& m, const fs::path& path)
{
    nlohmann::json j{{"sample_rate_hz", m.sample_rate_hz},
                     {"center_freq_hz", m.center_freq_hz},
                     {"description", m.description}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoFailure, "write failure on " + path.string());
}

Manifest load_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MalformedFile, "cannot open manifest " + path.string());
    try {
        auto j = nlohmann::json::parse(in);
        Manifest m;
        m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        m.center_freq_hz = j.value("center_freq_hz", 0.0);
        m.description = j.value("description", std::string{});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
}

IQBuffer load_iq_with_manifest(const fs::path& iq_path)
{
    const auto m = load_manifest(manifest_path_for(iq_path));
    return load_iq_file(iq_path, m.sample_rate_hz, m.center_freq_hz);
}

void save_iq_with_manifest(const IQBuffer& buf, const fs::path& iq_path, const std::string& description)
{
    save_iq_file(buf, iq_path);
    save_manifest({buf.sample_rate_hz, buf.center_freq_hz, description}, manifest_path_for(iq_path));
}

std::vector<Window1024> segment_windows(const IQBuffer& buf, std::size_t stride)
{
    if (stride == 0) throw Error(ErrorCode::InvalidParams, "stride must be >= 1");
    std::vector<Window1024> out;
    const std::size_t n = buf.samples.size();
    if (n < kWindowLength) return out;
    out.reserve((n - kWindowLength) / stride + 1);
    for (std::size_t off = 0; off + kWindowLength <= n; off += stride) {
        Window1024 w;
        w.domain = Domain::Time;
        w.source_offset = off;
        std::copy_n(buf.samples.begin() + static_cast<std::ptrdiff_t>(off), kWindowLength, w.values.begin());
        out.push_back(w);
    }
    return out;
}

std::vector<cd> raw_spectrum(const Window1024& w)
{
    if (w.domain != Domain::Time) throw Error(ErrorCode::InvalidParams, "raw_spectrum expects a time-domain window");
    std::vector<cd> x(kWindowLength);
    for (std::size_t i = 0; i < kWindowLength; ++i) x[i] = cd(w.values[i].real(), w.values[i].imag());
    auto X = fft::forward(x);
    return fft::shift<cd>(X);
}

void normalize_power(std::span<cd> values)
{
    double p = 0.0;
    for (const auto& v : values) p += std::norm(v);
    if (values.empty() || !(p > 0.0)) throw Error(ErrorCode::ZeroWindow, "window has zero energy");
    p /= static_cast<double>(values.size());
    const double scale = 1.0 / std::sqrt(p);
    for (auto& v : values) v *= scale;
}

Window1024 to_frequency(const Window1024& w)
{
    if (w.domain != Domain::Time) throw Error(ErrorCode::InvalidParams, "to_frequency expects a time-domain window");
    auto X = raw_spectrum(w);
    normalize_power(X);
    Window1024 out;
    out.domain = Domain::Frequency;
    out.source_offset = w.source_offset;
    for (std::size_t k = 0; k < kWindowLength; ++k)
        out.values[k] = cf32(static_cast<float>(X[k].real()), static_cast<float>(X[k].imag()));
    return out;
}

double measure_power(std::span<const cf32> samples)
{
    if (samples.empty()) throw Error(ErrorCode::EmptyBuffer, "cannot measure power of an empty buffer");
    double acc = 0.0;
    for (const auto& s : samples) {
        const double re = s.real(), im = s.imag();
        acc += re * re + im * im;
    }
    return acc / static_cast<double>(samples.size());
}

double measure_power(const IQBuffer& buf) { return measure_power(std::span<const cf32>(buf.samples)); }

std::vector<double> psd_estimate(const IQBuffer& buf, std::size_t nfft)
{
    if (nfft == 0) throw Error(ErrorCode::InvalidParams, "nfft must be >= 1");
    if (buf.samples.size() < nfft)
        throw Error(ErrorCode::BufferTooShort, "buffer has " + std::to_string(buf.samples.size()) +
                                                   " samples, need at least nfft=" + std::to_string(nfft));

    // Periodic Hann window.
    std::vector<double> window(nfft, 1.0);
    if (nfft > 1) {
        for (std::size_t i = 0; i < nfft; ++i)
            window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nfft));
    }
    const std::size_t hop = std::max<std::size_t>(1, nfft / 2);

    std::vector<double> acc(nfft, 0.0);
    std::vector<cd> seg(nfft);
    std::size_t segments = 0;
    for (std::size_t start = 0; start + nfft <= buf.samples.size(); start += hop) {
        for (std::size_t i = 0; i < nfft; ++i) {
            const auto& s = buf.samples[start + i];
            seg[i] = cd(s.real(), s.imag()) * window[i];
        }
        const auto X = fft::forward(seg);
        for (std::size_t k = 0; k < nfft; ++k) acc[k] += std::norm(X[k]);
        ++segments;
    }
    for (auto& v : acc) v /= static_cast<double>(segments);
    auto shifted = fft::shift<double>(acc);

    const double peak = *std::max_element(shifted.begin(), shifted.end());
    std::vector<double> db(nfft, kPsdFloorDb);
    if (!(peak > 0.0)) return db;
    for (std::size_t k = 0; k < nfft; ++k) {
        if (shifted[k] > 0.0) db[k] = std::max(kPsdFloorDb, 10.0 * std::log10(shifted[k] / peak));
    }
    return db;
}

std::vector<double> psd_frequencies(std::size_t nfft, double sample_rate_hz)
{
    std::vector<double> f(nfft);
    const auto half = static_cast<std::ptrdiff_t>(nfft / 2);
    for (std::size_t k = 0; k < nfft; ++k)
        f[k] = static_cast<double>(static_cast<std::ptrdiff_t>(k) - half) * sample_rate_hz / static_cast<double>(nfft);
    return f;
}

} // namespace sptw::iqcore
