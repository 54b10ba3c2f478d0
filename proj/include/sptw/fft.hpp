// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sptw::fft {

using cd = std::complex<double>;

/// Unnormalized forward DFT: X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
std::vector<cd> forward(std::span<const cd> x);

/// Unnormalized inverse DFT: x[n] = sum_k X[k] e^{+j 2 pi k n / N}. Caller divides by N.
std::vector<cd> inverse(std::span<const cd> x);

/// Swaps halves so that DC lands at index N/2 (N even) or (N-1)/2 (N odd).
template <class T>
std::vector<T> shift(std::span<const T> x)
{
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[(i + half) % n] = x[i];
    return out;
}

std::size_t next_pow2(std::size_t n) noexcept;

} // namespace sptw::fft
