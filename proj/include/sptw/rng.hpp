// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sptw {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a list of integer labels.
/// Used to give every parallel unit of work a disjoint, reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept
{
    std::uint64_t h = mix64(seed);
    for (auto v : labels) h = mix64(h ^ mix64(v));
    return h;
}

} // namespace sptw
