#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace rsu {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr auto mix64(std::uint64_t x) noexcept -> std::uint64_t
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

/// Folds a sequence of keys into one 64-bit seed. Order matters.
constexpr auto derive_seed(std::initializer_list<std::uint64_t> keys) noexcept -> std::uint64_t
{
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto k : keys) {
        h = mix64(h ^ mix64(k));
    }
    return h;
}

inline auto make_stream(std::initializer_list<std::uint64_t> keys) -> Rng
{
    return Rng{derive_seed(keys)};
}

// Uniform double in [0, 1) from the top 53 bits of a hash.
constexpr auto unit_from_bits(std::uint64_t bits) noexcept -> double
{
    return static_cast<double>(bits >> 11U) * 0x1.0p-53;
}

/// Standard normal sample that is a pure function of the key (Box-Muller on two hashed uniforms).
inline auto keyed_standard_normal(std::uint64_t key) noexcept -> double
{
    auto const h1 = mix64(key);
    auto const h2 = mix64(h1 ^ 0x5851f42d4c957f2dULL);
    double const u1 = 1.0 - unit_from_bits(h1); // (0, 1]
    double const u2 = unit_from_bits(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace rsu
