#pragma once

#include <cstdint>
#include <random>

namespace genoseq {

/// Seeded random source used everywhere a stochastic choice is made.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent child seeds so that
/// per-example randomness does not depend on thread placement.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng{mix_seed(seed, stream)};
}

}  // namespace genoseq
