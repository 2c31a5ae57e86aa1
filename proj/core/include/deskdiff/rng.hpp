// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace deskdiff {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and one or more
// indices (sample index, purpose tag, ...). Order-sensitive.
template <typename... Ids>
std::uint64_t derive_seed(std::uint64_t base, Ids... ids) {
    std::uint64_t s = splitmix64(base);
    ((s = splitmix64(s ^ static_cast<std::uint64_t>(ids))), ...);
    return s;
}

// Stream tags used with derive_seed so that independent consumers of a
// single user-facing seed never share draws.
namespace seed_tag {
inline constexpr std::uint64_t kMask = 0x6d61736bULL;    // "mask"
inline constexpr std::uint64_t kDecode = 0x6465636fULL;  // "deco"
inline constexpr std::uint64_t kNoise = 0x6e6f6973ULL;   // "nois"
}  // namespace seed_tag

// Deterministic generator with explicit normal/uniform draw algorithms.
// std::normal_distribution is implementation-defined, so Box-Muller is
// spelled out here to keep byte-identical reruns a portable contract.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), rejection sampled.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    // Standard normal via Box-Muller; second value of each pair is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    float normal_f() { return static_cast<float>(normal()); }

  private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace deskdiff
