// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dmc::util {

/// SplitMix64 finalizer. Used to derive independent stream seeds from
/// (seed, index, ...) tuples so results never depend on evaluation order.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(seed);
    for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ull));
    return h;
}

using Engine = std::mt19937_64;

/// Standard circular complex Gaussian: E|w|^2 = 1.
inline std::complex<double> complex_normal(Engine& eng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = n(eng);
    const double im = n(eng);
    return {re * M_SQRT1_2, im * M_SQRT1_2};
}

/// Fills `n` standard circular complex Gaussians from one distribution
/// object, so both halves of each polar draw are used.
inline void fill_complex_normal(Engine& eng, std::complex<double>* out, std::size_t n) {
    std::normal_distribution<double> d(0.0, M_SQRT1_2);
    for (std::size_t i = 0; i < n; ++i) {
        const double re = d(eng);
        out[i] = {re, d(eng)};
    }
}

inline double log_uniform(Engine& eng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(eng));
}

}  // namespace dmc::util
