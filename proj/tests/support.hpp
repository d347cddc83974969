// Shared helpers for the unit tests: a seeded sample generator and tolerant
// comparisons.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hyperbat/params.hpp"

namespace testing {

// splitmix64; deterministic across platforms
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * (double(next() >> 11) * 0x1.0p-53); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    hyperbat::BatteryParams params() {
        hyperbat::BatteryParams p;
        p.omega_b = log_uniform(0.1, 10.0);
        p.gamma = log_uniform(0.1, 10.0);
        p.g = p.gamma * log_uniform(0.02, 20.0);
        p.Omega = uniform(0.0, 2.5);
        return p;
    }

private:
    std::uint64_t state_;
};

inline double rel_diff(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1);
    return v;
}

} // namespace testing
