#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace hybridmem {

/// Counter-based generator: draw n of stream s under key k is
/// splitmix64_finalize(k ^ splitmix64_finalize(s) + n * 0x9e3779b97f4a7c15).
///
/// Every output is a pure function of (key, stream, counter), so fixtures are
/// reproducible across platforms and languages. Normal variates use the
/// Box-Muller cosine branch and consume two uniforms each.
class CounterRng {
public:
    CounterRng(std::uint64_t key, std::uint64_t stream) : base_(key ^ finalize(stream ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        ++counter_;
        return finalize(base_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform on [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    double normal(double mean = 0.0, double sigma = 1.0) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace hybridmem
