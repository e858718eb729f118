#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fsep {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

/// Domain error for every precondition and runtime failure in the toolkit.
/// Messages carry the offending quantity so batch logs are self-explanatory.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw Error(msg);
    }
}

/// splitmix64 step; used to derive independent sub-stream seeds from one
/// master seed so that every random draw is reproducible by (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic uniform generator. std::uniform_real_distribution is
/// implementation-defined, so draws are built from raw 53-bit mantissas.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed == 0 ? 0x853c49e6748fea9bULL : seed) {}

    std::uint64_t next_u64() {
        // xorshift64* — small, fast, and stable across platforms
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    /// uniform in [0, 1)
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// uniform angle in [0, 2*pi)
    double angle() { return kTwoPi * unit(); }

    /// uniform integer in [0, n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(unit() * static_cast<double>(n)); }

private:
    std::uint64_t state_;
};

}  // namespace fsep
