#pragma once

#include <cstdint>
#include <random>

namespace svmpso {

/// splitmix64 finalizer; used to derive independent sub-run seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// mt19937_64 with hand-mapped draws. The engine output is defined by the
/// standard and the mappings below avoid std::uniform_real_distribution,
/// whose results are implementation-defined, so one seed gives one draw
/// sequence everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform on (0,1), both endpoints excluded.
    double open01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + static_cast<double>(next() >> 11) * 0x1.0p-53 * (hi - lo);
    }

    /// Uniform index in [0, n). Modulo bias is ~n/2^64, irrelevant here.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

private:
    std::mt19937_64 eng_;
};

}  // namespace svmpso
