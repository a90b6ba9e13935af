#include "cogs/rng.hpp"

#include <cmath>

#include "cogs/common.hpp"

namespace cogs {

std::uint64_t Rng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    // Box-Muller; u1 kept away from 0 so the log stays finite.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::int64_t Rng::uniform_int(std::int64_t n) {
    if (n <= 0) throw value_error("Rng::uniform_int: n must be positive");
    return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
}

Rng Rng::split() {
    return Rng(next_u64() ^ 0x5851f42d4c957f2dull);
}

}  // namespace cogs
