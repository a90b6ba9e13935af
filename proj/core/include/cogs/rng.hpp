// rng.hpp - splittable deterministic random number generator
#pragma once

#include <cstdint>

namespace cogs {

/// SplitMix64 stream. Every stochastic component takes an Rng (or a split of
/// one) explicitly; there is no global random state. The same seed produces
/// the same sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (two uniforms per draw, no caching).
    double normal();

    /// Uniform integer in [0, n). Requires n > 0.
    std::int64_t uniform_int(std::int64_t n);

    /// Derive an independent child stream; advances this stream by one draw.
    Rng split();

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

private:
    std::uint64_t state_;
};

}  // namespace cogs
