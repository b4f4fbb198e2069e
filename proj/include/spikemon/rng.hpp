#pragma once

#include <cstdint>

namespace spikemon::rng {

/// splitmix64 finalizer: a fixed bijective mixer on 64-bit words.
/// Used to derive independent stream keys from structured inputs.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic random substream: xoshiro256++ keyed by (seed, stream_id).
///
/// Identical keys give the identical sequence on every platform, compiler
/// and thread schedule; distinct keys give statistically independent
/// streams. All distribution transforms are hand-rolled so the mapping
/// from key to sample sequence is part of the library contract, not the
/// standard library's.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1), 53-bit resolution.
    double next_double() noexcept;

    /// Uniform on (0, 1): never returns exactly 0.
    double next_open01() noexcept;

    /// Uniform on [lo, hi); requires lo < hi.
    double next_uniform(double lo, double hi) noexcept;

    /// Standard normal via the Marsaglia polar method (pairs are cached).
    double next_normal() noexcept;

    /// Beta(2, 4) via two log-sum Gamma draws.
    double next_beta24() noexcept;

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace spikemon::rng
