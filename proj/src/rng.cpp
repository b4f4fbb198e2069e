#include "spikemon/rng.hpp"

#include <cmath>

namespace spikemon::rng {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept {
    // Expand the key through the splitmix64 chain; the xoshiro state must
    // not be all zero, which mix64 of a varying counter cannot produce for
    // all four words at once.
    std::uint64_t z = seed;
    s_[0] = mix64(z += 0x9E3779B97F4A7C15ull ^ stream_id);
    s_[1] = mix64(z += 0x9E3779B97F4A7C15ull);
    s_[2] = mix64(z += 0x9E3779B97F4A7C15ull ^ rotl(stream_id, 32));
    s_[3] = mix64(z += 0x9E3779B97F4A7C15ull);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 0x1ull;
}

std::uint64_t Stream::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Stream::next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::next_open01() noexcept {
    // (u + 1) / 2^53 lies in (0, 1]; reflect to [2^-53, 1) ... simpler:
    // reject the single value 0, which costs one extra draw every 2^53 calls.
    for (;;) {
        const double u = next_double();
        if (u > 0.0) return u;
    }
}

double Stream::next_uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * next_double();
}

double Stream::next_normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar: draw (v1, v2) uniform on (-1,1)^2 until inside the
    // unit disc, then scale by sqrt(-2 ln s / s).
    for (;;) {
        const double v1 = 2.0 * next_double() - 1.0;
        const double v2 = 2.0 * next_double() - 1.0;
        const double s = v1 * v1 + v2 * v2;
        if (s >= 1.0 || s == 0.0) continue;
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v2 * f;
        has_spare_ = true;
        return v1 * f;
    }
}

double Stream::next_beta24() noexcept {
    // Gamma(k) for integer k is a sum of k exponentials: -ln(u1 ... uk).
    const double g2 = -std::log(next_open01() * next_open01());
    const double g4 = -std::log(next_open01() * next_open01() * next_open01() * next_open01());
    return g2 / (g2 + g4);
}

}  // namespace spikemon::rng
