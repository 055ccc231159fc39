#pragma once

#include <cmath>
#include <cstdint>

namespace evcond {

/// Counter-based random stream. Every (seed, stream) pair yields its own
/// reproducible sequence, independent of thread scheduling, so replicate r
/// of a Monte-Carlo run can always be regenerated from (seed, r).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(mix(seed ^ 0x8f1bbcdcbfa53e0bULL) + stream * kGamma)) {}

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform on (0, 1].
    double next_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform on (0, 1), both endpoints excluded.
    double next_unit_open() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Standard normal via Box-Muller; the spare value is cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(next_unit()));
        const double a = 2.0 * kPi * next_unit();
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Unit exponential.
    double next_exp() { return -std::log(next_unit()); }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Fixed stream-id offsets so different consumers of one master seed never
/// overlap (replicates use the low range directly).
namespace stream_ids {
inline constexpr std::uint64_t replicate_base = 0;
inline constexpr std::uint64_t generator = std::uint64_t{1} << 40;
inline constexpr std::uint64_t sample_batch = std::uint64_t{2} << 40;
}  // namespace stream_ids

}  // namespace evcond
