#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bivex {

/// Philox-4x32-10 counter-based generator. A value is a pure function of
/// (key, counter), so any (trial, draw) position can be generated without
/// sequencing through the stream. This is what makes Monte Carlo results
/// independent of how trials are partitioned across workers.
namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

}  // namespace philox

/// One substream of the counter-based generator, addressed by (seed, stream).
/// Stream t of a given seed is statistically independent of stream t' != t;
/// estimators assign one stream per trial.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    /// 64-bit draw at the current position; advances the position.
    std::uint64_t next_u64() {
        std::uint32_t idx = static_cast<std::uint32_t>(pos_ & 1);
        if (idx == 0) {
            std::array<std::uint32_t, 4> ctr = {
                static_cast<std::uint32_t>(pos_ >> 1),
                static_cast<std::uint32_t>(pos_ >> 33),
                static_cast<std::uint32_t>(stream_),
                static_cast<std::uint32_t>(stream_ >> 32)};
            cached_ = philox::block(ctr, key_);
        }
        ++pos_;
        return static_cast<std::uint64_t>(cached_[2 * idx]) |
               (static_cast<std::uint64_t>(cached_[2 * idx + 1]) << 32);
    }

    /// Uniform draw in the open interval (0, 1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// One Box-Muller pair of independent standard normals (two uniforms).
    std::pair<double, double> next_normal_pair() {
        double u1 = next_uniform();
        double u2 = next_uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * M_PI * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    /// Single standard normal; consumes a full pair to keep stream positions
    /// independent of how results are used.
    double next_normal() { return next_normal_pair().first; }

    /// Uniform index in [0, n).
    std::uint64_t next_index(std::uint64_t n) {
        std::uint64_t i = static_cast<std::uint64_t>(next_uniform() * static_cast<double>(n));
        return i >= n ? n - 1 : i;
    }

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t pos_ = 0;
    std::array<std::uint32_t, 4> cached_{};
};

}  // namespace bivex
