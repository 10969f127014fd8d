#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. 2011).
//
// A stream is identified by (seed, channel, purpose); the n-th draw of a
// stream is a pure function of those keys and n, so streams can be evaluated
// in any order on any thread.
//
// Layout: key = seed (low word, high word); counter = (block low, block high,
// channel, purpose). Each 128-bit block yields two doubles in (0, 1) and,
// through the Box-Muller transform, two standard normals.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qtraj {

class Philox4x32 {
 public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

 private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

enum class StreamPurpose : std::uint32_t {
    kBrownian = 0,
    kJump = 1,
};

/// 53-bit uniform strictly inside (0, 1).
inline double uniform_open01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Sequential reader over one counter-based stream.
class RandomStream {
 public:
    RandomStream(std::uint64_t seed, std::uint32_t channel, StreamPurpose purpose = StreamPurpose::kBrownian)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          channel_(channel),
          purpose_(static_cast<std::uint32_t>(purpose)) {}

    /// Next pair of 64-bit words; advances the block counter by one.
    std::array<std::uint64_t, 2> next_block() {
        const Philox4x32::Counter out = Philox4x32::block(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), channel_, purpose_},
            key_);
        ++block_;
        return {(static_cast<std::uint64_t>(out[0]) << 32) | out[1],
                (static_cast<std::uint64_t>(out[2]) << 32) | out[3]};
    }

    double uniform() {
        if (!have_uniform_) {
            const auto words = next_block();
            cached_uniform_ = uniform_open01(words[1]);
            have_uniform_ = true;
            return uniform_open01(words[0]);
        }
        have_uniform_ = false;
        return cached_uniform_;
    }

    /// Standard normal via Box-Muller on one block.
    double normal() {
        if (have_normal_) {
            have_normal_ = false;
            return cached_normal_;
        }
        const auto words = next_block();
        const double u1 = uniform_open01(words[0]);
        const double u2 = uniform_open01(words[1]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_normal_ = r * std::sin(angle);
        have_normal_ = true;
        return r * std::cos(angle);
    }

    /// Exponential variate with the given rate (> 0).
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    std::uint64_t blocks_consumed() const { return block_; }

 private:
    Philox4x32::Key key_;
    std::uint32_t channel_;
    std::uint32_t purpose_;
    std::uint64_t block_ = 0;
    double cached_normal_ = 0.0;
    double cached_uniform_ = 0.0;
    bool have_normal_ = false;
    bool have_uniform_ = false;
};

}  // namespace qtraj
