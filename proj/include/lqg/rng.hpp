#pragma once

// Counter-based random streams for reproducible, order-independent Monte Carlo.
//
// Generator id: "splitmix64-counter-v1".
//
// The construction is pinned bit-exactly so that any implementation can
// reproduce a run from (master_seed, stream plan):
//
//   mix(z):    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//              z ^= z >> 27;  z *= 0x94D049BB133111EB
//              z ^= z >> 31
//   GOLDEN  =  0x9E3779B97F4A7C15
//   key(master_seed, stream_id) = mix(master_seed + GOLDEN * (stream_id + 1))
//   u64 output at counter i     = mix(key + GOLDEN * (i + 1))
//   child stream of tag t       = key' = mix(key ^ mix(t + GOLDEN))
//
// Each output is a pure function of (key, counter): streams can be consumed
// in any order and in parallel chunks without affecting the values drawn.
// uniform() maps to the open interval (0,1); normals use Box-Muller on
// counters (2i, 2i+1) so one Gaussian consumes a fixed counter budget.

#include <cstdint>
#include <cmath>
#include <string_view>

namespace lqg {

inline constexpr std::uint64_t kRngGolden = 0x9E3779B97F4A7C15ull;
inline constexpr std::string_view kRngGeneratorId = "splitmix64-counter-v1";

constexpr std::uint64_t rng_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

class RngStream {
 public:
  RngStream() : key_(rng_mix(kRngGolden)) {}
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : key_(rng_mix(master_seed + kRngGolden * (stream_id + 1))) {}

  // Value semantics; a stream is just its key.
  std::uint64_t key() const { return key_; }

  std::uint64_t u64(std::uint64_t counter) const {
    return rng_mix(key_ + kRngGolden * (counter + 1));
  }

  // Uniform on the open interval (0,1).
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(u64(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal from counters (2i, 2i+1).
  double normal(std::uint64_t i) const {
    const double u1 = uniform(2 * i);
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Independent child stream; tags must be distinct per use site.
  RngStream substream(std::uint64_t tag) const {
    RngStream s;
    s.key_ = rng_mix(key_ ^ rng_mix(tag + kRngGolden));
    return s;
  }

 private:
  std::uint64_t key_;
};

// Stateful view over a stream: draws consume consecutive counters.
class RngSequence {
 public:
  explicit RngSequence(RngStream s) : s_(s) {}
  std::uint64_t u64() { return s_.u64(c_++); }
  double uniform() { return s_.uniform(c_++); }
  double normal() {
    const double u1 = s_.uniform(c_++);
    const double u2 = s_.uniform(c_++);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }
  std::uint64_t consumed() const { return c_; }

 private:
  RngStream s_;
  std::uint64_t c_ = 0;
};

}  // namespace lqg
