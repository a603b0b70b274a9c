#pragma once

#include <cstdint>
#include <cmath>

namespace holdermc {

// Identifies one reproducible stream of draws. Equal (seed, stream_id)
// always reproduce the same sequence, bit for bit.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator in the SplitMix64 family. Each stream gets its
// own odd increment derived from stream_id, so distinct streams walk
// distinct full-period orbits; no seed arithmetic can make them collide.
class CounterRng {
 public:
  explicit CounterRng(RngStream s)
      : state_(detail::mix64(s.seed ^ detail::mix64(s.stream_id))),
        gamma_(detail::mix64(detail::mix64(s.stream_id) ^ 0xd1b54a32d192ed03ULL) | 1ULL) {}

  std::uint64_t next_u64() {
    state_ += gamma_;
    return detail::mix64(state_);
  }

  // uniform on [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]; safe under log()
  double next_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  bool next_sign_bit() { return (next_u64() >> 63) != 0; }

  // standard normal via Box-Muller, second value cached
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(next_open()));
    const double theta = 6.283185307179586476925286766559 * next_double();
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    cached_ = r * s;
    have_cached_ = true;
    return r * c;
  }

 private:
  std::uint64_t state_;
  std::uint64_t gamma_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Substream for draw index j of a tagged arm within one experiment.
// Deriving streams per draw index keeps results invariant under sharding.
inline RngStream substream(std::uint64_t seed, std::uint64_t arm_tag, std::uint64_t draw_index) {
  return RngStream{seed, (arm_tag << 32) ^ draw_index ^ (arm_tag << 56)};
}

}  // namespace holdermc
