#pragma once

#include <cmath>
#include <cstdint>

namespace fsfbm::rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based stream derivation: (seed, replica, component) -> key.
// Every consumer derives its own stream, so results never depend on the
// order in which streams are drawn from.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t replica,
                                std::uint64_t component) {
  std::uint64_t k = mix64(seed + 0x9E3779B97F4A7C15ULL);
  k = mix64(k ^ ((replica + 1) * 0xA0761D6478BD642FULL));
  k = mix64(k ^ ((component + 1) * 0xE7037ED1A0B428DBULL));
  return k;
}

// SplitMix64 sequence with a Box-Muller Gaussian on top. Fully deterministic
// for a given key: no implementation-defined distributions involved.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // uniform on (0, 1]
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace fsfbm::rng
