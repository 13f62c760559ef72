#pragma once

#include <stdexcept>

namespace fsfbm {

// Hurst index restricted to (1/2, 1). H = 1/2 is representable only through
// the explicit brownian_limit() constructor; downstream code switches to the
// uncorrelated-increment formulas in that mode.
class HurstIndex {
 public:
  static HurstIndex checked(double value) {
    if (!(value > 0.5) || !(value < 1.0))
      throw std::domain_error("Hurst index must lie in (0.5, 1); got " + std::to_string(value));
    return HurstIndex(value, false);
  }

  static HurstIndex brownian_limit() { return HurstIndex(0.5, true); }

  double value() const { return value_; }
  bool is_brownian_limit() const { return brownian_; }

  friend bool operator==(const HurstIndex& a, const HurstIndex& b) {
    return a.value_ == b.value_ && a.brownian_ == b.brownian_;
  }

 private:
  HurstIndex(double v, double b) : value_(v), brownian_(b) {}
  double value_;
  bool brownian_;
};

}  // namespace fsfbm
