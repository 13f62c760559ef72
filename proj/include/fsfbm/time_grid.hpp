#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fsfbm {

// Uniform grid t0, t0+dt, ..., t0+n*dt (n+1 nodes).
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t n = 0;

  TimeGrid() = default;
  TimeGrid(double t0, double dt, std::size_t n) : t0(t0), dt(dt), n(n) {
    if (t0 < 0.0) throw std::invalid_argument("TimeGrid: t0 must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    if (n < 1) throw std::invalid_argument("TimeGrid: n must be >= 1");
  }

  double node(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double t_end() const { return node(n); }

  std::vector<double> nodes() const {
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out[i] = node(i);
    return out;
  }
};

}  // namespace fsfbm
