#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "fsfbm/errors.hpp"

namespace fsfbm::quad {

// Gauss-Kronrod 7-15 pair on [-1, 1].
inline constexpr double kKronrodNodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double kKronrodWeights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double kGaussWeights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename Fn>
Panel gk15(const Fn& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double k = 0.0, g = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fx = f(c + h * kKronrodNodes[i]);
    k += kKronrodWeights[i] * fx;
    if (i % 2 == 1) g += kGaussWeights[i / 2] * fx;
  }
  const double value = k * h;
  const double err = std::abs((k - g) * h);
  // standard Kronrod error sharpening
  const double scaled = err == 0.0 ? 0.0 : std::min(err, std::pow(200.0 * err, 1.5));
  return {a, b, value, scaled};
}

struct Options {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  std::size_t max_panels = 20000;
  std::vector<double> breakpoints;  // interior initial subdivision points
};

// Adaptive integration of f over [a, b]. Throws QuadratureError when the
// panel budget is exhausted before the tolerance is met.
template <typename Fn>
double integrate(const Fn& f, double a, double b, const Options& opt = {}) {
  if (a == b) return 0.0;
  std::vector<double> cuts{a, b};
  for (double c : opt.breakpoints)
    if (c > std::min(a, b) && c < std::max(a, b)) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  if (a > b) std::reverse(cuts.begin(), cuts.end());

  std::priority_queue<Panel> heap;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = gk15(f, cuts[i], cuts[i + 1]);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  std::size_t panels = heap.size();
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (panels >= opt.max_panels || heap.empty())
      throw QuadratureError("adaptive quadrature: panel budget exhausted", total,
                            total_err);
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) continue;  // not splittable at this width
    Panel l = gk15(f, worst.a, mid);
    Panel r = gk15(f, mid, worst.b);
    total += l.value + r.value - worst.value;
    total_err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++panels;
  }
  return total;
}

}  // namespace fsfbm::quad
