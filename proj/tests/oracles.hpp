// Independent oracles used by the tests. Each one evaluates a defining
// integral or series directly, without going through the library's
// singularity-substitution code paths.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracles {

// Adaptive Simpson, plain and independent of the library quadrature.
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb, double whole,
                          double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-10, int depth = 40) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Pre-split variant for integrands whose support the coarse rule would miss.
inline double simpson_panels(const std::function<double(double)>& f,
                             const std::vector<double>& cuts, double tol = 1e-11) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    acc += simpson(f, cuts[i], cuts[i + 1], tol);
  return acc;
}

// H(2H-1) * iint_{[0,t] x [0,s]} |v-u|^{2H-2} dv du with the inner integral
// done by the exact power antiderivative and the outer one adaptively.
inline double fbm_cov_double_integral(double t, double s, double H) {
  const double p = 2.0 * H - 1.0;
  auto inner = [&](double u) {
    // integral over v in [0, s] of |v-u|^{2H-2} dv
    if (u <= 0.0) return (std::pow(s - u, p) - std::pow(-u, p)) / p;
    if (u >= s) return (std::pow(u, p) - std::pow(u - s, p)) / p;
    return (std::pow(u, p) + std::pow(s - u, p)) / p;
  };
  return H * p * simpson(inner, 0.0, t, 1e-12);
}

// Midpoint Riemann sum of the fractional OU covariance double integral on an
// n x n grid; the midpoint rule never touches the diagonal singularity. The
// kernel blow-up caps its accuracy at O(n^{1-2H}).
inline double fou_cov_riemann(double t1, double t2, double a, double f, double eps,
                              double sigma, double H, std::size_t n) {
  const double du = t1 / static_cast<double>(n);
  const double dv = t2 / static_cast<double>(n);
  const double coeff = H * (2.0 * H - 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) * du;
    const double eu = std::exp(a * (t1 - u) / eps) * f;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = (static_cast<double>(j) + 0.5) * dv;
      acc += eu * std::exp(a * (t2 - v) / eps) * f * coeff *
             std::pow(std::abs(u - v), 2.0 * H - 2.0);
    }
  }
  return sigma * sigma / std::pow(eps, 2.0 * H) * acc * du * dv;
}

// Product-midpoint rule: smooth factor frozen at cell midpoints, kernel mass
// integrated exactly per cell via its second antiderivative
// K(s) = |s|^{2H} / (2H (2H-1)). Second order despite the diagonal.
inline double fou_cov_product_midpoint(double t1, double t2, double a, double f,
                                       double eps, double sigma, double H,
                                       std::size_t n) {
  const double du = t1 / static_cast<double>(n);
  const double dv = t2 / static_cast<double>(n);
  const double twoH = 2.0 * H;
  auto K = [&](double s) { return std::pow(std::abs(s), twoH) / (twoH * (twoH - 1.0)); };
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u0 = static_cast<double>(i) * du, u1 = u0 + du;
    const double gu = std::exp(a * (t1 - (u0 + 0.5 * du)) / eps) * f;
    for (std::size_t j = 0; j < n; ++j) {
      const double v0 = static_cast<double>(j) * dv, v1 = v0 + dv;
      const double gv = std::exp(a * (t2 - (v0 + 0.5 * dv)) / eps) * f;
      const double mass = K(u1 - v0) - K(u1 - v1) - K(u0 - v0) + K(u0 - v1);
      acc += gu * gv * mass;
    }
  }
  return sigma * sigma / std::pow(eps, twoH) * H * (twoH - 1.0) * acc;
}

// Stirling series with correction terms; independent of the Lanczos form.
inline double gamma_stirling(double x) {
  double shift = 1.0;
  while (x < 12.0) {
    shift *= x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  // asymptotic series in 1/x
  const double series = 1.0 + inv / 12.0 + inv * inv / 288.0 -
                        139.0 * inv * inv * inv / 51840.0 -
                        571.0 * inv * inv * inv * inv / 2488320.0 +
                        163879.0 * std::pow(inv, 5) / 209018880.0 +
                        5246819.0 * std::pow(inv, 6) / 75246796800.0;
  const double g =
      std::sqrt(2.0 * M_PI / x) * std::pow(x / M_E, x) * series;
  return g / shift;
}

}  // namespace oracles
