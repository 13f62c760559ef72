#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fsfbm::stats {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Wichura AS 241 (PPND16): inverse standard normal CDF, ~1e-15 accurate.
inline double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("normal_quantile: p must be in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

// Score interval; informative even at zero successes.
inline WilsonInterval wilson_interval(std::size_t successes, std::size_t n,
                                      double ci_level) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be > 0");
  if (!(ci_level > 0.0) || !(ci_level < 1.0))
    throw std::invalid_argument("wilson_interval: ci_level must be in (0,1)");
  const double z = normal_quantile(0.5 + ci_level / 2.0);
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (phat + z * z / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;  // reject equality when statistic > threshold
  bool reject = false;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic critical value
// c(alpha) sqrt((n+m)/(n m)), c(alpha) = sqrt(-ln(alpha/2)/2).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double alpha) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) throw std::invalid_argument("ks_two_sample: empty sample");
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(n);
    const double fb = static_cast<double>(j) / static_cast<double>(m);
    d = std::max(d, std::abs(fa - fb));
  }
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  const double thr = c * std::sqrt(static_cast<double>(n + m) /
                                   (static_cast<double>(n) * static_cast<double>(m)));
  return {d, thr, d > thr};
}

struct AdResult {
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
};

// Anderson-Darling against the fully specified N(0,1). Critical values for
// the known-parameter case: 3.857 at the 1% level, 2.492 at 5%.
inline AdResult anderson_darling_standard_normal(std::vector<double> z, double alpha) {
  std::sort(z.begin(), z.end());
  const std::size_t n = z.size();
  if (n == 0) throw std::invalid_argument("anderson_darling: empty sample");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = normal_cdf(z[i]);
    const double fr = normal_cdf(z[n - 1 - i]);
    const double lo = std::clamp(fi, 1e-300, 1.0 - 1e-16);
    const double hi = std::clamp(1.0 - fr, 1e-300, 1.0 - 1e-16);
    s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log(hi));
  }
  const double a2 = -static_cast<double>(n) - s / static_cast<double>(n);
  double thr;
  if (alpha <= 0.01)
    thr = 3.857;
  else if (alpha <= 0.025)
    thr = 3.070;
  else if (alpha <= 0.05)
    thr = 2.492;
  else
    thr = 1.933;
  return {a2, thr, a2 > thr};
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace fsfbm::stats
