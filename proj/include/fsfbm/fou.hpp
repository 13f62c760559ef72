#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fsfbm/hurst.hpp"
#include "fsfbm/time_grid.hpp"

namespace fsfbm::fou {

// Coefficients of the linear fast equation
//   d xi = (1/eps) a(t) xi dt + (sigma/eps^H) F(t) dW^H,
// with a(t) <= -a_low < 0 and F(t) > 0 on the working interval.
struct LinearCoeffs {
  std::function<double(double)> a;
  std::function<double(double)> f_amp;
  double a_low = 0.0;  // declared stability margin, a(t) <= -a_low
  double eps = 0.0;
  double sigma = 0.0;
  HurstIndex hurst = HurstIndex::brownian_limit();
  // set when a and F are constant; enables the reduced one-dimensional
  // covariance integral
  std::optional<double> const_a;
  std::optional<double> const_f;

  static LinearCoeffs constant(double a_value, double f_value, double eps,
                               double sigma, const HurstIndex& h);
  static LinearCoeffs varying(std::function<double(double)> a_fn,
                              std::function<double(double)> f_fn, double a_low,
                              double eps, double sigma, const HurstIndex& h);
  bool is_constant() const { return const_a.has_value() && const_f.has_value(); }
};

// alpha(t, u) = integral of a over [u, t]; alpha(t, t) = 0 and
// alpha(t, u) = alpha(t, s) + alpha(s, u).
class AlphaIntegral {
 public:
  static AlphaIntegral from_constant(double a_value);
  static AlphaIntegral from_analytic(std::function<double(double, double)> alpha);
  static AlphaIntegral from_function(std::function<double(double)> a_fn,
                                     double rel_tol = 1e-12);

  double operator()(double t, double u) const;

 private:
  std::function<double(double, double)> alpha_;
};

/// Var(xi_t) for the process started at xi_0 = 0, by singularity-splitting
/// quadrature of the double Wiener-integral representation.
double variance(double t, const LinearCoeffs& c, const AlphaIntegral& alpha,
                double rel_tol = 1e-7);

/// Cov(xi_t1, xi_t2); symmetric, reduces to variance on the diagonal.
double covariance(double t1, double t2, const LinearCoeffs& c,
                  const AlphaIntegral& alpha, double rel_tol = 1e-7);

// Exact finite-dimensional sampling: Cholesky of the Gram matrix
// [Cov(t_i, t_j)] on grids of at most 2048 nodes.
struct ExactSampleResult {
  std::vector<double> times;
  std::vector<std::vector<double>> paths;  // one vector per replica
};

ExactSampleResult sample_exact(const TimeGrid& grid, const LinearCoeffs& c,
                               const AlphaIntegral& alpha, std::uint64_t seed,
                               std::size_t replicas, double quad_rel_tol = 1e-6);

// Dense solution of the renormalized-variance integro-ODE
//   eps w'(t) = 2 a(t) w(t) + 2 F(t) H(2H-1) * memory(t),
// stepped with the substituted memory integral. Queries interpolate linearly.
class OdeSolution {
 public:
  OdeSolution(std::vector<double> times, std::vector<double> values,
              double truncation_bound);
  double operator()(double t) const;
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  double truncation_bound() const { return truncation_bound_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  double truncation_bound_;
};

struct OdeOptions {
  double step_fraction = 0.1;     // step = step_fraction * eps / a_low
  double memory_rel_tol = 1e-9;
  double tail_cutoff = 40.0;      // memory integral truncated at tail_cutoff/a_low
};

OdeSolution variance_ode_solve(const LinearCoeffs& c, const AlphaIntegral& alpha,
                               double t_end, double w0,
                               const OdeOptions& opt = {});

// Comparison of Var(xi_t) with sigma^2 (zeta(t) - e^{2 alpha(t)/eps} zeta(0)).
struct RelationReport {
  double time = 0.0;
  double variance_quadrature = 0.0;
  double relation_rhs = 0.0;
  double abs_discrepancy = 0.0;
  double rel_discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

RelationReport check_variance_relation(const LinearCoeffs& c,
                                       const AlphaIntegral& alpha,
                                       const std::function<double(double)>& zeta,
                                       double t, double rel_tol);

}  // namespace fsfbm::fou
