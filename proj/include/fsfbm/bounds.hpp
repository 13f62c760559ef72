#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsfbm/hurst.hpp"

#include "json.hpp"

namespace fsfbm::bounds {

enum class FormulaId {
  single_time,
  bernstein,
  variant1,
  variant2,
  nonlinear_variant1,
  md_general,
  md_symmetric,
};

std::string formula_name(FormulaId id);
FormulaId formula_from_name(const std::string& name);

struct BoundInputs {
  double t = 0.0;
  double h = 0.0;
  double sigma = 0.0;
  double eps = 0.0;
  double hurst = 0.0;          // plain value; only ratios/powers are used here
  double alpha_t = 0.0;        // |alpha(t)| for the 1-D uniform-in-time bounds
  double a_plus = 0.0;         // max |eigenvalue| (symmetric multi-D)
  std::size_t m = 1;           // dimension
  double f_plus = 0.0;         // sup F
  double a_low = 0.0;          // stability margin
  double big_m = 0.0;          // Taylor remainder constant
  double zeta_plus = 0.0;
  double zeta_minus = 0.0;
  std::optional<double> k_const;             // required for variant 2 / md_general
  std::vector<double> lambda_weights;        // simplex weights, default 1/m each
  bool md_alt_prefactor = false;             // alternative prefactor reading

  nlohmann::json to_json() const;
};

struct BoundReport {
  FormulaId formula_id = FormulaId::single_time;
  double value = 0.0;
  bool vacuous = false;  // value >= 1: the estimate carries no information
  std::vector<std::string> dropped_terms;
  BoundInputs inputs;

  nlohmann::json to_json() const;
};

/// P(|xi_t| / sqrt(zeta(t)) >= h) <= exp(-h^2 / (2 sigma^2)).
BoundReport single_time_bound(double h, double sigma);

/// P(tau_c < t) <= exp(-c^2 / (2 Var(Y_t))).
BoundReport bernstein_exit_bound(double c, double var_t);

/// Uniform-in-time bound 2e ceil((|alpha(t)|/eps)(h^2/sigma^2)) exp(-h^2/(2 sigma^2)).
BoundReport variant1_bound(const BoundInputs& in);

/// Hoelder-route bound K t h^{1/H} (F+^2 H Gamma(2H) / a^{2H})^{1/(2H)} exp(-h^2/(2 sigma^2)).
BoundReport variant2_bound(const BoundInputs& in);

/// Nonlinear version of variant 1 with kappa = 1 - 2 M h zeta+ / (a sqrt(zeta-)).
BoundReport nonlinear_variant1_bound(const BoundInputs& in);

/// Multi-dimensional bound sum_k K t (sqrt(lambda_k h) d*_k)^{1/H} exp(-lambda_k h^2/(2 sigma^2)).
BoundReport md_general_bound(const BoundInputs& in, const std::vector<double>& d_star);

/// Symmetric-linearization bound 2e ceil((a+ t/eps)(h^2/sigma^2)) exp(-h^2/(2 sigma^2 m)).
BoundReport md_symmetric_bound(const BoundInputs& in);

}  // namespace fsfbm::bounds
