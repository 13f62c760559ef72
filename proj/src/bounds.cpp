#include "fsfbm/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "fsfbm/errors.hpp"
#include "fsfbm/manifold.hpp"

namespace fsfbm::bounds {

namespace {
constexpr double kTwoE = 2.0 * 2.718281828459045235360287471352662498;

BoundReport finish(FormulaId id, double value, std::vector<std::string> dropped,
                   BoundInputs in) {
  BoundReport rep;
  rep.formula_id = id;
  rep.value = value;
  rep.vacuous = value >= 1.0;
  rep.dropped_terms = std::move(dropped);
  rep.inputs = std::move(in);
  return rep;
}
}  // namespace

std::string formula_name(FormulaId id) {
  switch (id) {
    case FormulaId::single_time: return "single_time";
    case FormulaId::bernstein: return "bernstein";
    case FormulaId::variant1: return "variant1";
    case FormulaId::variant2: return "variant2";
    case FormulaId::nonlinear_variant1: return "nonlinear_variant1";
    case FormulaId::md_general: return "md_general";
    case FormulaId::md_symmetric: return "md_symmetric";
  }
  throw std::logic_error("formula_name: bad id");
}

FormulaId formula_from_name(const std::string& name) {
  for (FormulaId id : {FormulaId::single_time, FormulaId::bernstein,
                       FormulaId::variant1, FormulaId::variant2,
                       FormulaId::nonlinear_variant1, FormulaId::md_general,
                       FormulaId::md_symmetric})
    if (formula_name(id) == name) return id;
  throw ConfigError("unknown bound formula: " + name);
}

BoundReport single_time_bound(double h, double sigma) {
  if (!(h > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("single_time_bound: h and sigma must be positive");
  BoundInputs in;
  in.h = h;
  in.sigma = sigma;
  return finish(FormulaId::single_time, std::exp(-h * h / (2.0 * sigma * sigma)), {},
                in);
}

BoundReport bernstein_exit_bound(double c, double var_t) {
  if (!(c > 0.0) || !(var_t > 0.0))
    throw std::invalid_argument("bernstein_exit_bound: c and variance must be positive");
  BoundInputs in;
  in.h = c;
  in.sigma = std::sqrt(var_t);
  return finish(FormulaId::bernstein, std::exp(-c * c / (2.0 * var_t)), {}, in);
}

BoundReport variant1_bound(const BoundInputs& in) {
  if (!(in.alpha_t > 0.0) || !(in.eps > 0.0) || !(in.h > 0.0) || !(in.sigma > 0.0))
    throw std::invalid_argument("variant1_bound: alpha_t, eps, h, sigma must be positive");
  const double ratio = in.h * in.h / (in.sigma * in.sigma);
  const double count = std::ceil(in.alpha_t / in.eps * ratio);
  const double value = kTwoE * count * std::exp(-ratio / 2.0);
  return finish(FormulaId::variant1, value, {"(1+O(eps)) factor set to 1"}, in);
}

BoundReport variant2_bound(const BoundInputs& in) {
  if (!in.k_const.has_value() || !(*in.k_const > 0.0))
    throw ConfigError(
        "variant2_bound: k_const is required (no theoretical default exists) and "
        "must be positive");
  if (!(in.f_plus > 0.0) || !(in.a_low > 0.0))
    throw std::invalid_argument("variant2_bound: f_plus and a_low must be positive");
  if (!(in.h >= 0.0) || !(in.sigma > 0.0) || !(in.t >= 0.0))
    throw std::invalid_argument("variant2_bound: bad h, sigma or t");
  const double H = in.hurst;
  const double hg = H * manifold::gamma_fn(2.0 * H);
  const double base =
      in.f_plus * in.f_plus * hg / std::pow(in.a_low, 2.0 * H);
  const double value = *in.k_const * in.t * std::pow(in.h, 1.0 / H) *
                       std::pow(base, 1.0 / (2.0 * H)) *
                       std::exp(-in.h * in.h / (2.0 * in.sigma * in.sigma));
  return finish(FormulaId::variant2, value,
                {"exp((h^2/2sigma^2)O(eps)) factor set to 1",
                 "O(eps) term inside the (.)^{1/(2H)} base dropped"},
                in);
}

BoundReport nonlinear_variant1_bound(const BoundInputs& in) {
  if (!(in.big_m >= 0.0))
    throw std::invalid_argument("nonlinear_variant1_bound: big_m must be >= 0");
  if (!(in.a_low > 0.0) || !(in.zeta_plus > 0.0) || !(in.zeta_minus > 0.0))
    throw std::invalid_argument(
        "nonlinear_variant1_bound: a_low, zeta_plus, zeta_minus must be positive");
  if (!(in.alpha_t > 0.0) || !(in.eps > 0.0) || !(in.h > 0.0) || !(in.sigma > 0.0))
    throw std::invalid_argument(
        "nonlinear_variant1_bound: alpha_t, eps, h, sigma must be positive");
  const double kappa =
      1.0 - 2.0 * in.big_m * in.h * in.zeta_plus / (in.a_low * std::sqrt(in.zeta_minus));
  if (!(kappa > 0.0))
    throw std::domain_error(
        "nonlinear_variant1_bound: h too large, kappa <= 0 (requires h < a "
        "sqrt(zeta-)/(2 M zeta+))");
  const double ratio = kappa * kappa * in.h * in.h / (in.sigma * in.sigma);
  const double count = std::ceil(in.alpha_t / in.eps * ratio);
  const double value = kTwoE * count * std::exp(-ratio / 2.0);
  return finish(FormulaId::nonlinear_variant1, value,
                {"(1+O(eps)) factor set to 1",
                 "kappa = 1 - 2 M h zeta+/(a sqrt(zeta-)) from the splitting "
                 "h1 = 2 M h^2 zeta+/(a sqrt(zeta-))"},
                in);
}

BoundReport md_general_bound(const BoundInputs& in,
                             const std::vector<double>& d_star) {
  if (!in.k_const.has_value() || !(*in.k_const > 0.0))
    throw ConfigError("md_general_bound: k_const is required and must be positive");
  if (d_star.size() != in.m || in.m == 0)
    throw std::invalid_argument("md_general_bound: d_star must have m entries");
  std::vector<double> lambda = in.lambda_weights;
  if (lambda.empty())
    lambda.assign(in.m, 1.0 / static_cast<double>(in.m));
  if (lambda.size() != in.m)
    throw std::invalid_argument("md_general_bound: lambda_weights must have m entries");
  double sum = 0.0;
  for (double l : lambda) {
    if (l < 0.0) throw std::invalid_argument("md_general_bound: negative weight");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("md_general_bound: weights must sum to 1");
  if (!(in.h > 0.0) || !(in.sigma > 0.0) || !(in.t >= 0.0))
    throw std::invalid_argument("md_general_bound: bad h, sigma or t");

  const double H = in.hurst;
  double value = 0.0;
  for (std::size_t k = 0; k < in.m; ++k) {
    const double prefactor =
        in.md_alt_prefactor
            ? std::pow(std::sqrt(lambda[k]) * in.h * std::sqrt(d_star[k]), 1.0 / H)
            : std::pow(std::sqrt(lambda[k] * in.h) * d_star[k], 1.0 / H);
    value += *in.k_const * in.t * prefactor *
             std::exp(-lambda[k] * in.h * in.h / (2.0 * in.sigma * in.sigma));
  }
  std::vector<std::string> dropped = {"(1-O(eps)) factor in the exponent set to 1"};
  dropped.push_back(in.md_alt_prefactor
                        ? "prefactor read as (sqrt(lambda_k) h sqrt(d*_k))^{1/H}"
                        : "prefactor read literally as (sqrt(lambda_k h) d*_k)^{1/H}");
  return finish(FormulaId::md_general, value, std::move(dropped), in);
}

BoundReport md_symmetric_bound(const BoundInputs& in) {
  if (!(in.a_plus > 0.0) || in.m == 0)
    throw std::invalid_argument("md_symmetric_bound: a_plus and m are required");
  if (!(in.eps > 0.0) || !(in.h > 0.0) || !(in.sigma > 0.0) || !(in.t >= 0.0))
    throw std::invalid_argument("md_symmetric_bound: bad eps, h, sigma or t");
  const double ratio = in.h * in.h / (in.sigma * in.sigma);
  const double count = std::ceil(in.a_plus * in.t / in.eps * ratio);
  const double value =
      kTwoE * count * std::exp(-ratio / (2.0 * static_cast<double>(in.m)));
  return finish(FormulaId::md_symmetric, value,
                {"(1+O(eps)) factor set to 1", "equal weights lambda_k = 1/m"}, in);
}

nlohmann::json BoundInputs::to_json() const {
  nlohmann::json j{{"t", t},
                   {"h", h},
                   {"sigma", sigma},
                   {"eps", eps},
                   {"hurst", hurst},
                   {"alpha_t", alpha_t},
                   {"a_plus", a_plus},
                   {"m", m},
                   {"f_plus", f_plus},
                   {"a_low", a_low},
                   {"big_m", big_m},
                   {"zeta_plus", zeta_plus},
                   {"zeta_minus", zeta_minus},
                   {"md_alt_prefactor", md_alt_prefactor}};
  if (k_const) j["k_const"] = *k_const;
  if (!lambda_weights.empty()) j["lambda_weights"] = lambda_weights;
  return j;
}

nlohmann::json BoundReport::to_json() const {
  return {{"formula_id", formula_name(formula_id)},
          {"value", value},
          {"vacuous", vacuous},
          {"dropped_terms", dropped_terms},
          {"inputs", inputs.to_json()}};
}

}  // namespace fsfbm::bounds
