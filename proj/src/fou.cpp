#include "fsfbm/fou.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fsfbm/errors.hpp"
#include "fsfbm/parallel.hpp"
#include "fsfbm/quadrature.hpp"
#include "fsfbm/rng.hpp"

namespace fsfbm::fou {

LinearCoeffs LinearCoeffs::constant(double a_value, double f_value, double eps,
                                    double sigma, const HurstIndex& h) {
  if (!(a_value < 0.0))
    throw std::invalid_argument("LinearCoeffs: drift coefficient must be negative");
  if (!(f_value > 0.0))
    throw std::invalid_argument("LinearCoeffs: noise amplitude must be positive");
  if (!(eps > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("LinearCoeffs: eps and sigma must be positive");
  LinearCoeffs c;
  c.a = [a_value](double) { return a_value; };
  c.f_amp = [f_value](double) { return f_value; };
  c.a_low = -a_value;
  c.eps = eps;
  c.sigma = sigma;
  c.hurst = h;
  c.const_a = a_value;
  c.const_f = f_value;
  return c;
}

LinearCoeffs LinearCoeffs::varying(std::function<double(double)> a_fn,
                                   std::function<double(double)> f_fn, double a_low,
                                   double eps, double sigma, const HurstIndex& h) {
  if (!(a_low > 0.0))
    throw std::invalid_argument("LinearCoeffs: a_low must be positive");
  if (!(eps > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("LinearCoeffs: eps and sigma must be positive");
  LinearCoeffs c;
  c.a = std::move(a_fn);
  c.f_amp = std::move(f_fn);
  c.a_low = a_low;
  c.eps = eps;
  c.sigma = sigma;
  c.hurst = h;
  return c;
}

AlphaIntegral AlphaIntegral::from_constant(double a_value) {
  AlphaIntegral out;
  out.alpha_ = [a_value](double t, double u) { return a_value * (t - u); };
  return out;
}

AlphaIntegral AlphaIntegral::from_analytic(
    std::function<double(double, double)> alpha) {
  AlphaIntegral out;
  out.alpha_ = std::move(alpha);
  return out;
}

AlphaIntegral AlphaIntegral::from_function(std::function<double(double)> a_fn,
                                           double rel_tol) {
  AlphaIntegral out;
  out.alpha_ = [a_fn = std::move(a_fn), rel_tol](double t, double u) {
    if (t == u) return 0.0;
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-15;
    return quad::integrate(a_fn, u, t, opt);
  };
  return out;
}

double AlphaIntegral::operator()(double t, double u) const {
  if (t == u) return 0.0;
  return alpha_(t, u);
}

namespace {

// split points following e^{-x/scale} decay, expressed from the right end
std::vector<double> decay_breakpoints(double lo, double hi, double scale) {
  std::vector<double> out;
  for (double k : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    const double x = hi - k * scale;
    if (x > lo && x < hi) out.push_back(x);
  }
  return out;
}

// Constant-coefficient covariance reduced to one dimension.
// With tau = eps/|a|, T_i = t_i/tau, D = (t2-t1)/tau (t1 <= t2):
//   Cov = sigma^2 F^2 / |a|^{2H} * H * [ int_0^{(T1+D)^p} G(-w^{1/p}) dw
//                                      + int_0^{(T2-D)^p} G(+w^{1/p}) dw ],
// G(s) = (e^{E0} - e^{E1})/2, E_i = -s - D - 2 p_i,
// p0 = max(0, -s-D), p1 = min(T1, T2-D-s), p = 2H-1.
double covariance_constant(double t1, double t2, const LinearCoeffs& c,
                           double rel_tol) {
  const double a_abs = -*c.const_a;
  const double f = *c.const_f;
  const double tau = c.eps / a_abs;
  if (t1 > t2) std::swap(t1, t2);
  const double T1 = t1 / tau, T2 = t2 / tau, D = (t2 - t1) / tau;

  if (c.hurst.is_brownian_limit()) {
    // Ito isometry closed form
    return c.sigma * c.sigma * f * f / (2.0 * a_abs) *
           (std::exp(-D) - std::exp(-(T1 + T2)));
  }

  const double H = c.hurst.value();
  const double p = 2.0 * H - 1.0;
  auto G = [&](double s) {
    const double p0 = std::max(0.0, -s - D);
    const double p1 = std::min(T1, T2 - D - s);
    if (p1 <= p0) return 0.0;
    const double e0 = -s - D - 2.0 * p0;
    const double e1 = -s - D - 2.0 * p1;
    return 0.5 * (std::exp(e0) - std::exp(e1));
  };

  quad::Options opt;
  opt.rel_tol = rel_tol;
  opt.max_panels = 40000;
  auto side = [&](double s_max, double sign) {
    if (!(s_max > 0.0)) return 0.0;
    const double w_max = std::pow(s_max, p);
    quad::Options o = opt;
    for (double s_bp : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0})
      if (s_bp < s_max) o.breakpoints.push_back(std::pow(s_bp, p));
    return quad::integrate(
        [&](double w) { return G(sign * std::pow(w, 1.0 / p)); }, 0.0, w_max, o);
  };
  const double integral = side(T1 + D, -1.0) + side(T2 - D, +1.0);
  return c.sigma * c.sigma * f * f / std::pow(a_abs, 2.0 * H) * H * integral;
}

// General coefficients: outer adaptive over u, inner integrals with the
// measure substitution w = s^{2H-1} absorbing the |u-v|^{2H-2} singularity.
double covariance_general(double t1, double t2, const LinearCoeffs& c,
                          const AlphaIntegral& alpha, double rel_tol) {
  if (t1 > t2) std::swap(t1, t2);
  const double eps = c.eps;

  auto g1 = [&](double x) { return std::exp(alpha(t1, x) / eps) * c.f_amp(x); };
  auto g2 = [&](double x) { return std::exp(alpha(t2, x) / eps) * c.f_amp(x); };

  if (c.hurst.is_brownian_limit()) {
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.breakpoints = decay_breakpoints(0.0, t1, eps / c.a_low);
    const double integral = quad::integrate(
        [&](double u) { return g1(u) * g2(u); }, 0.0, t1, opt);
    return c.sigma * c.sigma / eps * integral;
  }

  const double H = c.hurst.value();
  const double p = 2.0 * H - 1.0;
  const double boundary_scale = std::pow(eps / c.a_low, p);

  quad::Options inner_opt;
  inner_opt.rel_tol = rel_tol * 0.1;
  inner_opt.max_panels = 4000;
  for (double k : {0.25, 1.0, 4.0, 16.0})
    inner_opt.breakpoints.push_back(k * boundary_scale);

  auto inner = [&](double u) {
    // v < u side: s = u - v in (0, u]
    double below = 0.0;
    if (u > 0.0) {
      const double w_max = std::pow(u, p);
      below = quad::integrate(
          [&](double w) { return g2(u - std::pow(w, 1.0 / p)); }, 0.0, w_max,
          inner_opt);
    }
    // v > u side: s = v - u in (0, t2 - u]
    double above = 0.0;
    if (t2 > u) {
      const double w_max = std::pow(t2 - u, p);
      above = quad::integrate(
          [&](double w) { return g2(u + std::pow(w, 1.0 / p)); }, 0.0, w_max,
          inner_opt);
    }
    return below + above;
  };

  quad::Options outer_opt;
  outer_opt.rel_tol = rel_tol;
  outer_opt.max_panels = 8000;
  outer_opt.breakpoints = decay_breakpoints(0.0, t1, eps / c.a_low);
  const double integral =
      quad::integrate([&](double u) { return g1(u) * inner(u); }, 0.0, t1,
                      outer_opt);
  return c.sigma * c.sigma / std::pow(eps, 2.0 * H) * H * integral;
}

}  // namespace

double covariance(double t1, double t2, const LinearCoeffs& c,
                  const AlphaIntegral& alpha, double rel_tol) {
  if (t1 < 0.0 || t2 < 0.0)
    throw std::domain_error("fou covariance: times must be nonnegative");
  if (!(rel_tol > 0.0))
    throw std::invalid_argument("fou covariance: tolerance must be positive");
  if (t1 == 0.0 || t2 == 0.0) return 0.0;
  if (c.is_constant()) return covariance_constant(t1, t2, c, rel_tol);
  return covariance_general(t1, t2, c, alpha, rel_tol);
}

double variance(double t, const LinearCoeffs& c, const AlphaIntegral& alpha,
                double rel_tol) {
  return covariance(t, t, c, alpha, rel_tol);
}

ExactSampleResult sample_exact(const TimeGrid& grid, const LinearCoeffs& c,
                               const AlphaIntegral& alpha, std::uint64_t seed,
                               std::size_t replicas, double quad_rel_tol) {
  const std::size_t n_nodes = grid.n + 1;
  if (n_nodes > 2048)
    throw std::invalid_argument(
        "sample_exact: grid exceeds 2048 nodes; use the Euler integrator instead");

  const std::vector<double> times = grid.nodes();

  // Gram matrix; entries are independent, assembled in parallel.
  Eigen::MatrixXd gram(n_nodes, n_nodes);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n_nodes * (n_nodes + 1) / 2);
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t j = i; j < n_nodes; ++j) pairs.emplace_back(i, j);
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double v = covariance(times[i], times[j], c, alpha, quad_rel_tol);
    gram(i, j) = v;
    gram(j, i) = v;
  });

  // Nodes with (numerically) zero variance are pinned to exact zero.
  double max_var = 0.0;
  for (std::size_t i = 0; i < n_nodes; ++i) max_var = std::max(max_var, gram(i, i));
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < n_nodes; ++i)
    if (gram(i, i) > 1e-14 * max_var) free_idx.push_back(i);

  const std::size_t nf = free_idx.size();
  Eigen::MatrixXd sub(nf, nf);
  for (std::size_t i = 0; i < nf; ++i)
    for (std::size_t j = 0; j < nf; ++j) sub(i, j) = gram(free_idx[i], free_idx[j]);
  sub = 0.5 * (sub + sub.transpose().eval());

  const double trace = sub.trace();
  Eigen::MatrixXd chol;
  bool ok = false;
  for (double jitter : {1e-12, 1e-10}) {
    Eigen::MatrixXd m =
        sub + jitter * trace / double(std::max<std::size_t>(nf, 1)) *
                  Eigen::MatrixXd::Identity(nf, nf);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
      chol = llt.matrixL();
      ok = true;
      break;
    }
  }
  if (!ok)
    throw std::runtime_error(
        "sample_exact: covariance matrix not positive semi-definite after jitter");

  ExactSampleResult out;
  out.times = times;
  out.paths.assign(replicas, std::vector<double>(n_nodes, 0.0));
  parallel_for(replicas, [&](std::size_t r) {
    rng::Stream stream(rng::stream_key(seed, r, 0));
    Eigen::VectorXd z(nf);
    for (std::size_t i = 0; i < nf; ++i) z(i) = stream.next_gaussian();
    Eigen::VectorXd x = chol * z;
    for (std::size_t i = 0; i < nf; ++i) out.paths[r][free_idx[i]] = x(i);
  });
  return out;
}

OdeSolution::OdeSolution(std::vector<double> times, std::vector<double> values,
                         double truncation_bound)
    : times_(std::move(times)),
      values_(std::move(values)),
      truncation_bound_(truncation_bound) {}

double OdeSolution::operator()(double t) const {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin());
  const double t0 = times_[i - 1], t1 = times_[i];
  const double frac = (t - t0) / (t1 - t0);
  return values_[i - 1] + frac * (values_[i] - values_[i - 1]);
}

OdeSolution variance_ode_solve(const LinearCoeffs& c, const AlphaIntegral& alpha,
                               double t_end, double w0, const OdeOptions& opt) {
  if (w0 < 0.0) throw std::invalid_argument("variance_ode_solve: w0 must be >= 0");
  if (!(t_end > 0.0))
    throw std::invalid_argument("variance_ode_solve: t_end must be positive");
  const double eps = c.eps;
  const double step = opt.step_fraction * eps / c.a_low;
  const double n_steps_real = std::ceil(t_end / step);
  if (n_steps_real > 5e7)
    throw StiffnessError(
        "variance_ode_solve: step size underflow; increase step_fraction or "
        "reduce t_end (steps needed: " +
        std::to_string(n_steps_real) + ")");
  const std::size_t n_steps = static_cast<std::size_t>(n_steps_real);
  const double h = t_end / static_cast<double>(n_steps);

  const bool brownian = c.hurst.is_brownian_limit();
  const double H = c.hurst.value();
  const double p = 2.0 * H - 1.0;
  const double v_max_tail = opt.tail_cutoff / c.a_low;

  // memory integral in the substituted variable, truncated at the point where
  // the exponential factor is below e^{-tail_cutoff}
  auto memory = [&](double t) {
    if (t <= 0.0 || brownian) return 0.0;
    const double v_max = std::min(t / eps, v_max_tail);
    const double w_max = std::pow(v_max, p);
    quad::Options qo;
    qo.rel_tol = opt.memory_rel_tol;
    qo.max_panels = 6000;
    for (double k : {0.25, 1.0, 4.0, 16.0}) {
      const double w_bp = std::pow(k / c.a_low, p);
      if (w_bp < w_max) qo.breakpoints.push_back(w_bp);
    }
    return quad::integrate(
               [&](double w) {
                 const double v = std::pow(w, 1.0 / p);
                 const double u = t - eps * v;
                 return std::exp(alpha(t, u) / eps) * c.f_amp(u);
               },
               0.0, w_max, qo) /
           p;
  };

  // w' = lam(t) w + q(t); exponential midpoint stepping is exact for the
  // homogeneous part, so the fast decay costs no accuracy.
  auto lam = [&](double t) { return 2.0 * c.a(t) / eps; };
  auto forcing = [&](double t) {
    if (brownian) {
      const double f = c.f_amp(t);
      return f * f / eps;
    }
    return 2.0 * c.f_amp(t) * H * (2.0 * H - 1.0) * memory(t) / eps;
  };

  std::vector<double> times(n_steps + 1), values(n_steps + 1);
  times[0] = 0.0;
  values[0] = w0;
  double f_sup = c.f_amp(0.0);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t0 = static_cast<double>(k) * h;
    const double tm = t0 + 0.5 * h;
    const double l = lam(tm);
    const double q = forcing(tm);
    const double e = std::exp(l * h);
    values[k + 1] = e * values[k] + q * (e - 1.0) / l;
    times[k + 1] = t0 + h;
    f_sup = std::max(f_sup, c.f_amp(times[k + 1]));
  }

  // error transported into w by the truncated memory tail
  double trunc = 0.0;
  if (!brownian && t_end / eps > v_max_tail) {
    const double tail_m = f_sup * std::pow(v_max_tail, 2.0 * H - 2.0) *
                          std::exp(-c.a_low * v_max_tail) / c.a_low;
    trunc = f_sup * H * (2.0 * H - 1.0) * tail_m / c.a_low;
  }
  return OdeSolution(std::move(times), std::move(values), trunc);
}

RelationReport check_variance_relation(const LinearCoeffs& c,
                                       const AlphaIntegral& alpha,
                                       const std::function<double(double)>& zeta,
                                       double t, double rel_tol) {
  RelationReport rep;
  rep.time = t;
  rep.tolerance = rel_tol;
  rep.variance_quadrature = variance(t, c, alpha, std::min(rel_tol * 0.01, 1e-7));
  const double decay = std::exp(2.0 * alpha(t, 0.0) / c.eps);
  rep.relation_rhs = c.sigma * c.sigma * (zeta(t) - decay * zeta(0.0));
  rep.abs_discrepancy = std::abs(rep.variance_quadrature - rep.relation_rhs);
  const double denom = std::max(std::abs(rep.variance_quadrature),
                                std::abs(rep.relation_rhs));
  rep.rel_discrepancy = denom == 0.0 ? 0.0 : rep.abs_discrepancy / denom;
  rep.pass = rep.rel_discrepancy <= rel_tol;
  return rep;
}

}  // namespace fsfbm::fou
