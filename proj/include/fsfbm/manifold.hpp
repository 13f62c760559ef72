#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "fsfbm/hurst.hpp"

namespace fsfbm::manifold {

/// Gamma function for x > 0, Lanczos approximation (relative error < 1e-12).
double gamma_fn(double x);

/// Leading-order variance manifold F(t)^2 H Gamma(2H) / |a(t)|^{2H}.
/// Requires a_fn(t) < 0 and f_fn(t) > 0.
double zeta_critical(double t, const std::function<double(double)>& a_fn,
                     const std::function<double(double)>& f_fn,
                     const HurstIndex& h);

// zeta together with grid-sampled bounds zeta_minus <= zeta <= zeta_plus
// (min/max over the sampling grid widened by a 1% safety margin).
struct ZetaManifold {
  std::function<double(double)> zeta;
  double zeta_plus = 0.0;
  double zeta_minus = 0.0;
};

ZetaManifold make_zeta_manifold(const std::function<double(double)>& a_fn,
                                const std::function<double(double)>& f_fn,
                                const HurstIndex& h, double t_lo, double t_hi,
                                std::size_t samples = 512);

/// Solves A X + X A^T + C = 0 for stable A (all eigenvalues in the open left
/// half plane). Closed form for m <= 2, Schur back-substitution otherwise.
Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c);

/// Q = H(2H-1) * integral_0^inf e^{A u} u^{2H-2} du for stable A.
Eigen::MatrixXd q_matrix(const Eigen::MatrixXd& a, const HurstIndex& h);

struct MdCriticalCovariance {
  Eigen::MatrixXd a_matrix;
  Eigen::MatrixXd q;
  Eigen::MatrixXd x_star;  // symmetric PSD solution of A X + X A^T + (Q+Q^T) = 0
  // populated when A is symmetric
  std::optional<Eigen::MatrixXd> eigenvectors;
  std::optional<Eigen::VectorXd> eigenvalues;
};

MdCriticalCovariance md_critical_covariance(const Eigen::MatrixXd& a,
                                            const HurstIndex& h);

/// 1-D membership test |x| < h sqrt(zeta); boundary excluded.
bool neighborhood_contains(double x, double zeta_at_t, double h);

/// Quadratic-form membership <x, X*^{-1} x> < h^2; X* must be positive definite.
bool neighborhood_contains(const Eigen::VectorXd& x, const Eigen::MatrixXd& x_star,
                           double h);

}  // namespace fsfbm::manifold
