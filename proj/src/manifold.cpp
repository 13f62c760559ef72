#include "fsfbm/manifold.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

#include "fsfbm/errors.hpp"
#include "fsfbm/quadrature.hpp"

namespace fsfbm::manifold {

double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
  if (x == 1.0 || x == 2.0) return 1.0;  // exact at the unit values
  // Lanczos, g = 7, 9 coefficients
  static const double coeffs[9] = {0.99999999999980993,  676.5203681218851,
                                   -1259.1392167224028,  771.32342877765313,
                                   -176.61502916214059,  12.507343278686905,
                                   -0.13857109526572012, 9.9843695780195716e-6,
                                   1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection keeps the approximation in its accurate range
    return M_PI / (std::sin(M_PI * x) * gamma_fn(1.0 - x));
  }
  const double z = x - 1.0;
  double acc = coeffs[0];
  for (int i = 1; i < 9; ++i) acc += coeffs[i] / (z + static_cast<double>(i));
  const double t = z + 7.5;
  return std::sqrt(2.0 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * acc;
}

double zeta_critical(double t, const std::function<double(double)>& a_fn,
                     const std::function<double(double)>& f_fn,
                     const HurstIndex& h) {
  const double a = a_fn(t);
  if (!(a < 0.0))
    throw std::domain_error("zeta_critical: stability violated, a(t) >= 0 at t = " +
                            std::to_string(t));
  const double f = f_fn(t);
  if (!(f > 0.0))
    throw std::domain_error("zeta_critical: noise amplitude must be positive");
  const double H = h.value();
  return f * f * H * gamma_fn(2.0 * H) / std::pow(-a, 2.0 * H);
}

ZetaManifold make_zeta_manifold(const std::function<double(double)>& a_fn,
                                const std::function<double(double)>& f_fn,
                                const HurstIndex& h, double t_lo, double t_hi,
                                std::size_t samples) {
  if (!(t_hi >= t_lo)) throw std::invalid_argument("make_zeta_manifold: bad interval");
  ZetaManifold out;
  out.zeta = [a_fn, f_fn, h](double t) { return zeta_critical(t, a_fn, f_fn, h); };
  double lo = out.zeta(t_lo), hi = lo;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double t = t_lo + (t_hi - t_lo) * double(i) / double(samples);
    const double z = out.zeta(t);
    lo = std::min(lo, z);
    hi = std::max(hi, z);
  }
  out.zeta_minus = lo * 0.99;
  out.zeta_plus = hi * 1.01;
  return out;
}

namespace {

double spectral_abscissa(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.rows(); ++i) m = std::max(m, es.eigenvalues()(i).real());
  return m;
}

void require_stable(const Eigen::MatrixXd& a, const char* who) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < 0.0))
    throw UnstableMatrixError(std::string(who) +
                              ": spectral abscissa is nonnegative (" +
                              std::to_string(abscissa) + ")");
}

// Solve T Y + Y T^T = W for quasi-upper-triangular T (real Schur form),
// marching block columns/rows from the bottom-right corner.
Eigen::MatrixXd sylvester_quasi_triangular(const Eigen::MatrixXd& t,
                                           const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(t.rows());
  // block boundaries: 2x2 blocks have a nonzero subdiagonal element
  std::vector<std::pair<int, int>> blocks;  // (start, size)
  for (int i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      blocks.emplace_back(i, 2);
      i += 2;
    } else {
      blocks.emplace_back(i, 1);
      i += 1;
    }
  }
  const int nb = static_cast<int>(blocks.size());
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);

  for (int kb = nb - 1; kb >= 0; --kb) {
    const auto [k0, ks] = blocks[kb];
    for (int lb = nb - 1; lb >= 0; --lb) {
      const auto [l0, ls] = blocks[lb];
      Eigen::MatrixXd rhs = w.block(k0, l0, ks, ls);
      // contributions of already-solved blocks to the (k,l) equation
      if (k0 + ks < n)
        rhs -= t.block(k0, k0 + ks, ks, n - k0 - ks) *
               y.block(k0 + ks, l0, n - k0 - ks, ls);
      if (l0 + ls < n)
        rhs -= y.block(k0, l0 + ls, ks, n - l0 - ls) *
               t.block(l0, l0 + ls, ls, n - l0 - ls).transpose();
      // small system (I ox Tkk + Tll ox I) vec(Ykl) = vec(rhs)
      const Eigen::MatrixXd tkk = t.block(k0, k0, ks, ks);
      const Eigen::MatrixXd tll = t.block(l0, l0, ls, ls);
      const int m = ks * ls;
      Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m, m);
      Eigen::VectorXd b(m);
      for (int j = 0; j < ls; ++j)
        for (int i = 0; i < ks; ++i) {
          const int row = j * ks + i;
          b(row) = rhs(i, j);
          for (int ii = 0; ii < ks; ++ii) sys(row, j * ks + ii) += tkk(i, ii);
          for (int jj = 0; jj < ls; ++jj) sys(row, jj * ks + i) += tll(j, jj);
        }
      const Eigen::VectorXd sol = sys.partialPivLu().solve(b);
      for (int j = 0; j < ls; ++j)
        for (int i = 0; i < ks; ++i) y(k0 + i, l0 + j) = sol(j * ks + i);
    }
  }
  return y;
}

}  // namespace

Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
  require_stable(a, "lyapunov_solve");
  if (c.rows() != a.rows() || c.cols() != a.cols())
    throw std::invalid_argument("lyapunov_solve: dimension mismatch");
  const int n = static_cast<int>(a.rows());

  Eigen::MatrixXd x;
  if (n == 1) {
    x = Eigen::MatrixXd::Constant(1, 1, -c(0, 0) / (2.0 * a(0, 0)));
  } else if (n == 2) {
    // vectorized 4x4 system (I ox A + A ox I) vec(X) = -vec(C)
    Eigen::Matrix4d sys = Eigen::Matrix4d::Zero();
    Eigen::Vector4d b;
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        const int row = j * 2 + i;
        b(row) = -c(i, j);
        for (int ii = 0; ii < 2; ++ii) sys(row, j * 2 + ii) += a(i, ii);
        for (int jj = 0; jj < 2; ++jj) sys(row, jj * 2 + i) += a(j, jj);
      }
    const Eigen::Vector4d sol = sys.partialPivLu().solve(b);
    x.resize(2, 2);
    x << sol(0), sol(2), sol(1), sol(3);
  } else {
    Eigen::RealSchur<Eigen::MatrixXd> schur(a);
    const Eigen::MatrixXd u = schur.matrixU();
    const Eigen::MatrixXd t = schur.matrixT();
    const Eigen::MatrixXd w = -(u.transpose() * c * u);
    const Eigen::MatrixXd y = sylvester_quasi_triangular(t, w);
    x = u * y * u.transpose();
  }

  if (c.isApprox(c.transpose(), 1e-13)) x = 0.5 * (x + x.transpose().eval());
  const double residual = (a * x + x * a.transpose() + c).norm();
  const double scale = a.norm() * x.norm() + c.norm();
  if (residual > 1e-10 * scale)
    throw std::runtime_error("lyapunov_solve: residual " + std::to_string(residual) +
                             " exceeds tolerance");
  return x;
}

Eigen::MatrixXd q_matrix(const Eigen::MatrixXd& a, const HurstIndex& h) {
  require_stable(a, "q_matrix");
  const int n = static_cast<int>(a.rows());
  const double H = h.value();
  const double p = 2.0 * H - 1.0;
  const double rate = -spectral_abscissa(a);  // slowest decay
  const double u_max = 40.0 / rate;
  const double w_max = std::pow(u_max, p);

  // adaptive panels on the substituted axis; matrix integrand, Frobenius error
  auto integrand = [&](double w) -> Eigen::MatrixXd {
    const double u = std::pow(w, 1.0 / p);
    return (a * u).exp();
  };
  struct Panel {
    double a, b, err;
    Eigen::MatrixXd val;
  };
  auto gk = [&](double lo, double hi) {
    Panel out{lo, hi, 0.0, Eigen::MatrixXd::Zero(n, n)};
    Eigen::MatrixXd gauss = Eigen::MatrixXd::Zero(n, n);
    const double c = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int i = 0; i < 15; ++i) {
      const Eigen::MatrixXd f = integrand(c + half * quad::kKronrodNodes[i]);
      out.val += quad::kKronrodWeights[i] * f;
      if (i % 2 == 1) gauss += quad::kGaussWeights[i / 2] * f;
    }
    out.err = (out.val - gauss).norm() * std::abs(half);
    out.val *= half;
    return out;
  };

  std::vector<Panel> panels;
  std::vector<double> cuts{0.0};
  for (double s : {0.25, 1.0, 4.0, 10.0, 20.0}) {
    const double w_bp = std::pow(s / rate, p);
    if (w_bp < w_max) cuts.push_back(w_bp);
  }
  cuts.push_back(w_max);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    panels.push_back(gk(cuts[i], cuts[i + 1]));

  const double tol = 1e-11;
  for (std::size_t iter = 0; iter < 4000; ++iter) {
    double total_err = 0.0;
    double total_norm = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total_err += panels[i].err;
      total_norm += panels[i].val.norm();
      if (panels[i].err > panels[worst].err) worst = i;
    }
    if (total_err <= tol * std::max(total_norm, 1e-30)) break;
    const Panel w = panels[worst];
    const double mid = 0.5 * (w.a + w.b);
    panels[worst] = gk(w.a, mid);
    panels.push_back(gk(mid, w.b));
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (const auto& pn : panels) q += pn.val;

  // tail check: extending the cutoff must not move the result
  const Panel tail = gk(w_max, std::pow(2.0 * u_max, p));
  if (tail.val.norm() > 1e-9 * std::max(q.norm(), 1e-30))
    throw QuadratureError("q_matrix: tail truncation not converged", q.norm(),
                          tail.val.norm());
  return H * q;
}

MdCriticalCovariance md_critical_covariance(const Eigen::MatrixXd& a,
                                            const HurstIndex& h) {
  MdCriticalCovariance out;
  out.a_matrix = a;
  out.q = q_matrix(a, h);
  out.x_star = lyapunov_solve(a, out.q + out.q.transpose());
  if (a.isApprox(a.transpose(), 1e-12)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.x_star);
    out.eigenvectors = es.eigenvectors();
    out.eigenvalues = es.eigenvalues();
    // symmetric drift: the spectrum must equal H Gamma(2H) / |a_k|^{2H};
    // ascending d* pairs with descending |a_k|
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> as(a);
    const double H = h.value();
    const double hg = H * gamma_fn(2.0 * H);
    const int m = static_cast<int>(a.rows());
    for (int k = 0; k < m; ++k) {
      // both spectra ascend: the most negative a_k carries the smallest d*_k
      const double expected = hg / std::pow(-as.eigenvalues()(k), 2.0 * H);
      const double got = (*out.eigenvalues)(k);
      if (std::abs(got - expected) > 1e-8 * expected)
        throw std::runtime_error(
            "md_critical_covariance: symmetric-case spectrum check failed (" +
            std::to_string(got) + " vs " + std::to_string(expected) + ")");
    }
  }
  return out;
}

bool neighborhood_contains(double x, double zeta_at_t, double h) {
  if (!(zeta_at_t > 0.0))
    throw std::domain_error("neighborhood_contains: zeta must be positive");
  if (!(h > 0.0)) throw std::domain_error("neighborhood_contains: h must be positive");
  return std::abs(x) < h * std::sqrt(zeta_at_t);
}

bool neighborhood_contains(const Eigen::VectorXd& x, const Eigen::MatrixXd& x_star,
                           double h) {
  if (!(h > 0.0)) throw std::domain_error("neighborhood_contains: h must be positive");
  Eigen::LLT<Eigen::MatrixXd> llt(x_star);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("neighborhood_contains: X* is not positive definite");
  const double q = x.dot(llt.solve(x));
  return q < h * h;
}

}  // namespace fsfbm::manifold
