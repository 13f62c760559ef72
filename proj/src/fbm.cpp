#include "fsfbm/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "fsfbm/errors.hpp"
#include "fsfbm/io.hpp"
#include "fsfbm/rng.hpp"

namespace fsfbm::fbm {

std::string method_name(Method m) {
  return m == Method::cholesky ? "cholesky" : "circulant";
}

Method method_from_name(const std::string& name) {
  if (name == "cholesky") return Method::cholesky;
  if (name == "circulant") return Method::circulant;
  throw ConfigError("unknown sampling method: " + name);
}

double covariance(double t, double s, const HurstIndex& h) {
  if (t < 0.0 || s < 0.0)
    throw std::domain_error("fbm covariance: times must be nonnegative");
  const double twoH = 2.0 * h.value();
  return 0.5 * (std::pow(t, twoH) + std::pow(s, twoH) -
                std::pow(std::abs(t - s), twoH));
}

double kernel_phi(double s, const HurstIndex& h) {
  if (h.is_brownian_limit())
    throw std::domain_error("kernel_phi: undefined in the Brownian limit");
  if (s == 0.0) throw std::domain_error("kernel_phi: singular at s = 0");
  const double H = h.value();
  return H * (2.0 * H - 1.0) * std::pow(std::abs(s), 2.0 * H - 2.0);
}

double increment_autocov(double k, const HurstIndex& h) {
  const double twoH = 2.0 * h.value();
  const double ak = std::abs(k);
  return 0.5 * (std::pow(ak + 1.0, twoH) - 2.0 * std::pow(ak, twoH) +
                std::pow(std::abs(ak - 1.0), twoH));
}

namespace {

// FFTW plan creation is not thread-safe; execution on caller-owned arrays is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

void fft_inplace(std::vector<std::complex<double>>& data, int sign) {
  fftw_plan plan;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
}

// Eigenvalues of the circulant embedding of rho(0..n). Negative values in
// [-tol*max, 0) are clamped to zero; anything lower is an embedding failure.
std::vector<double> embedding_eigenvalues(std::size_t n, const HurstIndex& h) {
  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> c(m);
  for (std::size_t k = 0; k <= n; ++k) c[k] = increment_autocov(double(k), h);
  for (std::size_t j = n + 1; j < m; ++j) c[j] = c[m - j];
  fft_inplace(c, FFTW_FORWARD);
  std::vector<double> eig(m);
  double max_eig = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    eig[k] = c[k].real();
    max_eig = std::max(max_eig, eig[k]);
  }
  const double tol = 1e-10 * max_eig;
  for (std::size_t k = 0; k < m; ++k) {
    if (eig[k] < -tol)
      throw EmbeddingError("circulant embedding not nonnegative definite: eigenvalue " +
                           std::to_string(eig[k]) + " at index " + std::to_string(k));
    if (eig[k] < 0.0) eig[k] = 0.0;
  }
  return eig;
}

std::vector<double> increment_cholesky(std::size_t n, const HurstIndex& h) {
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cov(i, j) = increment_autocov(double(i) - double(j), h);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fbm cholesky: increment covariance not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) out[i * n + j] = L(i, j);
  return out;
}

}  // namespace

Sampler::Sampler(const TimeGrid& grid, const HurstIndex& h, Method method)
    : grid_(grid), hurst_(h), method_(method) {
  if (grid.t0 != 0.0)
    throw std::invalid_argument("fbm sampler: grid must start at t0 = 0");
  scale_ = std::pow(grid.dt, h.value());
  if (method == Method::cholesky)
    chol_ = increment_cholesky(grid.n, h);
  else
    eigs_ = embedding_eigenvalues(grid.n, h);
}

Sampler::~Sampler() = default;

void Sampler::sample_increments(std::uint64_t seed, std::uint64_t replica,
                                std::uint64_t component,
                                std::vector<double>& out) const {
  const std::size_t n = grid_.n;
  out.resize(n);
  rng::Stream stream(rng::stream_key(seed, replica, component));
  if (method_ == Method::cholesky) {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = stream.next_gaussian();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += chol_[i * n + j] * z[j];
      out[i] = scale_ * acc;
    }
    return;
  }
  // Davies-Harte synthesis: Hermitian spectrum with independent Gaussian
  // coefficients, one inverse transform, keep the first n (real) entries.
  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> v(m);
  v[0] = std::sqrt(eigs_[0]) * stream.next_gaussian();
  for (std::size_t k = 1; k < n; ++k) {
    const double amp = std::sqrt(eigs_[k] / 2.0);
    const double re = stream.next_gaussian();
    const double im = stream.next_gaussian();
    v[k] = std::complex<double>(amp * re, amp * im);
    v[m - k] = std::conj(v[k]);
  }
  v[n] = std::sqrt(eigs_[n]) * stream.next_gaussian();
  fft_inplace(v, FFTW_BACKWARD);
  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t i = 0; i < n; ++i) out[i] = scale_ * norm * v[i].real();
}

FbmPath Sampler::sample(std::uint64_t seed, std::uint64_t replica,
                        std::uint64_t component) const {
  std::vector<double> inc;
  sample_increments(seed, replica, component, inc);
  FbmPath path;
  path.grid = grid_;
  path.hurst = hurst_;
  path.seed = seed;
  path.method = method_;
  path.values.resize(grid_.n + 1);
  path.values[0] = 0.0;
  for (std::size_t i = 0; i < grid_.n; ++i)
    path.values[i + 1] = path.values[i] + inc[i];
  return path;
}

FbmPath sample_path(const TimeGrid& grid, const HurstIndex& h, std::uint64_t seed,
                    Method method) {
  return Sampler(grid, h, method).sample(seed);
}

MultiFbmPath sample_multi(std::size_t m, const TimeGrid& grid, const HurstIndex& h,
                          std::uint64_t seed, Method method) {
  if (m < 1) throw std::invalid_argument("sample_multi: m must be >= 1");
  Sampler sampler(grid, h, method);
  MultiFbmPath out;
  out.components.reserve(m);
  for (std::size_t k = 0; k < m; ++k)
    out.components.push_back(sampler.sample(seed, 0, k));
  return out;
}

nlohmann::json FbmPath::to_json() const {
  return {{"grid", {{"t0", grid.t0}, {"dt", grid.dt}, {"n", grid.n}}},
          {"hurst", hurst.value()},
          {"seed", seed},
          {"method", method_name(method)},
          {"values", values}};
}

std::string FbmPath::to_csv() const {
  io::CsvWriter csv({"t", "value"});
  for (std::size_t i = 0; i < values.size(); ++i)
    csv.row({grid.node(i), values[i]});
  return csv.str();
}

nlohmann::json MultiFbmPath::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components) comps.push_back(c.to_json());
  return {{"components", comps}};
}

std::string MultiFbmPath::to_csv() const {
  io::CsvWriter csv({"t", "value", "component"});
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    for (std::size_t i = 0; i < c.values.size(); ++i)
      csv.row({c.grid.node(i), c.values[i], double(k)});
  }
  return csv.str();
}

}  // namespace fsfbm::fbm
