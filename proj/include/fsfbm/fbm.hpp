#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsfbm/hurst.hpp"
#include "fsfbm/time_grid.hpp"

#include "json.hpp"

namespace fsfbm::fbm {

enum class Method { cholesky, circulant };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Closed-form covariance E[W_t W_s] = (t^2H + s^2H - |t-s|^2H)/2.
double covariance(double t, double s, const HurstIndex& h);

/// Kernel phi(s) = H(2H-1)|s|^(2H-2); even, positive, singular at s = 0.
double kernel_phi(double s, const HurstIndex& h);

/// Autocovariance of unit-step increments at lag k:
/// rho(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H)/2.
double increment_autocov(double k, const HurstIndex& h);

struct FbmPath {
  TimeGrid grid;
  std::vector<double> values;  // length n+1, values[0] = 0 for t0 = 0
  HurstIndex hurst = HurstIndex::brownian_limit();
  std::uint64_t seed = 0;
  Method method = Method::cholesky;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

struct MultiFbmPath {
  std::vector<FbmPath> components;  // shared grid and hurst, independent streams

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Precomputed sampler state for one (grid, hurst, method). Immutable after
// construction; sample() may be called concurrently from many threads.
class Sampler {
 public:
  Sampler(const TimeGrid& grid, const HurstIndex& h, Method method);
  ~Sampler();
  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  // Path for (seed, replica, component); identical arguments give
  // bit-identical output.
  FbmPath sample(std::uint64_t seed, std::uint64_t replica = 0,
                 std::uint64_t component = 0) const;

  // Increments only (length n), scaled by dt^H.
  void sample_increments(std::uint64_t seed, std::uint64_t replica,
                         std::uint64_t component, std::vector<double>& out) const;

 private:
  TimeGrid grid_;
  HurstIndex hurst_;
  Method method_;
  std::vector<double> chol_;   // lower factor of the increment covariance, row-major
  std::vector<double> eigs_;   // circulant embedding eigenvalues, length 2n
  double scale_ = 1.0;         // dt^H
};

FbmPath sample_path(const TimeGrid& grid, const HurstIndex& h, std::uint64_t seed,
                    Method method);

MultiFbmPath sample_multi(std::size_t m, const TimeGrid& grid, const HurstIndex& h,
                          std::uint64_t seed, Method method);

}  // namespace fsfbm::fbm
