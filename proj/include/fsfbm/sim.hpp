#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsfbm/fbm.hpp"
#include "fsfbm/hurst.hpp"
#include "fsfbm/manifold.hpp"
#include "fsfbm/time_grid.hpp"

namespace fsfbm::sim {

enum class Kind { linear_1d, nonlinear_1d, coupled_2d, linear_md };

// slow_time:  dx = (1/eps) f dt + (sigma/eps^H) F(y) dW^H,  dy = g dt + sigma2 dW^H2
// fast_time:  dx = f dt + amp(t) dW^H,                      dy = eps g dt
enum class TimeForm { slow_time, fast_time };

struct SystemSpec {
  Kind kind = Kind::linear_1d;
  TimeForm time_form = TimeForm::slow_time;

  std::function<double(double, double, double)> f;  // fast drift f(x, y, eps)
  std::function<double(double, double, double)> g;  // slow drift g(x, y, eps)
  std::function<double(double)> f_amp;              // noise amplitude F(y)

  Eigen::MatrixXd a_matrix;  // linear_md drift (negative spectral abscissa)

  double eps = 0.0;
  double sigma = 0.0;   // fast noise intensity (sigma or sigma1)
  double sigma2 = 0.0;  // slow noise intensity; 0 keeps the slow variable deterministic
  std::function<double(double)> sigma2_fn;  // optional sigma2(t), overrides sigma2

  HurstIndex hurst = HurstIndex::brownian_limit();
  HurstIndex hurst2 = HurstIndex::brownian_limit();  // slow-noise Hurst, defaults to hurst

  std::function<double(double)> a_lin;    // linearization a(y) for diagnostics
  std::function<double(double)> x_star;   // critical manifold x*(y) (scalar kinds)
  double a_low = 0.0;                     // declared stability margin > 0
};

struct Trajectory {
  TimeGrid grid;
  std::size_t dim = 1;
  std::vector<double> x;   // (n+1) * dim, row-major
  std::vector<double> y;   // n+1
  std::vector<double> xi;  // x minus the declared reference, same shape as x
  std::uint64_t seed = 0;

  double x_at(std::size_t node, std::size_t comp = 0) const {
    return x[node * dim + comp];
  }
  double xi_at(std::size_t node, std::size_t comp = 0) const {
    return xi[node * dim + comp];
  }
};

struct ExitRecord {
  bool exited = false;
  std::size_t tau_index = 0;
  double tau_time = 0.0;
  double h = 0.0;
};

struct IntegrateOptions {
  double cfl_factor = 0.2;
  // exact propagation of the linear drift; defaults to on for linear kinds
  std::optional<bool> exponential_linear;
};

// Reference for the deviation xi = x - reference(t, y). Defaults to the
// critical manifold x*(y) from the spec.
using Reference = std::function<double(double, double)>;

Trajectory integrate(const SystemSpec& spec, const fbm::FbmPath& fast_path,
                     const fbm::FbmPath* slow_path, double x0, double y0,
                     const Reference& reference = nullptr,
                     const IntegrateOptions& opt = {});

Trajectory integrate_md(const SystemSpec& spec, const fbm::MultiFbmPath& paths,
                        const Eigen::VectorXd& x0,
                        const std::function<Eigen::VectorXd(double)>& reference = nullptr,
                        const IntegrateOptions& opt = {});

// First grid node outside B(h); detection only at nodes, tau_index >= 1.
ExitRecord detect_exit(const Trajectory& traj,
                       const std::function<double(double, double)>& zeta_of_t_y,
                       double h);

ExitRecord detect_exit_md(const Trajectory& traj, const Eigen::MatrixXd& x_star,
                          double h);

std::string trajectory_csv(const Trajectory& traj,
                           const std::vector<bool>* in_neighborhood = nullptr);

// Thermohaline box model in dimensionless form; fast temperature difference x,
// slow salinity difference y:
//   dx = (1/eps)[-(x-1) - eps x (1 + eta^2 (x-y)^2)] dt + (sigma1/eps^H) dW^H
//   dy = [mu - y (1 + eta^2 (x-y)^2)] dt + sigma2 dW^H
// Critical manifold x* = 1, linearization a = -1, zeta = H Gamma(2H).
SystemSpec climate_full_preset(double sigma1, double sigma2, double eps,
                               const HurstIndex& hurst, double mu, double eta_sq);

struct ClimateReduced {
  SystemSpec spec;
  std::function<double(double)> backbone;        // y = x (1 + eta^2 (1-x)^2)
  std::function<double(double)> fast_jacobian;   // d/dx of the fast drift
  std::function<bool(double)> stable_branch;     // fast_jacobian(x) < 0
  // nearest root of backbone(x) = y, Newton continuation from x_hint
  std::function<double(double, double)> branch_solve;
};

// Reduced salinity dynamics with the former slow forcing promoted to the slow
// variable:  dX = [Y - X(1 + eta^2 (1-X)^2)] dt + sigma2(t) dW^H,  dY = eps g dt.
ClimateReduced climate_reduced_preset(const std::function<double(double)>& sigma2_fn,
                                      double eps, const HurstIndex& hurst,
                                      double eta_sq,
                                      const std::function<double(double, double)>& g_slow);

}  // namespace fsfbm::sim
