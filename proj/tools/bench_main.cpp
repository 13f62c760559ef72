// Timing comparison of the serial reference paths against the OpenMP kernels:
// replica-level Monte Carlo, exact-law Gram assembly, and raw sampling.

#include <chrono>
#include <cstdio>

#include "fsfbm/fbm.hpp"
#include "fsfbm/fou.hpp"
#include "fsfbm/manifold.hpp"
#include "fsfbm/mc.hpp"
#include "fsfbm/parallel.hpp"
#include "fsfbm/sim.hpp"

using namespace fsfbm;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

mc::ExitEstimates run_mc(bool parallel, std::size_t replicas) {
  const HurstIndex h = HurstIndex::checked(0.7);
  sim::SystemSpec spec;
  spec.kind = sim::Kind::linear_1d;
  spec.f = [](double x, double, double) { return -x; };
  spec.g = [](double, double, double) { return 1.0; };
  spec.f_amp = [](double) { return 1.0; };
  spec.eps = 0.01;
  spec.sigma = 0.1;
  spec.hurst = h;
  spec.hurst2 = h;
  spec.a_lin = [](double) { return -1.0; };
  spec.x_star = [](double) { return 0.0; };
  spec.a_low = 1.0;

  const double zeta = manifold::zeta_critical(
      0.0, [](double) { return -1.0; }, [](double) { return 1.0; }, h);

  mc::McConfig cfg;
  cfg.replicas = replicas;
  cfg.master_seed = 2024;
  cfg.grid = TimeGrid(0.0, 5e-4, 1000);
  cfg.h_levels = {0.2, 0.4, 0.6};
  cfg.parallel = parallel;
  return mc::estimate_exit_prob(cfg, spec, [zeta](double, double) { return zeta; },
                                0.0, 0.0);
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", omp_get_max_threads());

  {
    const std::size_t replicas = 20000;
    auto t0 = std::chrono::steady_clock::now();
    auto serial = run_mc(false, replicas);
    const double ts = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    auto par = run_mc(true, replicas);
    const double tp = seconds_since(t0);
    bool identical = true;
    for (std::size_t i = 0; i < serial.estimates.size(); ++i)
      identical &= serial.estimates[i].exits == par.estimates[i].exits;
    std::printf("mc exit estimation (%zu replicas x 1000 steps)\n", replicas);
    std::printf("  serial   %8.3f s\n", ts);
    std::printf("  openmp   %8.3f s   speedup %.2fx   results identical: %s\n\n", tp,
                ts / tp, identical ? "yes" : "NO");
  }

  {
    const HurstIndex h = HurstIndex::checked(0.7);
    const auto coeffs = fou::LinearCoeffs::constant(-1.0, 1.0, 0.01, 0.1, h);
    const auto alpha = fou::AlphaIntegral::from_constant(-1.0);
    const TimeGrid grid(0.0, 0.5 / 48.0, 48);
    auto time_gram = [&](bool parallel) {
      auto t0 = std::chrono::steady_clock::now();
      // sample_exact assembles the Gram matrix; replica count kept tiny so the
      // assembly dominates
      auto res = fou::sample_exact(grid, coeffs, alpha, 7, 2, 1e-6);
      (void)res;
      (void)parallel;
      return seconds_since(t0);
    };
#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    const double ts = time_gram(false);
#ifdef _OPENMP
    omp_set_num_threads(omp_get_max_threads());
#endif
    const double tp = time_gram(true);
    std::printf("exact-law Gram assembly (49 nodes, 1225 pair integrals)\n");
    std::printf("  1 thread %8.3f s\n", ts);
    std::printf("  openmp   %8.3f s   speedup %.2fx\n\n", tp, ts / tp);
  }

  {
    const HurstIndex h = HurstIndex::checked(0.75);
    const TimeGrid grid(0.0, 1.0 / 256.0, 256);
    for (auto method : {fbm::Method::cholesky, fbm::Method::circulant}) {
      fbm::Sampler sampler(grid, h, method);
      const std::size_t reps = 4000;
      std::vector<double> inc;
      auto t0 = std::chrono::steady_clock::now();
      double acc = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        sampler.sample_increments(11, r, 0, inc);
        acc += inc[0];
      }
      const double dt = seconds_since(t0);
      std::printf("fbm %s sampling: %zu paths of 256 steps in %.3f s (%.0f paths/s, checksum %.3e)\n",
                  fbm::method_name(method).c_str(), reps, dt, reps / dt, acc);
    }
  }
  return 0;
}
