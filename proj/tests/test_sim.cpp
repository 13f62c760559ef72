#include "fsfbm/sim.hpp"

#include <cmath>

#include "doctest.h"
#include "fsfbm/errors.hpp"
#include "fsfbm/fou.hpp"
#include "fsfbm/manifold.hpp"
#include "fsfbm/stats.hpp"

using namespace fsfbm;

namespace {
const HurstIndex kH70 = HurstIndex::checked(0.7);

sim::SystemSpec linear_spec(double a, double f, double eps, double sigma,
                            const HurstIndex& h) {
  sim::SystemSpec spec;
  spec.kind = sim::Kind::linear_1d;
  spec.f = [a](double x, double, double) { return a * x; };
  spec.g = [](double, double, double) { return 1.0; };
  spec.f_amp = [f](double) { return f; };
  spec.eps = eps;
  spec.sigma = sigma;
  spec.hurst = h;
  spec.hurst2 = h;
  spec.a_lin = [a](double) { return a; };
  spec.x_star = [](double) { return 0.0; };
  spec.a_low = -a;
  return spec;
}
}  // namespace

TEST_CASE("deterministic attraction to a moving manifold") {
  // f = -(x - sin y): critical manifold x* = sin(y), stable with a = -1
  sim::SystemSpec spec;
  spec.kind = sim::Kind::nonlinear_1d;
  spec.f = [](double x, double y, double) { return -(x - std::sin(y)); };
  spec.g = [](double, double, double) { return 1.0; };
  spec.f_amp = [](double) { return 1.0; };
  spec.eps = 0.01;
  spec.sigma = 0.0;
  spec.hurst = kH70;
  spec.hurst2 = kH70;
  spec.a_lin = [](double) { return -1.0; };
  spec.x_star = [](double y) { return std::sin(y); };
  spec.a_low = 1.0;

  const TimeGrid grid(0.0, 2e-4, 5000);  // [0, 1]
  const auto path = fbm::sample_path(grid, kH70, 1, fbm::Method::circulant);
  const auto traj = sim::integrate(spec, path, nullptr, 0.0, 0.0);
  double max_dev = 0.0;
  for (double v : traj.xi) max_dev = std::max(max_dev, std::abs(v));
  CHECK(max_dev <= 1e-2);
}

TEST_CASE("euler variance matches the exact law") {
  const auto spec = linear_spec(-1.0, 1.0, 0.01, 0.1, kH70);
  const TimeGrid grid(0.0, 2e-4, 500);  // t = 0.1
  fbm::Sampler sampler(grid, kH70, fbm::Method::circulant);
  const std::size_t reps = 10000;
  double s2 = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto path = sampler.sample(404, r, 0);
    const auto traj = sim::integrate(spec, path, nullptr, 0.0, 0.0);
    const double v = traj.xi.back();
    s2 += v * v;
  }
  const double var = s2 / static_cast<double>(reps);
  const auto coeffs = fou::LinearCoeffs::constant(-1.0, 1.0, 0.01, 0.1, kH70);
  const auto alpha = fou::AlphaIntegral::from_constant(-1.0);
  const double target = fou::variance(0.1, coeffs, alpha, 1e-8);
  const double se = target * std::sqrt(2.0 / static_cast<double>(reps));
  CHECK(std::abs(var - target) <= std::max(3.0 * se, 0.05 * target));
}

TEST_CASE("diagonal multi-dimensional run decouples bitwise") {
  const HurstIndex h = kH70;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -2.0;

  sim::SystemSpec md;
  md.kind = sim::Kind::linear_md;
  md.a_matrix = a;
  md.eps = 0.01;
  md.sigma = 0.1;
  md.hurst = h;
  md.hurst2 = h;
  md.a_low = 1.0;

  const TimeGrid grid(0.0, 1e-3, 200);
  const auto paths = fbm::sample_multi(2, grid, h, 606, fbm::Method::circulant);

  sim::IntegrateOptions opt;
  opt.exponential_linear = false;  // shared plain-Euler arithmetic
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  const auto traj_md = sim::integrate_md(md, paths, x0, nullptr, opt);

  for (int k = 0; k < 2; ++k) {
    auto spec1 = linear_spec(a(k, k), 1.0, 0.01, 0.1, h);
    spec1.a_low = 1.0;
    const auto traj1 =
        sim::integrate(spec1, paths.components[k], nullptr, 0.0, 0.0, nullptr, opt);
    for (std::size_t i = 0; i <= 200; ++i)
      CHECK(traj_md.x_at(i, k) == traj1.x[i]);
  }
}

TEST_CASE("strong order one against the exponential coupling reference") {
  const auto spec = linear_spec(-1.0, 1.0, 0.01, 0.1, kH70);
  const TimeGrid fine(0.0, 1e-4, 1000);  // t = 0.1
  const auto fine_path = fbm::sample_path(fine, kH70, 17, fbm::Method::circulant);

  // coarse path shares the fine values at even nodes
  fbm::FbmPath coarse_path;
  coarse_path.grid = TimeGrid(0.0, 2e-4, 500);
  coarse_path.hurst = kH70;
  coarse_path.seed = 17;
  coarse_path.method = fine_path.method;
  coarse_path.values.resize(501);
  for (std::size_t i = 0; i <= 500; ++i)
    coarse_path.values[i] = fine_path.values[2 * i];

  auto run = [&](const fbm::FbmPath& p, bool exponential) {
    sim::IntegrateOptions opt;
    opt.exponential_linear = exponential;
    return sim::integrate(spec, p, nullptr, 0.0, 0.0, nullptr, opt);
  };
  const auto em_fine = run(fine_path, false);
  const auto ref_fine = run(fine_path, true);
  const auto em_coarse = run(coarse_path, false);
  const auto ref_coarse = run(coarse_path, true);

  double err_fine = 0.0, err_coarse = 0.0;
  for (std::size_t i = 0; i <= 500; ++i) {
    err_coarse = std::max(err_coarse, std::abs(em_coarse.x[i] - ref_coarse.x[i]));
    err_fine = std::max(err_fine, std::abs(em_fine.x[2 * i] - ref_fine.x[2 * i]));
  }
  CHECK(err_fine > 0.0);
  CHECK(err_coarse / err_fine > 1.5);  // order >= 1 halving
}

TEST_CASE("slow variable decouples bitwise when g ignores x") {
  sim::SystemSpec spec = linear_spec(-1.0, 1.0, 0.01, 0.1, kH70);
  spec.g = [](double, double y, double) { return 1.0 - 0.5 * y; };
  const TimeGrid grid(0.0, 1e-3, 300);
  const auto path = fbm::sample_path(grid, kH70, 23, fbm::Method::circulant);
  const auto traj = sim::integrate(spec, path, nullptr, 0.0, 0.2);

  double y = 0.2;
  for (std::size_t i = 0; i <= 300; ++i) {
    CHECK(traj.y[i] == y);
    y = y + (1.0 - 0.5 * y) * 1e-3;
  }
}

TEST_CASE("exit detection") {
  const auto spec = linear_spec(-1.0, 1.0, 0.01, 0.1, kH70);
  const TimeGrid grid(0.0, 1e-3, 100);
  auto zeta = [](double, double) { return 0.62; };

  SUBCASE("zero trajectory never exits") {
    sim::Trajectory traj;
    traj.grid = grid;
    traj.dim = 1;
    traj.x.assign(101, 0.0);
    traj.y.assign(101, 0.0);
    traj.xi.assign(101, 0.0);
    const auto rec = sim::detect_exit(traj, zeta, 0.3);
    CHECK_FALSE(rec.exited);
  }

  SUBCASE("constant offset exits at the first checked node") {
    sim::Trajectory traj;
    traj.grid = grid;
    traj.dim = 1;
    const double h = 0.3;
    const double offset = 2.0 * h * std::sqrt(0.62);
    traj.x.assign(101, offset);
    traj.y.assign(101, 0.0);
    traj.xi.assign(101, offset);
    const auto rec = sim::detect_exit(traj, zeta, h);
    CHECK(rec.exited);
    CHECK(rec.tau_index == 1);
    CHECK(rec.tau_time == doctest::Approx(grid.node(1)));
  }

  SUBCASE("multi-dimensional quadratic form") {
    sim::Trajectory traj;
    traj.grid = TimeGrid(0.0, 0.5, 2);
    traj.dim = 2;
    traj.x = {0, 0, 0.05, 0, 0.5, 0};
    traj.y = {0, 0.5, 1.0};
    traj.xi = traj.x;
    const Eigen::MatrixXd x_star = Eigen::MatrixXd::Identity(2, 2);
    const auto rec = sim::detect_exit_md(traj, x_star, 0.2);
    CHECK(rec.exited);
    CHECK(rec.tau_index == 2);
  }
  (void)spec;
}

TEST_CASE("stiffness guard and blow-up reporting") {
  const auto spec = linear_spec(-1.0, 1.0, 0.01, 0.1, kH70);
  const TimeGrid bad(0.0, 0.01, 10);  // dt far above 0.2 eps / a_low
  const auto path = fbm::sample_path(bad, kH70, 3, fbm::Method::cholesky);
  CHECK_THROWS_AS(sim::integrate(spec, path, nullptr, 0.0, 0.0), ConfigError);

  sim::SystemSpec cubic = linear_spec(-1.0, 1.0, 0.01, 0.1, kH70);
  cubic.kind = sim::Kind::nonlinear_1d;
  cubic.f = [](double x, double, double) { return -x + 1e6 * x * x * x; };
  const TimeGrid grid(0.0, 1e-3, 50);
  const auto p2 = fbm::sample_path(grid, kH70, 3, fbm::Method::cholesky);
  try {
    sim::integrate(cubic, p2, nullptr, 10.0, 0.0);
    CHECK(false);
  } catch (const BlowUpError& e) {
    CHECK(e.step_index >= 1);
  }
}

TEST_CASE("nonlinear system stays close to the linear law for small noise") {
  // f = -x + 0.5 x^2: quadratic remainder with M = 0.5 around x* = 0
  sim::SystemSpec spec = linear_spec(-1.0, 1.0, 0.01, 0.02, kH70);
  spec.kind = sim::Kind::nonlinear_1d;
  spec.f = [](double x, double, double) { return -x + 0.5 * x * x; };

  const TimeGrid grid(0.0, 2e-4, 500);  // t = 0.1
  fbm::Sampler sampler(grid, kH70, fbm::Method::circulant);
  const std::size_t reps = 4000;
  double s2 = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto path = sampler.sample(31, r, 0);
    const auto traj = sim::integrate(spec, path, nullptr, 0.0, 0.0);
    s2 += traj.xi.back() * traj.xi.back();
  }
  const double var = s2 / static_cast<double>(reps);
  const auto coeffs = fou::LinearCoeffs::constant(-1.0, 1.0, 0.01, 0.02, kH70);
  const auto alpha = fou::AlphaIntegral::from_constant(-1.0);
  const double target = fou::variance(0.1, coeffs, alpha, 1e-8);
  CHECK(std::abs(var - target) / target < 0.10);
}

TEST_CASE("climate model preset (full system)") {
  const double hg = 0.7 * manifold::gamma_fn(1.4);
  const auto spec = sim::climate_full_preset(0.01, 0.0, 0.01, kH70, 1.1, 7.5);
  CHECK(spec.a_lin(0.3) == -1.0);
  CHECK(spec.x_star(2.0) == 1.0);
  CHECK(spec.a_low == 1.0);
  CHECK(spec.eps == 0.01);
  CHECK(hg == doctest::Approx(0.6210846722521527).epsilon(1e-12));

  SUBCASE("deterministic run converges to within O(eps) of x = 1") {
    const auto det = sim::climate_full_preset(0.0, 0.0, 0.01, kH70, 1.1, 7.5);
    const TimeGrid grid(0.0, 1e-3, 1000);
    const auto path = fbm::sample_path(grid, kH70, 8, fbm::Method::circulant);
    const auto traj = sim::integrate(det, path, nullptr, 1.0, 0.5);
    // after the transient the state hugs the slow manifold x = 1 + O(eps)
    for (std::size_t i = 500; i <= 1000; ++i)
      CHECK(std::abs(traj.x[i] - 1.0) < 5.0 * 0.01);
  }

  SUBCASE("small noise stays inside B(0.2) here") {
    const auto noisy = sim::climate_full_preset(0.01, 0.0, 0.01, kH70, 1.1, 7.5);
    const TimeGrid grid(0.0, 1e-3, 1000);
    const auto path = fbm::sample_path(grid, kH70, 12, fbm::Method::circulant);
    const auto traj = sim::integrate(noisy, path, nullptr, 1.0, 0.5);
    const auto rec =
        sim::detect_exit(traj, [hg](double, double) { return hg; }, 0.2);
    CHECK_FALSE(rec.exited);
  }
}

TEST_CASE("climate model preset (reduced system)") {
  auto g_zero = [](double, double) { return 0.0; };
  const auto reduced = sim::climate_reduced_preset(
      [](double) { return 0.0; }, 0.01, HurstIndex::checked(0.6), 7.5, g_zero);

  SUBCASE("backbone and stability classification") {
    CHECK(reduced.backbone(1.0) == doctest::Approx(1.0));
    CHECK(reduced.stable_branch(0.3));       // lower branch
    CHECK_FALSE(reduced.stable_branch(0.8)); // middle branch
    CHECK(reduced.stable_branch(1.3));       // upper branch
    // y = 1 crosses all three branches; the solver follows the hint's branch
    CHECK(reduced.branch_solve(1.0, 0.98) == doctest::Approx(1.0).epsilon(1e-10));
    const double mid = (7.5 + std::sqrt(7.5 * 7.5 - 4.0 * 7.5)) / 15.0;
    CHECK(reduced.branch_solve(1.0, 0.9) == doctest::Approx(mid).epsilon(1e-8));
    CHECK(reduced.backbone(reduced.branch_solve(1.0, 0.9)) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("noise-free trajectory tracks the stable branch") {
    const TimeGrid grid(0.0, 0.01, 500);  // fast-time grid, [0, 5]
    const auto path =
        fbm::sample_path(grid, HurstIndex::checked(0.6), 4, fbm::Method::circulant);
    const auto ref = [&reduced](double, double y) {
      return reduced.branch_solve(y, 1.0);
    };
    const auto traj = sim::integrate(reduced.spec, path, nullptr, 1.0, 1.0, ref);
    for (std::size_t i = 100; i <= 500; ++i)
      CHECK(std::abs(traj.xi[i]) < 5.0 * 0.01);
  }

  SUBCASE("periodic noise amplitude is honored") {
    auto sigma2 = [](double t) { return 0.05 * std::sin(10.0 * t) + 0.15; };
    const auto noisy = sim::climate_reduced_preset(sigma2, 0.01,
                                                   HurstIndex::checked(0.6), 7.5,
                                                   g_zero);
    CHECK(noisy.spec.sigma2_fn(0.0) == doctest::Approx(0.15));
    CHECK(noisy.spec.sigma2_fn(M_PI / 20.0) == doctest::Approx(0.20));
  }
}

TEST_CASE("trajectory csv layout") {
  const auto spec = linear_spec(-1.0, 1.0, 0.1, 0.1, kH70);
  const TimeGrid grid(0.0, 0.01, 3);
  const auto path = fbm::sample_path(grid, kH70, 2, fbm::Method::cholesky);
  const auto traj = sim::integrate(spec, path, nullptr, 0.0, 0.0);
  const std::string csv = sim::trajectory_csv(traj);
  CHECK(csv.rfind("t,x,y,xi\n", 0) == 0);
  std::vector<bool> in_b(4, true);
  const std::string csv2 = sim::trajectory_csv(traj, &in_b);
  CHECK(csv2.rfind("t,x,y,xi,in_neighborhood\n", 0) == 0);
}
