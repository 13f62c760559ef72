#include "fsfbm/bounds.hpp"

#include <cmath>

#include "doctest.h"
#include "fsfbm/errors.hpp"
#include "fsfbm/manifold.hpp"

using namespace fsfbm;
using namespace fsfbm::bounds;

namespace {
BoundInputs base_inputs() {
  BoundInputs in;
  in.t = 1.0;
  in.h = 0.6;
  in.sigma = 0.1;
  in.eps = 0.01;
  in.hurst = 0.7;
  in.alpha_t = 1.0;
  in.a_plus = 1.0;
  in.m = 1;
  in.f_plus = 1.0;
  in.a_low = 1.0;
  in.big_m = 0.0;
  in.zeta_plus = 1.0;
  in.zeta_minus = 1.0;
  return in;
}
}  // namespace

TEST_CASE("single time bound") {
  CHECK(single_time_bound(1.0, 1.0).value ==
        doctest::Approx(0.6065306597126334).epsilon(1e-14));
  CHECK(single_time_bound(3.0, 1.0).value ==
        doctest::Approx(0.011108996538242306).epsilon(1e-13));
  // h -> 0 pushes the value to 1, which the report must flag as vacuous
  const auto at_zero = single_time_bound(1e-9, 1.0);
  CHECK(at_zero.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(at_zero.vacuous == (at_zero.value >= 1.0));
  CHECK(single_time_bound(0.5, 1.0).vacuous == false);
  CHECK_THROWS(single_time_bound(0.0, 1.0));
}

TEST_CASE("bernstein bound") {
  CHECK(bernstein_exit_bound(1.0, 1.0).value ==
        doctest::Approx(0.6065306597126334).epsilon(1e-14));
  CHECK(bernstein_exit_bound(2.0, 0.5).value ==
        doctest::Approx(0.01831563888873418).epsilon(1e-13));
  // c -> 0 limit approaches 1
  CHECK(bernstein_exit_bound(1e-12, 1.0).value == doctest::Approx(1.0));
}

TEST_CASE("variant 1") {
  auto in = base_inputs();  // alpha=1, eps=0.01, h/sigma=6
  const auto rep = variant1_bound(in);
  // 2e * ceil(100 * 36) * e^{-18}
  CHECK(rep.value == doctest::Approx(2.9807551575253233e-4).epsilon(1e-12));
  CHECK_FALSE(rep.vacuous);
  CHECK(rep.dropped_terms.size() == 1);

  // vanishing alpha keeps the ceiling at 1
  in.alpha_t = 1e-300;
  const auto small = variant1_bound(in);
  CHECK(small.value ==
        doctest::Approx(2.0 * M_E * std::exp(-18.0)).epsilon(1e-12));

  in = base_inputs();
  in.h = 1.0;  // h/sigma = 10
  CHECK(variant1_bound(in).value ==
        doctest::Approx(1.0485771326726928e-17).epsilon(1e-10));
}

TEST_CASE("variant 2") {
  auto in = base_inputs();
  in.k_const = 1.0;
  const auto rep = variant2_bound(in);
  CHECK(rep.value == doctest::Approx(5.2242400009913219e-9).epsilon(1e-10));
  CHECK(rep.dropped_terms.size() == 2);

  in.t = 0.0;
  CHECK(variant2_bound(in).value == 0.0);

  in = base_inputs();
  in.k_const = 1.0;
  in.h = 1e-12;
  CHECK(variant2_bound(in).value < 1e-12);

  in.k_const.reset();
  CHECK_THROWS_AS(variant2_bound(in), ConfigError);
}

TEST_CASE("nonlinear variant 1") {
  SUBCASE("M = 0 reduces to variant 1 bitwise") {
    auto in = base_inputs();
    in.big_m = 0.0;
    CHECK(nonlinear_variant1_bound(in).value == variant1_bound(in).value);
  }
  SUBCASE("kappa arithmetic") {
    auto in = base_inputs();
    in.big_m = 1.0;
    in.h = 0.1;
    in.eps = 0.011;  // keeps the ceiling argument away from an exact integer
    const auto rep = nonlinear_variant1_bound(in);
    const double kappa =
        1.0 - 2.0 * in.big_m * in.h * in.zeta_plus / (in.a_low * std::sqrt(in.zeta_minus));
    CHECK(kappa == doctest::Approx(0.8).epsilon(1e-15));
    const double ratio = kappa * kappa * in.h * in.h / (in.sigma * in.sigma);
    const double expected = 2.0 * M_E * std::ceil(in.alpha_t / in.eps * ratio) *
                            std::exp(-ratio / 2.0);
    CHECK(rep.value == doctest::Approx(expected).epsilon(1e-13));
  }
  SUBCASE("validity boundary") {
    auto in = base_inputs();
    in.big_m = 1.0;
    in.h = 0.5;  // kappa = 1 - 2*1*0.5 = 0
    CHECK_THROWS_AS(nonlinear_variant1_bound(in), std::domain_error);
  }
}

TEST_CASE("multi-dimensional general bound") {
  SUBCASE("single term") {
    auto in = base_inputs();
    in.k_const = 1.0;
    in.m = 1;
    in.lambda_weights = {1.0};
    const double d = 0.62;
    const auto rep = md_general_bound(in, {d});
    const double expected = 1.0 * std::pow(std::sqrt(in.h) * d, 1.0 / 0.7) *
                            std::exp(-in.h * in.h / (2.0 * in.sigma * in.sigma));
    CHECK(rep.value == doctest::Approx(expected).epsilon(1e-13));
  }
  SUBCASE("two equal components at half weight") {
    auto in = base_inputs();
    in.k_const = 2.0;
    in.m = 2;
    const double d = 0.5;
    const auto rep = md_general_bound(in, {d, d});  // default lambda = 1/2
    const double one = 2.0 * std::pow(std::sqrt(0.5 * in.h) * d, 1.0 / 0.7) *
                       std::exp(-0.5 * in.h * in.h / (2.0 * in.sigma * in.sigma));
    CHECK(rep.value == doctest::Approx(2.0 * one).epsilon(1e-13));
  }
  SUBCASE("t = 0 collapses to zero") {
    auto in = base_inputs();
    in.k_const = 1.0;
    in.t = 0.0;
    CHECK(md_general_bound(in, {0.5}).value == 0.0);
  }
  SUBCASE("weight validation") {
    auto in = base_inputs();
    in.k_const = 1.0;
    in.m = 2;
    in.lambda_weights = {0.7, 0.7};
    CHECK_THROWS(md_general_bound(in, {0.5, 0.5}));
    in.lambda_weights = {1.2, -0.2};
    CHECK_THROWS(md_general_bound(in, {0.5, 0.5}));
  }
  SUBCASE("alternative prefactor reading is disclosed and differs") {
    auto in = base_inputs();
    in.k_const = 1.0;
    in.m = 1;
    in.lambda_weights = {1.0};
    const auto lit = md_general_bound(in, {0.62});
    in.md_alt_prefactor = true;
    const auto alt = md_general_bound(in, {0.62});
    CHECK(lit.value != alt.value);
    bool found = false;
    for (const auto& s : alt.dropped_terms)
      if (s.find("sqrt(d*_k)") != std::string::npos) found = true;
    CHECK(found);
  }
}

TEST_CASE("multi-dimensional symmetric bound") {
  SUBCASE("m = 1 equals variant 1 with alpha = a+ t bitwise") {
    auto in = base_inputs();
    in.m = 1;
    in.a_plus = 2.3;
    in.t = 0.4;
    auto v1 = in;
    v1.alpha_t = in.a_plus * in.t;
    CHECK(md_symmetric_bound(in).value == variant1_bound(v1).value);
  }
  SUBCASE("m = 4 weakening makes the example vacuous") {
    auto in = base_inputs();
    in.m = 4;
    in.a_plus = 2.0;
    in.t = 0.5;  // a+ t = 1
    const auto rep = md_symmetric_bound(in);
    CHECK(rep.value == doctest::Approx(217.42116064069321).epsilon(1e-10));
    CHECK(rep.vacuous);
  }
  SUBCASE("large h decays to zero") {
    auto in = base_inputs();
    in.m = 2;
    in.h = 3.0;  // h/sigma = 30
    CHECK(md_symmetric_bound(in).value < 1e-60);
  }
}

TEST_CASE("bounds are nonincreasing in h where informative") {
  auto in = base_inputs();
  double prev = 1e300;
  for (double h = 0.35; h <= 1.2; h += 0.05) {
    in.h = h;
    const auto rep = variant1_bound(in);
    if (rep.value <= 1.0) {
      CHECK(rep.value <= prev * (1.0 + 1e-12));
      prev = rep.value;
    }
  }
  // nondecreasing in t (through alpha) and sigma
  in = base_inputs();
  const double v_small_t = variant1_bound(in).value;
  in.alpha_t = 2.0;
  CHECK(variant1_bound(in).value >= v_small_t);
  in = base_inputs();
  const double v_small_sigma = variant1_bound(in).value;
  in.sigma = 0.12;
  CHECK(variant1_bound(in).value >= v_small_sigma);
}

TEST_CASE("variant 1 dominates the single-exit-level bernstein bound") {
  auto in = base_inputs();
  for (double h : {0.3, 0.5, 0.8, 1.0}) {
    for (double sigma : {0.05, 0.1, 0.2}) {
      in.h = h;
      in.sigma = sigma;
      const double v1 = variant1_bound(in).value;
      const double bern = bernstein_exit_bound(h / sigma, 1.0).value;
      CHECK(v1 >= bern);
    }
  }
}

TEST_CASE("report serialization") {
  auto in = base_inputs();
  const auto rep = variant1_bound(in);
  const auto j = rep.to_json();
  CHECK(j["formula_id"] == "variant1");
  CHECK(j["vacuous"] == false);
  CHECK(j["value"].get<double>() == rep.value);
  CHECK(j["dropped_terms"].size() == 1);
  CHECK(j["inputs"]["eps"] == 0.01);

  auto in4 = base_inputs();
  in4.m = 4;
  in4.a_plus = 2.0;
  in4.t = 0.5;
  CHECK(md_symmetric_bound(in4).to_json()["vacuous"] == true);
}

TEST_CASE("formula names round-trip") {
  for (FormulaId id : {FormulaId::single_time, FormulaId::bernstein,
                       FormulaId::variant1, FormulaId::variant2,
                       FormulaId::nonlinear_variant1, FormulaId::md_general,
                       FormulaId::md_symmetric})
    CHECK(formula_from_name(formula_name(id)) == id);
  CHECK_THROWS_AS(formula_from_name("nope"), ConfigError);
}
