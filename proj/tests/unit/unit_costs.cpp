#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "core/costs.hpp"
#include "core/generators.hpp"
#include "oracles.hpp"

using namespace lclab;

namespace {
std::shared_ptr<GridDensity> gauss2(double rho, int shape = 257) {
  return std::make_shared<GridDensity>(
      build_grid_density(make_gaussian(2, {{1.0, rho}, {rho, 1.0}}, 8.0), {shape, shape}));
}

std::shared_ptr<GridDensity> gauss1(double var, double mean = 0.0, int shape = 2049) {
  const Potential pot{Box::cube(1, 8.0),
                      [var, mean](std::span<const double> x) {
                        const double d = x[0] - mean;
                        return 0.5 * d * d / var;
                      },
                      Smoothness::C1};
  return std::make_shared<GridDensity>(build_grid_density(pot, {shape}));
}
}  // namespace

TEST_CASE("n_cost anchors") {
  CHECK(n_cost(0.0) == 0.0);
  CHECK(n_cost(1.0) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-15));
  CHECK(n_cost(-1.0) == n_cost(1.0));
  CHECK(n_cost(kInf) == kInf);
  // convex with N(t) <= t^2/2, and N(t) >= c t^2 on |t| <= 2/sqrt(6)
  const double c_floor = n_quadratic_floor(2.0 / std::sqrt(6.0));
  CHECK(c_floor == doctest::Approx(0.3290).epsilon(1e-3));
  for (double t = -3.0; t <= 3.0; t += 0.01) {
    CHECK(n_cost(t) <= 0.5 * t * t + 1e-15);
    const double h = 1e-4;
    CHECK(n_cost(t - h) - 2.0 * n_cost(t) + n_cost(t + h) >= -1e-12);
    if (std::fabs(t) <= 2.0 / std::sqrt(6.0))
      CHECK(n_cost(t) >= c_floor * t * t - 1e-12);
  }
}

TEST_CASE("n_cost inverse round trip") {
  for (double y : {1e-4, 0.01, 0.3, 1.0, 5.0}) {
    const double v = n_cost_inverse(y);
    CHECK(n_cost(v) == doctest::Approx(y).epsilon(1e-10));
  }
}

TEST_CASE("cost_eval anchors") {
  auto mu = gauss2(0.0, 129);
  const auto rec = build_recentering(*mu);
  const CostSpec sum = CostSpec::from(rec, CostVariant::SumForm);
  const CostSpec norm = CostSpec::from(rec, CostVariant::NormForm);

  const double x[2] = {0.0, 0.0};
  CHECK(cost_eval(sum, x, x) == 0.0);
  CHECK(cost_eval(norm, x, x) == 0.0);

  // displacement e_1 with lambda_1^2 = 1/3: (1/16) N(1/sqrt(3))
  const double y[2] = {1.0, 0.0};
  const double lam = std::sqrt(1.0 / 3.0);
  const double expect = n_cost(lam) / 16.0;
  CHECK(expect == doctest::Approx(0.0075962).epsilon(1e-4));
  CHECK(cost_eval(sum, x, y) == doctest::Approx(expect).epsilon(1e-4));
  // single-coordinate displacement: both variants coincide
  CHECK(cost_eval(norm, x, y) == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("sum form dominates norm form") {
  auto mu = gauss2(0.5, 129);
  const auto rec = build_recentering(*mu);
  const CostSpec sum = CostSpec::from(rec, CostVariant::SumForm);
  const CostSpec norm = CostSpec::from(rec, CostVariant::NormForm);
  Rng rng(7);
  std::vector<double> x(2), y(2);
  for (int k = 0; k < 10000; ++k) {
    for (int i = 0; i < 2; ++i) {
      x[static_cast<std::size_t>(i)] = rng.uniform(-3.0, 3.0);
      y[static_cast<std::size_t>(i)] = rng.uniform(-3.0, 3.0);
    }
    CHECK(cost_eval(sum, x, y) - cost_eval(norm, x, y) >= -1e-12);
  }
}

TEST_CASE("relative entropy anchors") {
  auto mu = gauss1(1.0);
  CHECK(relative_entropy(*mu, *mu) == doctest::Approx(0.0).epsilon(1e-10));
  auto shifted = gauss1(1.0, 1.0);
  CHECK(relative_entropy(*shifted, *mu) == doctest::Approx(0.5).epsilon(2e-4));
  auto narrow = gauss1(0.25);
  const double expect = oracle::gaussian_kl(0.0, 0.25, 0.0, 1.0);
  CHECK(expect == doctest::Approx(0.3181472).epsilon(1e-6));
  CHECK(relative_entropy(*narrow, *mu) == doctest::Approx(expect).epsilon(2e-4));
}

TEST_CASE("entropy is nonnegative, zero only at equality") {
  auto mu = gauss2(0.0, 65);
  auto nu = gauss2(0.4, 65);
  CHECK(relative_entropy(*nu, *mu) > 1e-3);
  CHECK(relative_entropy(*mu, *mu) <= 1e-10);
}

TEST_CASE("entropy across meshes resamples to the finer grid") {
  auto coarse = gauss1(1.0, 0.0, 513);
  auto fine = gauss1(1.0, 0.3, 1025);
  const double d = relative_entropy(*fine, *coarse);
  CHECK(d == doctest::Approx(0.045).epsilon(0.02));
}

TEST_CASE("coupling cost anchors") {
  auto mu = gauss2(0.0, 129);
  const auto rec = build_recentering(*mu);
  const CostSpec spec = CostSpec::from(rec, CostVariant::SumForm);

  SUBCASE("nu = mu costs nothing") {
    CHECK(knothe_coupling_cost(mu, mu, spec) == doctest::Approx(0.0).epsilon(1e-8));
  }
  SUBCASE("translation recenters away: zero cost below entropy") {
    const Potential shifted{Box::cube(2, 8.0),
                            [](std::span<const double> x) {
                              return 0.5 * ((x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1]);
                            },
                            Smoothness::C1};
    auto nu = std::make_shared<GridDensity>(build_grid_density(shifted, {129, 129}));
    const double cost = knothe_coupling_cost(mu, nu, spec);
    const double entropy = relative_entropy(*nu, *mu);
    CHECK(cost >= 0.0);
    CHECK(cost <= entropy + 1e-6);
    CHECK(entropy == doctest::Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("product target differing in coordinate 1 only") {
    const Potential aniso{Box::cube(2, 8.0),
                          [](std::span<const double> x) {
                            return 0.5 * (x[0] * x[0] / 0.49 + x[1] * x[1]);
                          },
                          Smoothness::C1};
    auto nu = std::make_shared<GridDensity>(build_grid_density(aniso, {129, 129}));
    const double cost = knothe_coupling_cost(mu, nu, spec);
    // manual: only the i=1 term contributes, (1/16) E N(lambda (x - 0.7x))
    const double lam = std::sqrt(1.0 / 3.0);
    const double manual = oracle::simpson(
        [&](double x) {
          return oracle::normal_pdf(x) * lclab::n_cost(lam * 0.3 * x) / 16.0;
        },
        -8.0, 8.0);
    CHECK(cost == doctest::Approx(manual).epsilon(1e-3));
  }
}

TEST_CASE("coupling cost stays below entropy across a pair family") {
  const std::vector<std::pair<std::shared_ptr<GridDensity>, std::shared_ptr<GridDensity>>>
      pairs = {
          {gauss1(1.0), gauss1(0.64)},
          {gauss1(1.0), gauss1(1.0, 0.7)},
          {gauss2(0.0, 129), gauss2(0.5, 129)},
          {gauss2(0.2, 129), gauss2(0.7, 129)},
      };
  for (const auto& [mu, nu] : pairs) {
    const auto rec = build_recentering(*mu);
    const CostSpec spec = CostSpec::from(rec, CostVariant::SumForm);
    const double cost = knothe_coupling_cost(mu, nu, spec);
    const double entropy = relative_entropy(*nu, *mu);
    CHECK(cost >= 0.0);
    CHECK(cost <= entropy + 1e-6);
  }
}

TEST_CASE("w2 anchors") {
  SUBCASE("identical measures") {
    auto mu = gauss1(1.0);
    const auto w = w2_upper_bound(mu, mu);
    CHECK(w.exact);
    CHECK(w.value == doctest::Approx(0.0).epsilon(1e-8));
  }
  SUBCASE("1D translation") {
    auto mu = gauss1(1.0);
    auto nu = gauss1(1.0, 0.75);
    const auto w = w2_upper_bound(mu, nu);
    CHECK(w.exact);
    CHECK(w.value == doctest::Approx(0.75).epsilon(1e-4));
  }
  SUBCASE("uniform stretch: W2^2 = 1/3") {
    const Potential u1{Box({0.0}, {1.0}), [](std::span<const double>) { return 0.0; },
                       Smoothness::C1};
    const Potential u2{Box({0.0}, {2.0}), [](std::span<const double>) { return 0.0; },
                       Smoothness::C1};
    auto a = std::make_shared<GridDensity>(build_grid_density(u1, {2049}));
    auto b = std::make_shared<GridDensity>(build_grid_density(u2, {2049}));
    const auto w = w2_upper_bound(a, b);
    CHECK(w.value * w.value == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  }
  SUBCASE("2D flag is an upper bound") {
    auto mu = gauss2(0.0, 65);
    auto nu = gauss2(0.5, 65);
    const auto w = w2_upper_bound(mu, nu);
    CHECK_FALSE(w.exact);
    CHECK(w.value > 0.0);
  }
}

TEST_CASE("degenerate weights follow the extended-real conventions") {
  // a near-degenerate conditional: lambda_sq huge but finite stays finite;
  // the conventions are exercised directly through n_cost
  CHECK(n_cost(kInf) == kInf);
  const CostSpec spec{};
  (void)spec;
  // 0 * inf = 0 convention in cost evaluation
  auto mu = gauss2(0.0, 65);
  const auto rec = build_recentering(*mu);
  const CostSpec sum = CostSpec::from(rec, CostVariant::SumForm);
  const double x[2] = {0.5, 0.5};
  CHECK(cost_eval(sum, x, x) == 0.0);
}
