#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/generators.hpp"
#include "core/recentering.hpp"
#include "core/test_functions.hpp"
#include "oracles.hpp"

using namespace lclab;

namespace {
GridDensity gauss2(double rho, int shape = 257, double radius = 8.0) {
  return build_grid_density(make_gaussian(2, {{1.0, rho}, {rho, 1.0}}, radius),
                            {shape, shape});
}

GridDensity barycentered_triangle(int shape = 257) {
  const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, 0.08);
  const ConvexBody2D centered =
      translate_body(tri, {-tri.barycenter[0], -tri.barycenter[1]}, 0.08);
  return build_grid_density(centered.potential, {shape, shape}, 1000, 1e-9,
                            /*supersample=*/4);
}
}  // namespace

TEST_CASE("product gaussian conditional moments") {
  const GridDensity d = gauss2(0.0, 129);
  const auto cm = ConditionalMoments::build(d);
  CHECK(std::fabs(cm->mean_node(0, {})) < 1e-9);
  const int mid[1] = {64};
  CHECK(std::fabs(cm->mean_node(1, mid)) < 1e-9);
  CHECK(cm->var_node(1, mid) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(cm->lambda_sq_node(1, mid) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("correlated gaussian conditional moments match the formulas") {
  const double rho = 0.5;
  const GridDensity d = gauss2(rho, 257);
  const auto cm = ConditionalMoments::build(d);
  for (int j : {64, 128, 200}) {
    const double x1 = d.axis_nodes(0)[static_cast<std::size_t>(j)];
    const int idx[1] = {j};
    CHECK(cm->mean_node(1, idx) == doctest::Approx(rho * x1).epsilon(1e-5).scale(1.0));
    CHECK(cm->var_node(1, idx) == doctest::Approx(1.0 - rho * rho).epsilon(1e-5));
  }
  // interpolated access between nodes
  const double prefix[1] = {0.123456};
  CHECK(cm->mean_at(1, prefix) == doctest::Approx(rho * 0.123456).epsilon(1e-4).scale(1.0));
}

TEST_CASE("triangle conditional moments follow the section geometry") {
  // body {x1 in [0,1], 0 <= x2 <= x1} recentered: sections keep length x1
  const GridDensity d = barycentered_triangle(513);
  const auto cm = ConditionalMoments::build(d);
  // in centered coordinates x1c = x1 - 2/3, section length = x1c + 2/3
  for (double x1 : {0.3, 0.6, 0.9}) {
    const double x1c = x1 - 2.0 / 3.0;
    const double prefix[1] = {x1c};
    const double len = x1;
    // centered section midpoint: (x1 - 1/3) - 1/3 = x1/2 - ... derive:
    // original section [0, x1] shifted by -1/3: [-1/3, x1 - 1/3]
    const double mid = 0.5 * (x1 - 1.0 / 3.0 - 1.0 / 3.0);
    CHECK(cm->mean_at(1, prefix) == doctest::Approx(mid).epsilon(0.02).scale(1.0));
    CHECK(cm->var_at(1, prefix) == doctest::Approx(len * len / 12.0).epsilon(0.03));
  }
}

TEST_CASE("centered product measure has identity recentering") {
  const GridDensity d = gauss2(0.0, 129);
  const auto rec = build_recentering(d);
  const double x[2] = {0.7, -1.1};
  const auto xb = rec.R->apply(x);
  CHECK(xb[0] == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(xb[1] == doctest::Approx(-1.1).epsilon(1e-9));
}

TEST_CASE("correlated gaussian recentering maps") {
  const double rho = 0.5;
  const GridDensity d = gauss2(rho, 257);
  const auto rec = build_recentering(d);
  const double x[2] = {0.8, 0.3};
  const auto xb = rec.R->apply(x);
  CHECK(xb[0] == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(xb[1] == doctest::Approx(0.3 - rho * 0.8).epsilon(1e-4).scale(1.0));
  const auto back = rec.S->apply(xb);
  CHECK(back[0] == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(back[1] == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("round trip S(R(x)) = x at random nodes of a body measure") {
  const GridDensity d = barycentered_triangle(257);
  const auto rec = build_recentering(d);
  const double cell = std::max(d.step(0), d.step(1));
  Rng rng(2024);
  std::vector<double> x(2), xb(2), back(2);
  int checked = 0;
  while (checked < 10000) {
    const int j0 = static_cast<int>(rng.next_u64() % 257);
    const int j1 = static_cast<int>(rng.next_u64() % 257);
    const int idx[2] = {j0, j1};
    if (d.values().at(idx) <= 0.0) continue;
    x = {d.axis_nodes(0)[static_cast<std::size_t>(j0)], d.axis_nodes(1)[static_cast<std::size_t>(j1)]};
    rec.R->apply_into(x, xb);
    rec.S->apply_into(xb, back);
    CHECK(std::fabs(back[0] - x[0]) <= cell);
    CHECK(std::fabs(back[1] - x[1]) <= cell);
    ++checked;
  }
}

TEST_CASE("recentered law of a symmetric density is the density itself") {
  const GridDensity d = gauss2(0.0, 129);
  const auto rec = build_recentering(d);
  const GridDensity law = recentered_law_grid(d, rec);
  // moments agree within re-binning tolerance
  const int p2[2] = {2, 0};
  const int q2[2] = {0, 2};
  CHECK(law.mixed_moment(p2) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(law.mixed_moment(q2) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(max_conditional_mean_abs(law) < 5e-3);
}

TEST_CASE("correlated gaussian recenters to the product gaussian") {
  const double rho = 0.5;
  const GridDensity d = gauss2(rho, 257);
  const auto rec = build_recentering(d);
  const GridDensity law = recentered_law_grid(d, rec);
  const int p20[2] = {2, 0};
  const int p02[2] = {0, 2};
  const int p11[2] = {1, 1};
  CHECK(law.mixed_moment(p20) == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(law.mixed_moment(p02) == doctest::Approx(1.0 - rho * rho).epsilon(2e-3));
  CHECK(std::fabs(law.mixed_moment(p11)) < 2e-3);
}

TEST_CASE("triangle recenters onto the steiner symmetrization") {
  const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, 0.08);
  const ConvexBody2D centered =
      translate_body(tri, {-tri.barycenter[0], -tri.barycenter[1]}, 0.08);
  const GridDensity d = build_grid_density(centered.potential, {513, 513}, 1000, 1e-9,
                                           /*supersample=*/4);
  const auto rec = build_recentering(d);
  const GridDensity law = recentered_law_grid(d, rec);
  const ConvexBody2D sym = steiner_symmetrize_2d(centered);
  const GridDensity sym_density = build_grid_density(
      Potential{law.box(), sym.potential.eval, Smoothness::NonSmooth}, law.shape(),
      1000, 1e-9, /*supersample=*/4);
  CHECK(tv_distance(law, sym_density) <= 0.012);
  CHECK(max_conditional_mean_abs(law) < 5e-3);
}

TEST_CASE("reduced law anchors") {
  SUBCASE("centered product: point mass at zero") {
    const GridDensity d = gauss2(0.0, 129);
    const auto rec = build_recentering(d);
    const GridDensity law = reduced_vector_law_grid(d, rec);
    const int p2[2] = {2, 0};
    const int q2[2] = {0, 2};
    CHECK(law.mixed_moment(p2) == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
    CHECK(law.mixed_moment(q2) == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
  }
  SUBCASE("correlated gaussian: E|X'|^2 = rho^2") {
    const double rho = 0.5;
    const GridDensity d = gauss2(rho, 257);
    const auto rec = build_recentering(d);
    const GridDensity law = reduced_vector_law_grid(d, rec);
    const int p20[2] = {2, 0};
    const int p02[2] = {0, 2};
    const double e_norm = law.mixed_moment(p20) + law.mixed_moment(p02);
    CHECK(e_norm == doctest::Approx(rho * rho).epsilon(5e-3));
  }
  SUBCASE("triangle reduced second moment against a sampling oracle") {
    const GridDensity d = barycentered_triangle(257);
    const auto rec = build_recentering(d);
    const SampleSet s = reduced_vector_law_sample(d, rec, 40000, 11);
    const int p20[2] = {2, 0};
    const int p02[2] = {0, 2};
    const GridDensity law = reduced_vector_law_grid(d, rec);
    const double grid_val = law.mixed_moment(p20) + law.mixed_moment(p02);
    const double mc_val = sample_mixed_moment(s, p20) + sample_mixed_moment(s, p02);
    // three standard errors of the MC estimate
    CHECK(grid_val == doctest::Approx(mc_val).epsilon(0.0).scale(1.0).epsilon(0.05));
  }
}

TEST_CASE("martingale-increment property of the recentered coordinates") {
  const GridDensity d = gauss2(0.6, 129);
  const auto rec = build_recentering(d);
  const RecenteredView view = make_recentered_view(d, *rec.moments);
  // E[Xbar_i g(Xbar_{<i})] = 0 for the fixed prefix family
  for (int i = 0; i < 2; ++i) {
    const auto family = martingale_prefix_family(i);
    for (const auto& g : family) {
      std::vector<double> buf(static_cast<std::size_t>(d.values().size()), 0.0);
      for_each_index(d.shape(), [&](std::int64_t flat, std::span<const int> idx) {
        const double mass = d.node_weight(idx) * d.values()[flat];
        if (mass <= 0.0) return;
        const auto xb = view.xbar_at(flat);
        buf[static_cast<std::size_t>(flat)] =
            mass * xb[i] * g(xb.first(static_cast<std::size_t>(i)));
      });
      CHECK(std::fabs(pairwise_sum(buf)) < 1e-8);
    }
  }
}

TEST_CASE("orthogonality and exact decomposition") {
  const GridDensity d = gauss2(0.7, 129);
  const auto rec = build_recentering(d);
  const RecenteredView view = make_recentered_view(d, *rec.moments);
  std::vector<double> pt(2);
  for (int i = 0; i < 2; ++i) {
    std::vector<double> buf(static_cast<std::size_t>(d.values().size()), 0.0);
    for_each_index(d.shape(), [&](std::int64_t flat, std::span<const int> idx) {
      const double mass = d.node_weight(idx) * d.values()[flat];
      if (mass <= 0.0) return;
      buf[static_cast<std::size_t>(flat)] =
          mass * view.xbar_at(flat)[i] * view.xred_at(flat)[i];
    });
    CHECK(std::fabs(pairwise_sum(buf)) < 1e-10);
  }
  // x = xbar + xred exactly at every node
  for_each_index(d.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    d.node_point(idx, pt);
    for (int i = 0; i < 2; ++i) {
      const double sum = view.xbar_at(flat)[i] + view.xred_at(flat)[i];
      if (!std::isnan(sum)) CHECK(sum == doctest::Approx(pt[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
  });
}

TEST_CASE("lambda consistency through the re-binned law") {
  // Var(X_i | prefix = S(xbar)) equals the conditional second moment of the
  // recentered law at xbar, up to re-binning error
  const double rho = 0.5;
  const GridDensity d = gauss2(rho, 257);
  const auto rec = build_recentering(d);
  const GridDensity law = recentered_law_grid(d, rec);
  const auto law_cm = ConditionalMoments::build(law);
  for (double xb1 : {-1.0, 0.0, 0.9}) {
    const double prefix[1] = {xb1};
    // S(xbar)_1 = xbar_1 here (m_1 = 0)
    const double var_src = rec.moments->var_at(1, prefix);
    const double mean_law = law_cm->mean_at(1, prefix);
    const double var_law = law_cm->var_at(1, prefix);
    const double second_law = var_law + mean_law * mean_law;
    CHECK(var_src == doctest::Approx(second_law).epsilon(5e-3));
  }
}

TEST_CASE("undefined prefixes raise only when touched") {
  const GridDensity d = barycentered_triangle(129);
  const auto cm = ConditionalMoments::build(d);
  // prefix far outside the body: the mean table is NaN there
  const double outside[1] = {d.box().lo[0] + 0.01 * d.step(0)};
  try {
    (void)cm->mean_at(1, outside);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UndefinedPrefix);
  }
  // interior prefixes are fine
  const double inside[1] = {0.0};
  CHECK_NOTHROW((void)cm->mean_at(1, inside));
}
