#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/generators.hpp"
#include "core/recentering.hpp"
#include "oracles.hpp"

using namespace lclab;

TEST_CASE("gaussian generator") {
  SUBCASE("identity covariance gives a product measure") {
    const GridDensity d = build_grid_density(
        make_gaussian(2, {{1.0, 0.0}, {0.0, 1.0}}, 8.0), {129, 129});
    const int p11[2] = {1, 1};
    CHECK(std::fabs(d.mixed_moment(p11)) < 1e-9);
  }
  SUBCASE("correlated covariance reproduces the conditional mean") {
    const GridDensity d = build_grid_density(
        make_gaussian(2, {{1.0, 0.5}, {0.5, 1.0}}, 8.0), {257, 257});
    const auto cm = ConditionalMoments::build(d);
    const double prefix[1] = {1.0};
    CHECK(cm->mean_at(1, prefix) == doctest::Approx(0.5).epsilon(1e-4));
  }
  SUBCASE("near-singular covariance is rejected") {
    try {
      (void)make_gaussian(2, {{1.0, 1.0 - 5e-9}, {1.0 - 5e-9, 1.0}}, 8.0);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    }
  }
}

TEST_CASE("convex body generator") {
  SUBCASE("triangle barycenter") {
    const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}});
    CHECK(tri.barycenter[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(tri.barycenter[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(tri.area == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("centered square is unconditional: Xbar = X") {
    const ConvexBody2D sq = make_convex_body_2d(
        {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}});
    const GridDensity d = build_grid_density(sq.potential, {129, 129}, 1000, 1e-9, 4);
    const auto check = martingale_increment_check(d, 1e-6, "square");
    CHECK(check.worst_violation < 1e-8);
  }
  SUBCASE("collinear points degenerate") {
    try {
      (void)make_convex_body_2d({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}});
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateHull);
    }
  }
}

TEST_CASE("steiner symmetrization") {
  SUBCASE("centered square maps to itself") {
    const ConvexBody2D sq = make_convex_body_2d(
        {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}});
    const ConvexBody2D sym = steiner_symmetrize_2d(sq);
    CHECK(sym.area == doctest::Approx(4.0).epsilon(1e-9));
    for (const auto& v : sym.hull) CHECK(std::fabs(std::fabs(v[1]) - 1.0) < 1e-9);
  }
  SUBCASE("barycentered triangle maps to the derived triangle") {
    const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}});
    const ConvexBody2D centered = translate_body(tri, {-tri.barycenter[0], -tri.barycenter[1]});
    const ConvexBody2D sym = steiner_symmetrize_2d(centered);
    // expected vertices (-2/3, 0), (1/3, 1/2), (1/3, -1/2)
    REQUIRE(sym.hull.size() == 3);
    auto has_vertex = [&](double x, double y) {
      for (const auto& v : sym.hull)
        if (std::fabs(v[0] - x) < 1e-9 && std::fabs(v[1] - y) < 1e-9) return true;
      return false;
    };
    CHECK(has_vertex(-2.0 / 3.0, 0.0));
    CHECK(has_vertex(1.0 / 3.0, 0.5));
    CHECK(has_vertex(1.0 / 3.0, -0.5));
    CHECK(sym.area == doctest::Approx(0.5).epsilon(1e-9));
    // symmetric under x2 -> -x2 exactly
    for (const auto& v : sym.hull) CHECK(has_vertex(v[0], -v[1]));
  }
  SUBCASE("non-barycentered bodies are rejected") {
    const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}});
    try {
      (void)steiner_symmetrize_2d(tri);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotBarycentered);
    }
  }
}

TEST_CASE("martingale increment check") {
  SUBCASE("centered product passes") {
    const GridDensity d = build_grid_density(make_laplace(2, {1.0, 1.0}, 12.0), {129, 129});
    const auto check = martingale_increment_check(d, 1e-6, "lap2");
    CHECK(check.worst_violation < 1e-8);
    CHECK(check.report.pass);
  }
  SUBCASE("non-barycentered triangle fails with a reported violation") {
    const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}});
    const GridDensity d = build_grid_density(tri.potential, {129, 129}, 1000, 1e-9, 4);
    const auto check = martingale_increment_check(d, 1e-6, "tri");
    CHECK(check.worst_violation > 0.1);  // m2(x1) = x1/2 is far from zero
    CHECK_FALSE(check.report.pass);
  }
  SUBCASE("steiner-symmetrized barycentered body passes") {
    const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}});
    const ConvexBody2D centered = translate_body(tri, {-tri.barycenter[0], -tri.barycenter[1]});
    const ConvexBody2D sym = steiner_symmetrize_2d(centered);
    const GridDensity d = build_grid_density(sym.potential, {257, 257}, 1000, 1e-9, 4);
    const auto check = martingale_increment_check(d, 5e-3, "sym");
    CHECK(check.worst_violation < 5e-3);
    CHECK(check.report.pass);
  }
}

TEST_CASE("convolution stability of the martingale property") {
  const GridDensity a = build_grid_density(make_gaussian(1, {{1.0}}, 6.0), {129});
  const GridDensity b = build_grid_density(make_laplace(1, {0.5}, 6.0), {129});
  const GridDensity conv = convolve_grids(a, b, {257});
  CHECK(conv.mass() == doctest::Approx(1.0).epsilon(1e-9));
  // variance adds under convolution
  const int p2[1] = {2};
  CHECK(conv.mixed_moment(p2) ==
        doctest::Approx(a.mixed_moment(p2) + b.mixed_moment(p2)).epsilon(2e-3));
  const auto check = martingale_increment_check(conv, 1e-6, "conv");
  CHECK(check.worst_violation < 1e-6);
}

TEST_CASE("embedding construction") {
  SUBCASE("1D components embed into a passing 2D law on the grid") {
    std::vector<GridDensity> components;
    components.push_back(build_grid_density(make_gaussian(1, {{1.0}}, 6.0), {129}));
    components.push_back(build_grid_density(make_laplace(1, {0.7}, 6.0), {129}));
    const auto res = embed_sum_construction(components, EmbedMode::Grid, {129, 129});
    REQUIRE(res.law.has_value());
    CHECK(res.check.worst_violation < 5e-3);
    // Y = (X_2^{(2)}, X_1^{(1)}-ish sums): per-coordinate variances match the
    // embedded components
    const int p20[2] = {2, 0};
    const int p02[2] = {0, 2};
    const int s2[1] = {2};
    CHECK(res.law->mixed_moment(p20) ==
          doctest::Approx(components[1].mixed_moment(s2)).epsilon(5e-3));
    CHECK(res.law->mixed_moment(p02) ==
          doctest::Approx(components[0].mixed_moment(s2)).epsilon(5e-3));
  }
  SUBCASE("k=2 with steiner-symmetric triangles gives a passing 3D law by sampling") {
    const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}});
    const ConvexBody2D centered = translate_body(tri, {-tri.barycenter[0], -tri.barycenter[1]});
    const ConvexBody2D sym = steiner_symmetrize_2d(centered);
    const GridDensity d = build_grid_density(sym.potential, {257, 257}, 1000, 1e-9, 4);
    std::vector<GridDensity> components = {d, d, d};
    const auto res = embed_sum_construction(components, EmbedMode::Sample, {}, 60000,
                                            2027, 5e-3);
    REQUIRE(res.samples.has_value());
    CHECK(res.samples->count() == 60000);
    CHECK(res.check.worst_violation < 2e-2);  // MC noise at this count
    CHECK(res.check.report.pass);
  }
  SUBCASE("components that are not martingale increments are rejected") {
    const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}});
    const GridDensity bad = build_grid_density(tri.potential, {129, 129}, 1000, 1e-9, 4);
    std::vector<GridDensity> components = {bad, bad, bad};
    try {
      (void)embed_sum_construction(components, EmbedMode::Sample, {}, 1000, 1, 1e-6);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ComponentNotMartingale);
    }
  }
}

TEST_CASE("uniform cube generator is unconditional") {
  const GridDensity d = build_grid_density(make_uniform_cube(2, 1.0), {65, 65});
  const auto check = martingale_increment_check(d, 1e-6, "cube");
  CHECK(check.worst_violation < 1e-9);
}
