// Acceptance suite: every release gate of the laboratory, one line per
// criterion. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "core/costs.hpp"
#include "core/generators.hpp"
#include "core/inequality_lab.hpp"
#include "core/knothe.hpp"
#include "core/monotone_map.hpp"
#include "core/recentering.hpp"
#include "core/suite.hpp"
#include "core/test_functions.hpp"
#include "core/variance_lab.hpp"
#include "oracles.hpp"

using namespace lclab;

namespace {

int g_failures = 0;

void report(int criterion, const char* label, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, label,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::shared_ptr<GridDensity> gauss2(double rho, int shape, double radius = 8.0) {
  return std::make_shared<GridDensity>(
      build_grid_density(make_gaussian(2, {{1.0, rho}, {rho, 1.0}}, radius), {shape, shape}));
}

// ---------------------------------------------------------------------------
// 1. conditional recentering tables of the 2D Gaussian family
void criterion_1() {
  const double t0 = now_seconds();
  double worst_mean = 0.0, worst_var = 0.0;
  const double central = 2.4477;  // 95% mass radius of the standard 2D Gaussian
  for (double rho : {0.0, 0.3, 0.5, 0.8}) {
    const auto mu = gauss2(rho, 512);
    const auto cm = ConditionalMoments::build(*mu);
    const auto& nodes = mu->axis_nodes(0);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double x1 = nodes[j];
      if (std::fabs(x1) > central) continue;
      const int idx[1] = {static_cast<int>(j)};
      worst_mean = std::max(worst_mean,
                            std::fabs(cm->mean_node(1, idx) - rho * x1));
      worst_var = std::max(worst_var,
                           std::fabs(cm->var_node(1, idx) - (1.0 - rho * rho)));
    }
  }
  const double elapsed = now_seconds() - t0;
  std::ostringstream detail;
  detail << "max |m2 - rho x1| = " << worst_mean << ", max |var2 - (1-rho^2)| = "
         << worst_var << ", " << elapsed << " s";
  report(1, "recentering exactness, 2D Gaussian family at 512^2",
         worst_mean <= 1e-4 && worst_var <= 1e-4 && elapsed < 30.0, detail.str());
}

// ---------------------------------------------------------------------------
// 2. Knothe map against the triangular Gaussian factorization
void criterion_2() {
  const double rho = 0.5;
  const auto mu = gauss2(0.0, 257);
  const auto nu = gauss2(rho, 257);
  const auto map = build_knothe(mu, nu);
  const double cell = mu->step(0);
  double worst = 0.0;
  std::vector<double> pt(2);
  const auto& nodes = mu->axis_nodes(0);
  for (std::size_t a = 0; a < nodes.size(); a += 3) {
    for (std::size_t b = 0; b < nodes.size(); b += 3) {
      const double x1 = nodes[a], x2 = nodes[b];
      if (x1 * x1 + x2 * x2 > 4.605) continue;  // central 90% mass region
      pt = {x1, x2};
      const auto y = map->apply(pt);
      double o1 = 0.0, o2 = 0.0;
      oracle::gaussian_triangular_map(rho, x1, x2, o1, o2);
      worst = std::max({worst, std::fabs(y[0] - o1), std::fabs(y[1] - o2)});
    }
  }
  double worst_moment = 0.0;
  {
    const double m1 = pushforward_expect(*map, *mu, [](std::span<const double> y) { return y[0]; });
    const double m2 = pushforward_expect(*map, *mu, [](std::span<const double> y) { return y[1]; });
    const double s11 = pushforward_expect(*map, *mu, [](std::span<const double> y) { return y[0] * y[0]; });
    const double s22 = pushforward_expect(*map, *mu, [](std::span<const double> y) { return y[1] * y[1]; });
    const double s12 = pushforward_expect(*map, *mu, [](std::span<const double> y) { return y[0] * y[1]; });
    worst_moment = std::max({std::fabs(m1), std::fabs(m2), std::fabs(s11 - 1.0),
                             std::fabs(s22 - 1.0), std::fabs(s12 - rho)});
  }
  std::ostringstream detail;
  detail << "max map error = " << worst << " (2 cells = " << 2.0 * cell
         << "), max moment error = " << worst_moment;
  report(2, "Knothe map matches the triangular Gaussian oracle",
         worst <= 2.0 * cell && worst_moment <= 1e-3, detail.str());
}

// ---------------------------------------------------------------------------
// shared pair suite for criteria 3 and 4
struct PairCase {
  std::string name;
  std::shared_ptr<GridDensity> mu;
  std::shared_ptr<GridDensity> nu;
};

std::vector<PairCase> build_pair_suite() {
  std::vector<PairCase> pairs;
  auto gauss1 = [](double var, double mean, int shape) {
    const Potential pot{Box::cube(1, 8.0),
                        [var, mean](std::span<const double> x) {
                          const double d = x[0] - mean;
                          return 0.5 * d * d / var;
                        },
                        Smoothness::C1};
    return std::make_shared<GridDensity>(build_grid_density(pot, {shape}));
  };
  auto tilt = [](const std::shared_ptr<GridDensity>& base, std::vector<double> theta) {
    const GridDensity& bd = *base;
    std::vector<double> raw(static_cast<std::size_t>(bd.values().size()));
    std::vector<double> pt(static_cast<std::size_t>(bd.dim()));
    for_each_index(bd.shape(), [&](std::int64_t flat, std::span<const int> idx) {
      bd.node_point(idx, pt);
      double dot = 0.0;
      for (int a = 0; a < bd.dim(); ++a) dot += theta[static_cast<std::size_t>(a)] * pt[static_cast<std::size_t>(a)];
      raw[static_cast<std::size_t>(flat)] = bd.values()[flat] * std::exp(dot);
    });
    return std::make_shared<GridDensity>(bd.box(), bd.shape(), std::move(raw));
  };

  const auto g1 = gauss1(1.0, 0.0, 1025);
  const auto lap1 = std::make_shared<GridDensity>(
      build_grid_density(make_laplace(1, {1.0}, 20.0), {2049}));
  pairs.push_back({"g1_shift", g1, gauss1(1.0, 1.0, 1025)});
  pairs.push_back({"g1_narrow", g1, gauss1(0.25, 0.0, 1025)});
  pairs.push_back({"g1_tilt", g1, tilt(g1, {0.3})});
  pairs.push_back({"g1_widen", gauss1(0.25, 0.0, 1025), g1});
  pairs.push_back({"lap1_tilt", lap1, tilt(lap1, {0.2})});

  const auto g2i = gauss2(0.0, 257);
  const auto g2r5 = gauss2(0.5, 257);
  pairs.push_back({"g2_rho", g2i, g2r5});
  pairs.push_back({"g2_tilt", g2i, tilt(g2i, {0.3, 0.0})});
  pairs.push_back({"g2_rho_shift", g2r5, gauss2(0.8, 257)});
  const auto g2_aniso = std::make_shared<GridDensity>(build_grid_density(
      make_gaussian(2, {{1.0, 0.0}, {0.0, 0.49}}, 8.0), {257, 257}));
  pairs.push_back({"g2_aniso", g2i, g2_aniso});
  const auto lap2 = std::make_shared<GridDensity>(
      build_grid_density(make_laplace(2, {1.0, 1.0}, 16.0), {257, 257}));
  pairs.push_back({"lap2_tilt", lap2, tilt(lap2, {0.2, 0.0})});

  auto gauss3 = [](std::vector<double> diag) {
    std::vector<std::vector<double>> cov(3, std::vector<double>(3, 0.0));
    for (int i = 0; i < 3; ++i) cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = diag[static_cast<std::size_t>(i)];
    return std::make_shared<GridDensity>(
        build_grid_density(make_gaussian(3, cov, 8.0), {49, 49, 49}));
  };
  const auto g3 = gauss3({1.0, 1.0, 1.0});
  pairs.push_back({"g3_tilt", g3, tilt(g3, {0.2, 0.0, 0.0})});
  pairs.push_back({"g3_aniso", g3, gauss3({1.0, 0.8, 1.2})});

  const auto cube = std::make_shared<GridDensity>(
      build_grid_density(make_uniform_cube(2, 1.0), {257, 257}));
  pairs.push_back({"cube_tilt", cube, tilt(cube, {0.3, 0.1})});
  return pairs;
}

void criteria_3_and_4(const std::vector<PairCase>& pairs) {
  double worst_margin = kInf;
  bool anchors_ok = true;
  std::string anchor_detail;
  for (const auto& pc : pairs) {
    const auto eb = entropy_lower_bound(pc.mu, pc.nu);
    worst_margin = std::min(worst_margin, eb.margin);
    if (pc.name == "g1_narrow") {
      anchors_ok = std::fabs(eb.bound - 0.19314718) <= 1e-3 &&
                   std::fabs(eb.entropy - 0.31814718) <= 1e-3;
      std::ostringstream ss;
      ss << "anchor bound = " << eb.bound << ", entropy = " << eb.entropy;
      anchor_detail = ss.str();
    }
  }
  std::ostringstream d3;
  d3 << pairs.size() << " pairs, min(entropy - bound) = " << worst_margin << "; "
     << anchor_detail;
  report(3, "Knothe change-of-variables entropy bound",
         worst_margin >= -1e-6 && anchors_ok && pairs.size() >= 12, d3.str());

  double worst4 = kInf;
  for (const auto& pc : pairs) {
    const auto rec = build_recentering(*pc.mu);
    const CostSpec spec = CostSpec::from(rec, CostVariant::SumForm);
    const double cost = knothe_coupling_cost(pc.mu, pc.nu, spec);
    const double entropy = relative_entropy(*pc.nu, *pc.mu);
    worst4 = std::min(worst4, entropy - cost);
  }
  std::ostringstream d4;
  d4 << "min(D - coupling cost) = " << worst4;
  report(4, "transport-entropy inequality, coupling form", worst4 >= -1e-6, d4.str());
}

// ---------------------------------------------------------------------------
// measure collection for criteria 5-7
struct MeasureCase {
  std::string name;
  std::shared_ptr<GridDensity> density;
  std::shared_ptr<const ConditionalMoments> moments;
};

std::vector<MeasureCase> build_measure_suite() {
  std::vector<MeasureCase> out;
  auto add = [&](std::string name, std::shared_ptr<GridDensity> d) {
    auto cm = ConditionalMoments::build(*d);
    out.push_back({std::move(name), std::move(d), std::move(cm)});
  };
  add("g2", gauss2(0.0, 257));
  add("g2_rho03", gauss2(0.3, 257));
  add("g2_rho05", gauss2(0.5, 257));
  add("g2_rho08", gauss2(0.8, 257));
  {
    auto base = gauss2(0.0, 257);
    std::vector<double> raw(static_cast<std::size_t>(base->values().size()));
    std::vector<double> pt(2);
    for_each_index(base->shape(), [&](std::int64_t flat, std::span<const int> idx) {
      base->node_point(idx, pt);
      raw[static_cast<std::size_t>(flat)] = base->values()[flat] * std::exp(0.3 * pt[0]);
    });
    add("g2_tilt", std::make_shared<GridDensity>(base->box(), base->shape(), std::move(raw)));
  }
  add("lap2", std::make_shared<GridDensity>(
                  build_grid_density(make_laplace(2, {1.0, 1.0}, 16.0), {257, 257})));
  {
    const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, 0.08);
    const ConvexBody2D centered =
        translate_body(tri, {-tri.barycenter[0], -tri.barycenter[1]}, 0.08);
    add("triangle", std::make_shared<GridDensity>(build_grid_density(
                        centered.potential, {257, 257}, 1000, 1e-9, 4)));
  }
  {
    const ConvexBody2D quad =
        make_convex_body_2d({{0.0, 0.0}, {1.2, 0.1}, {1.4, 1.0}, {0.2, 0.8}}, 0.08);
    const ConvexBody2D centered =
        translate_body(quad, {-quad.barycenter[0], -quad.barycenter[1]}, 0.08);
    add("quad", std::make_shared<GridDensity>(build_grid_density(
                    centered.potential, {257, 257}, 1000, 1e-9, 4)));
  }
  add("cube2", std::make_shared<GridDensity>(
                   build_grid_density(make_uniform_cube(2, 1.0), {129, 129})));
  {
    std::vector<std::vector<double>> cov(3, std::vector<double>(3, 0.0));
    for (int i = 0; i < 3; ++i) cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    add("g3", std::make_shared<GridDensity>(
                  build_grid_density(make_gaussian(3, cov, 8.0), {49, 49, 49})));
  }
  return out;
}

void criterion_5(const std::vector<MeasureCase>& measures) {
  double best = 0.0;
  bool all_pass = true;
  int function_count = 0;
  for (const auto& mc : measures) {
    const auto family = standard_test_functions(mc.density->dim());
    function_count = std::max(function_count, static_cast<int>(family.size()));
    const auto reports = verify_weighted_poincare(*mc.density, *mc.moments, family, {},
                                                  mc.name);
    for (const auto& rep : reports) {
      all_pass = all_pass && rep.pass;
      if (!std::isnan(rep.best_constant_estimate))
        best = std::max(best, rep.best_constant_estimate);
    }
  }
  std::ostringstream detail;
  detail << measures.size() << " measures x " << function_count
         << " functions, best constant estimate = " << best << " (bound "
         << weighted_poincare_constant() << ")";
  report(5, "weighted Poincare inequality with the proof constant",
         all_pass && best <= 63.43 && measures.size() >= 8 && function_count >= 10,
         detail.str());
}

void criterion_6(const std::vector<MeasureCase>& measures) {
  double worst_residual_ratio = 0.0;
  double worst_ortho = 0.0;
  for (const auto& mc : measures) {
    const auto res = variance_identity(*mc.density, *mc.moments, mc.name);
    const int n = mc.density->dim();
    double e_norm4 = 0.0;
    {
      // E|X|^4 as the scale for the residual
      std::vector<double> buf(static_cast<std::size_t>(mc.density->values().size()), 0.0);
      std::vector<double> pt(static_cast<std::size_t>(n));
      for_each_index(mc.density->shape(), [&](std::int64_t flat, std::span<const int> idx) {
        const double mass = mc.density->node_weight(idx) * mc.density->values()[flat];
        if (mass <= 0.0) return;
        mc.density->node_point(idx, pt);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += pt[static_cast<std::size_t>(i)] * pt[static_cast<std::size_t>(i)];
        buf[static_cast<std::size_t>(flat)] = mass * s * s;
      });
      e_norm4 = pairwise_sum(buf);
    }
    worst_residual_ratio = std::max(worst_residual_ratio, res.residual / e_norm4);
    for (const auto& rep : res.reports)
      if (rep.inequality_id.rfind("orthogonality/", 0) == 0)
        worst_ortho = std::max(worst_ortho, rep.lhs);
  }
  std::ostringstream detail;
  detail << "max residual / E|X|^4 = " << worst_residual_ratio
         << ", max |E[Xbar_i X'_i]| = " << worst_ortho;
  report(6, "variance decomposition identity and orthogonality",
         worst_residual_ratio <= 1e-6 && worst_ortho <= 1e-8 * 64.0, detail.str());
}

void criterion_7(const std::vector<MeasureCase>& measures) {
  bool gauss_ok = true;
  std::ostringstream detail;
  for (int n : {1, 2, 3}) {
    std::vector<std::vector<double>> cov(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    const int shape = n == 3 ? 65 : (n == 2 ? 257 : 2049);
    std::vector<int> sh(static_cast<std::size_t>(n), shape);
    const GridDensity d = build_grid_density(make_gaussian(n, cov, 8.0), sh);
    const auto cm = ConditionalMoments::build(d);
    const auto res = variance_identity(d, *cm, "gauss");
    gauss_ok = gauss_ok && std::fabs(res.var_norm_sq - 2.0 * n) <= 1e-3;
    detail << "Var(|X|^2)[n=" << n << "] = " << res.var_norm_sq << " ";
  }
  bool steps_ok = true;
  for (const auto& mc : measures) {
    const auto res = check_variance_bounds(*mc.density, *mc.moments, mc.name);
    for (const auto& rep : res.reports)
      if (rep.gating) steps_ok = steps_ok && rep.pass;
  }
  const GridDensity lap = build_grid_density(make_laplace(1, {1.0}, 20.0), {4097});
  const auto lap_cm = ConditionalMoments::build(lap);
  const auto lap_res = check_variance_bounds(lap, *lap_cm, "lap");
  const double ratio = lap_res.borell_ratios.at(0);
  detail << "; Laplace ratio = " << ratio;
  report(7, "variance anchors, fourth-moment steps, reverse-Holder ratio",
         gauss_ok && steps_ok && std::fabs(ratio - 6.0) <= 1e-3, detail.str());
}

void criterion_8() {
  const ConvexBody2D tri = make_convex_body_2d({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, 0.08);
  const ConvexBody2D centered =
      translate_body(tri, {-tri.barycenter[0], -tri.barycenter[1]}, 0.08);
  const GridDensity d =
      build_grid_density(centered.potential, {512, 512}, 1000, 1e-9, 4);
  const auto rec = build_recentering(d);
  const GridDensity law = recentered_law_grid(d, rec);
  const ConvexBody2D sym = steiner_symmetrize_2d(centered);
  const GridDensity sym_density = build_grid_density(
      Potential{law.box(), sym.potential.eval, Smoothness::NonSmooth}, law.shape(),
      1000, 1e-9, 4);
  const double tv = tv_distance(law, sym_density);
  std::ostringstream detail;
  detail << "TV(recentered law, symmetrized body) = " << tv << " at 512^2";
  report(8, "recentered body law equals its Steiner symmetrization", tv <= 1e-2,
         detail.str());
}

void criterion_9() {
  bool floors_ok = true;
  bool ratios_finite = true;
  std::ostringstream detail;
  for (double radius : {0.5, 1.0, 2.0}) {
    auto cube = std::make_shared<GridDensity>(
        build_grid_density(make_uniform_cube(2, radius), {129, 129}));
    std::vector<double> raw(static_cast<std::size_t>(cube->values().size()));
    std::vector<double> pt(2);
    for_each_index(cube->shape(), [&](std::int64_t flat, std::span<const int> idx) {
      cube->node_point(idx, pt);
      raw[static_cast<std::size_t>(flat)] =
          cube->values()[flat] * std::exp(0.4 * pt[0] + 0.1 * pt[1]);
    });
    auto tilted = std::make_shared<GridDensity>(cube->box(), cube->shape(), std::move(raw));
    const auto rec = build_recentering(*cube);
    const auto reports = verify_t2_cube(cube, tilted, radius, rec, 1e-6, "cube");
    floors_ok = floors_ok && reports.at(0).pass;
    const double ratio = reports.at(1).best_constant_estimate;
    ratios_finite = ratios_finite && std::isfinite(ratio) && ratio > 0.0;
    detail << "R=" << radius << ": min lambda^2 = " << reports.at(0).rhs
           << " (floor " << reports.at(0).lhs << "), ratio = " << ratio << "; ";
  }
  report(9, "cube-supported transport bound machinery", floors_ok && ratios_finite,
         detail.str());
}

void criterion_10() {
  const auto mu = gauss2(0.0, 65);
  const auto rec = build_recentering(*mu);
  const CostSpec ctx = CostSpec::from(rec, CostVariant::NormForm);
  const double ts[3] = {1e-2, 1e-3, 1e-4};
  bool all_pass = true;
  std::ostringstream detail;
  for (const auto& f : hj_test_functions(2)) {
    const auto res = verify_hj_bound(ctx, *mu, f, ts, 1e-2, f.label);
    for (const auto& rep : res.reports) all_pass = all_pass && rep.pass;
    detail << f.label << ": q(1e-4) = " << res.quotients.back() << " vs rhs = "
           << res.rhs << "; ";
  }
  detail << "fatou constant = " << hj_uniform_constant();
  report(10, "Hamilton-Jacobi difference quotients", all_pass, detail.str());
}

void criterion_11() {
  const double t0 = now_seconds();
  const RunOptions options{1.0, 2, std::nullopt};
  const int code_a = run_suite_files(default_suite_config(), "/tmp/lclab_acceptance_a", options);
  const double one_run = now_seconds() - t0;
  const int code_b = run_suite_files(default_suite_config(), "/tmp/lclab_acceptance_b", options);
  auto slurp = [](const std::string& path) {
    std::ifstream is(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  const bool identical =
      slurp("/tmp/lclab_acceptance_a/reports.csv") == slurp("/tmp/lclab_acceptance_b/reports.csv") &&
      slurp("/tmp/lclab_acceptance_a/reports.json") == slurp("/tmp/lclab_acceptance_b/reports.json");
  std::ostringstream detail;
  detail << "exit codes " << code_a << "/" << code_b << ", byte-identical = "
         << (identical ? "yes" : "no") << ", one run = " << one_run << " s";
  report(11, "bundled suite: green, deterministic, inside the time budget",
         code_a == 0 && code_b == 0 && identical && one_run < 600.0, detail.str());
}

}  // namespace

int main() {
  std::printf("lclab acceptance suite\n");
  criterion_1();
  criterion_2();
  const auto pairs = build_pair_suite();
  criteria_3_and_4(pairs);
  const auto measures = build_measure_suite();
  criterion_5(measures);
  criterion_6(measures);
  criterion_7(measures);
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("%d criterion failure(s)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
