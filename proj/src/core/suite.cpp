#include "core/suite.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "core/costs.hpp"
#include "core/inequality_lab.hpp"
#include "core/monotone_map.hpp"
#include "core/test_functions.hpp"
#include "core/variance_lab.hpp"

namespace lclab {

namespace {
using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigInvalid, path + ": " + what);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) { ok = true; break; }
    if (!ok) config_fail(path, "unknown key '" + item.key() + "'");
  }
}

const json& need(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) config_fail(path, std::string("missing key '") + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) config_fail(path, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) config_fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, path));
  return out;
}

std::vector<int> as_shape(const json& v, const std::string& path) {
  if (!v.is_array()) config_fail(path, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) config_fail(path, "expected integers");
    out.push_back(e.get<int>());
  }
  return out;
}

MeasureSpec parse_measure(const json& m, const std::string& path) {
  check_keys(m,
             {"name", "kind", "dim", "covariance", "mean", "scales", "theta", "base",
              "box_radius", "radius", "pad", "recenter", "vertices", "shape"},
             path);
  MeasureSpec spec;
  spec.name = as_string(need(m, "name", path), path + ".name");
  spec.kind = as_string(need(m, "kind", path), path + ".kind");
  if (m.contains("dim")) spec.dim = static_cast<int>(as_number(m["dim"], path + ".dim"));
  if (m.contains("covariance")) {
    for (const auto& row : need(m, "covariance", path))
      spec.covariance.push_back(as_vector(row, path + ".covariance"));
  }
  if (m.contains("mean")) spec.mean = as_vector(m["mean"], path + ".mean");
  if (m.contains("scales")) spec.scales = as_vector(m["scales"], path + ".scales");
  if (m.contains("theta")) spec.theta = as_vector(m["theta"], path + ".theta");
  if (m.contains("base")) spec.base = as_string(m["base"], path + ".base");
  if (m.contains("box_radius")) spec.box_radius = as_number(m["box_radius"], path + ".box_radius");
  if (m.contains("radius")) spec.radius = as_number(m["radius"], path + ".radius");
  if (m.contains("pad")) spec.pad = as_number(m["pad"], path + ".pad");
  if (m.contains("recenter")) {
    if (!m["recenter"].is_boolean()) config_fail(path + ".recenter", "expected a boolean");
    spec.recenter = m["recenter"].get<bool>();
  }
  if (m.contains("vertices")) {
    for (const auto& v : m["vertices"]) {
      const auto pt = as_vector(v, path + ".vertices");
      if (pt.size() != 2) config_fail(path + ".vertices", "vertices must be 2D");
      spec.vertices.push_back({pt[0], pt[1]});
    }
  }
  if (m.contains("shape")) spec.shape = as_shape(m["shape"], path + ".shape");

  static const std::vector<std::string> kinds = {"gaussian", "laplace", "uniform_cube",
                                                 "polygon", "tilt"};
  if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end())
    config_fail(path + ".kind", "unknown measure kind '" + spec.kind + "'");
  if (spec.kind != "tilt" && spec.shape.empty())
    config_fail(path, "measure '" + spec.name + "' needs a shape");
  return spec;
}

CheckSpec parse_check(const json& c, const std::string& path) {
  check_keys(c,
             {"id", "type", "measures", "pairs", "measure", "functions", "t_sequence",
              "tolerance", "cube_radius", "count"},
             path);
  CheckSpec spec;
  spec.id = as_string(need(c, "id", path), path + ".id");
  spec.type = as_string(need(c, "type", path), path + ".type");
  if (c.contains("measures"))
    for (const auto& m : c["measures"]) spec.measures.push_back(as_string(m, path + ".measures"));
  if (c.contains("pairs"))
    for (const auto& p : c["pairs"]) spec.pairs.push_back(as_string(p, path + ".pairs"));
  if (c.contains("measure")) spec.measure = as_string(c["measure"], path + ".measure");
  if (c.contains("functions")) spec.functions = as_string(c["functions"], path + ".functions");
  if (c.contains("t_sequence")) spec.t_sequence = as_vector(c["t_sequence"], path + ".t_sequence");
  if (c.contains("tolerance")) spec.tolerance = as_number(c["tolerance"], path + ".tolerance");
  if (c.contains("cube_radius")) spec.cube_radius = as_number(c["cube_radius"], path + ".cube_radius");
  if (c.contains("count")) spec.count = static_cast<std::int64_t>(as_number(c["count"], path + ".count"));

  static const std::vector<std::string> types = {
      "weighted_poincare", "transport_entropy", "knothe_entropy_bound", "t2_cube",
      "hj_bound", "variance_identity", "variance_bounds", "quadratic_variation",
      "martingale", "steiner_law", "cheeger_1d", "n_cost_properties", "sampling",
      "thin_shell"};
  if (std::find(types.begin(), types.end(), spec.type) == types.end())
    config_fail(path + ".type", "unknown check type '" + spec.type + "'");
  return spec;
}
}  // namespace

SuiteConfig parse_suite_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("JSON parse error: ") + e.what());
  }
  if (!root.is_object()) fail(ErrorCode::ConfigInvalid, "top level must be an object");
  check_keys(root, {"seed", "output", "measures", "pairs", "functions", "checks"}, "$");

  SuiteConfig config;
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer())
      config_fail("$.seed", "seed must be an integer");
    config.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("output")) {
    const auto& out = root["output"];
    check_keys(out, {"formats"}, "$.output");
    if (out.contains("formats")) {
      config.output.csv = false;
      config.output.json = false;
      for (const auto& f : out["formats"]) {
        const std::string fmt = as_string(f, "$.output.formats");
        if (fmt == "csv")
          config.output.csv = true;
        else if (fmt == "json")
          config.output.json = true;
        else
          config_fail("$.output.formats", "unknown format '" + fmt + "'");
      }
    }
  }
  std::size_t i = 0;
  for (const auto& m : need(root, "measures", "$")) {
    config.measures.push_back(parse_measure(m, "$.measures[" + std::to_string(i) + "]"));
    ++i;
  }
  if (root.contains("pairs")) {
    i = 0;
    for (const auto& p : root["pairs"]) {
      const std::string path = "$.pairs[" + std::to_string(i) + "]";
      check_keys(p, {"name", "mu", "nu"}, path);
      PairSpec ps;
      ps.name = as_string(need(p, "name", path), path + ".name");
      ps.mu = as_string(need(p, "mu", path), path + ".mu");
      ps.nu = as_string(need(p, "nu", path), path + ".nu");
      config.pairs.push_back(std::move(ps));
      ++i;
    }
  }
  if (root.contains("functions")) {
    for (const auto& item : root["functions"].items()) {
      const std::string v = as_string(item.value(), "$.functions." + item.key());
      if (v != "standard" && v != "hj_default")
        config_fail("$.functions." + item.key(), "unknown builtin family '" + v + "'");
      config.function_aliases[item.key()] = v;
    }
  }
  i = 0;
  for (const auto& c : need(root, "checks", "$")) {
    config.checks.push_back(parse_check(c, "$.checks[" + std::to_string(i) + "]"));
    ++i;
  }

  // reference resolution
  auto has_measure = [&](const std::string& n) {
    for (const auto& m : config.measures)
      if (m.name == n) return true;
    return false;
  };
  auto has_pair = [&](const std::string& n) {
    for (const auto& p : config.pairs)
      if (p.name == n) return true;
    return false;
  };
  for (const auto& m : config.measures)
    if (m.kind == "tilt" && !has_measure(m.base))
      fail(ErrorCode::ConfigInvalid,
           "tilt measure '" + m.name + "' references undefined base '" + m.base + "'");
  for (const auto& p : config.pairs) {
    if (!has_measure(p.mu))
      fail(ErrorCode::ConfigInvalid, "pair '" + p.name + "' references undefined measure '" + p.mu + "'");
    if (!has_measure(p.nu))
      fail(ErrorCode::ConfigInvalid, "pair '" + p.name + "' references undefined measure '" + p.nu + "'");
  }
  bool sampled = false;
  for (const auto& c : config.checks) {
    for (const auto& m : c.measures)
      if (!has_measure(m))
        fail(ErrorCode::ConfigInvalid, "check '" + c.id + "' references undefined measure '" + m + "'");
    for (const auto& p : c.pairs)
      if (!has_pair(p))
        fail(ErrorCode::ConfigInvalid, "check '" + c.id + "' references undefined pair '" + p + "'");
    if (!c.measure.empty() && !has_measure(c.measure))
      fail(ErrorCode::ConfigInvalid, "check '" + c.id + "' references undefined measure '" + c.measure + "'");
    if (!c.functions.empty() && c.functions != "standard" && c.functions != "hj_default" &&
        config.function_aliases.find(c.functions) == config.function_aliases.end())
      fail(ErrorCode::ConfigInvalid, "check '" + c.id + "' references undefined function family '" + c.functions + "'");
    if (c.type == "sampling" || c.type == "thin_shell") sampled = true;
  }
  if (sampled && !config.seed.has_value())
    fail(ErrorCode::ConfigInvalid, "sampled checks require a top-level seed");
  return config;
}

std::vector<int> scaled_shape(const std::vector<int>& shape, double grid_scale) {
  std::vector<int> out = shape;
  if (grid_scale == 1.0) return out;
  for (auto& s : out)
    s = std::max(8, static_cast<int>(std::llround((s - 1) * grid_scale)) + 1);
  return out;
}

SuiteWorkspace::SuiteWorkspace(const SuiteConfig& config, double grid_scale)
    : config_(config), grid_scale_(grid_scale) {
  for (const auto& p : config_.pairs) pairs_[p.name] = p;
  try {
    for (const auto& spec : config_.measures) build_measure(spec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    fail(ErrorCode::ConfigInvalid, std::string("measure construction failed: ") + e.what());
  }
}

void SuiteWorkspace::build_measure(const MeasureSpec& spec) {
  MeasureContext ctx;
  ctx.spec = spec;
  if (spec.kind == "gaussian") {
    Potential pot = make_gaussian(spec.dim, spec.covariance, spec.box_radius);
    if (!spec.mean.empty()) pot = translate_potential(pot, spec.mean);
    // keep the stated box so translated pairs stay on a common grid
    pot.domain = Box::cube(spec.dim, spec.box_radius);
    ctx.density = std::make_shared<GridDensity>(
        build_grid_density(pot, scaled_shape(spec.shape, grid_scale_)));
  } else if (spec.kind == "laplace") {
    const Potential pot = make_laplace(spec.dim, spec.scales, spec.box_radius);
    ctx.density = std::make_shared<GridDensity>(
        build_grid_density(pot, scaled_shape(spec.shape, grid_scale_)));
  } else if (spec.kind == "uniform_cube") {
    const Potential pot = make_uniform_cube(spec.dim, spec.radius);
    ctx.density = std::make_shared<GridDensity>(
        build_grid_density(pot, scaled_shape(spec.shape, grid_scale_)));
  } else if (spec.kind == "polygon") {
    ConvexBody2D body = make_convex_body_2d(spec.vertices, spec.pad);
    if (spec.recenter)
      body = translate_body(body, {-body.barycenter[0], -body.barycenter[1]}, spec.pad);
    ctx.density = std::make_shared<GridDensity>(build_grid_density(
        body.potential, scaled_shape(spec.shape, grid_scale_), 1000, 1e-9,
        /*supersample=*/4));
    ctx.body = std::move(body);
  } else if (spec.kind == "tilt") {
    const auto it = measures_.find(spec.base);
    require(it != measures_.end(), ErrorCode::ConfigInvalid,
            "tilt base '" + spec.base + "' must be declared before '" + spec.name + "'");
    const MeasureContext& base = it->second;
    Potential pot{base.density->box(),
                  [](std::span<const double>) { return 0.0; },
                  Smoothness::C1};
    // tilt the base grid directly: exp(theta.x) times the base density
    const auto theta = spec.theta;
    require(static_cast<int>(theta.size()) == base.density->dim(), ErrorCode::ConfigInvalid,
            "tilt direction dimension mismatch for '" + spec.name + "'");
    const GridDensity& bd = *base.density;
    std::vector<double> raw(static_cast<std::size_t>(bd.values().size()));
    std::vector<double> logv(static_cast<std::size_t>(bd.values().size()));
    std::vector<double> pt(static_cast<std::size_t>(bd.dim()));
    for_each_index(bd.shape(), [&](std::int64_t flat, std::span<const int> idx) {
      bd.node_point(idx, pt);
      double dot = 0.0;
      for (int a = 0; a < bd.dim(); ++a) dot += theta[static_cast<std::size_t>(a)] * pt[static_cast<std::size_t>(a)];
      raw[static_cast<std::size_t>(flat)] = bd.values()[flat] * std::exp(dot);
      logv[static_cast<std::size_t>(flat)] = bd.log_values()[flat] + dot;
    });
    ctx.density = std::make_shared<GridDensity>(bd.box(), bd.shape(), std::move(raw),
                                                std::move(logv));
    ctx.body = base.body;
  } else {
    fail(ErrorCode::ConfigInvalid, "unknown measure kind '" + spec.kind + "'");
  }
  ctx.moments = ConditionalMoments::build(*ctx.density);
  ctx.rec = build_recentering(ctx.moments);
  measures_.emplace(spec.name, std::move(ctx));
}

const MeasureContext& SuiteWorkspace::measure(const std::string& name) const {
  const auto it = measures_.find(name);
  require(it != measures_.end(), ErrorCode::ConfigInvalid,
          "undefined measure '" + name + "'");
  return it->second;
}

const PairSpec& SuiteWorkspace::pair(const std::string& name) const {
  const auto it = pairs_.find(name);
  require(it != pairs_.end(), ErrorCode::ConfigInvalid, "undefined pair '" + name + "'");
  return it->second;
}

namespace {
double default_tolerance(const CheckSpec& c) {
  if (c.tolerance > 0.0) return c.tolerance;
  if (c.type == "hj_bound") return 1e-2;
  if (c.type == "steiner_law") return 0.02;
  if (c.type == "cheeger_1d") return 0.05;
  if (c.type == "martingale") return 1e-6;
  if (c.type == "sampling") return 5.0;  // z-score band
  return 1e-6;
}

// resolves a family alias to the builtin catalog for the measure dimension
TestFunctionFamily resolve_family(const SuiteWorkspace& ws, const std::string& alias,
                                  const std::string& fallback, int dim) {
  std::string builtin = alias.empty() ? fallback : alias;
  const auto it = ws.config().function_aliases.find(builtin);
  if (it != ws.config().function_aliases.end()) builtin = it->second;
  if (builtin == "standard") return standard_test_functions(dim);
  if (builtin == "hj_default") return hj_test_functions(dim);
  fail(ErrorCode::ConfigInvalid, "unknown function family '" + builtin + "'");
}

std::vector<VerificationReport> run_check(const SuiteWorkspace& ws, const CheckSpec& check,
                                          std::optional<std::uint64_t> seed) {
  std::vector<VerificationReport> reports;
  const double tol = default_tolerance(check);

  if (check.type == "weighted_poincare") {
    double best = 0.0;
    for (const auto& name : check.measures) {
      const auto& ctx = ws.measure(name);
      PoincareOptions opt;
      opt.tolerance_scale = tol;
      auto reps = verify_weighted_poincare(
          *ctx.density, *ctx.moments,
          resolve_family(ws, check.functions, "standard", ctx.density->dim()), opt,
          name);
      for (auto& r : reps) {
        if (!std::isnan(r.best_constant_estimate))
          best = std::max(best, r.best_constant_estimate);
        reports.push_back(std::move(r));
      }
    }
    const std::string id = "weighted_poincare_best_constant/" + check.id;
    auto rep = VerificationReport::make(id, best, weighted_poincare_constant(),
                                        1e-9, hex64(fnv1a64(id)));
    rep.constant_used = weighted_poincare_constant();
    rep.best_constant_estimate = best;
    reports.push_back(std::move(rep));
  } else if (check.type == "transport_entropy" || check.type == "knothe_entropy_bound") {
    for (const auto& pname : check.pairs) {
      const auto& p = ws.pair(pname);
      const auto& mu = ws.measure(p.mu);
      const auto& nu = ws.measure(p.nu);
      if (check.type == "transport_entropy")
        reports.push_back(
            verify_transport_entropy(mu.density, nu.density, mu.rec, tol, pname));
      else
        reports.push_back(verify_entropy_lower_bound(mu.density, nu.density, tol, pname));
    }
  } else if (check.type == "t2_cube") {
    require(check.cube_radius > 0.0, ErrorCode::ConfigInvalid,
            "t2_cube needs cube_radius");
    for (const auto& pname : check.pairs) {
      const auto& p = ws.pair(pname);
      const auto& mu = ws.measure(p.mu);
      const auto& nu = ws.measure(p.nu);
      auto reps = verify_t2_cube(mu.density, nu.density, check.cube_radius, mu.rec,
                                 tol, pname);
      for (auto& r : reps) reports.push_back(std::move(r));
    }
  } else if (check.type == "hj_bound") {
    const auto& ctx = ws.measure(check.measure);
    const CostSpec spec = CostSpec::from(ctx.rec, CostVariant::NormForm);
    std::vector<double> ts = check.t_sequence;
    if (ts.empty()) ts = {1e-2, 1e-3, 1e-4};
    for (const auto& f :
         resolve_family(ws, check.functions, "hj_default", ctx.density->dim())) {
      auto res = verify_hj_bound(spec, *ctx.density, f, ts, tol,
                                 check.measure + "/" + f.label);
      for (auto& r : res.reports) reports.push_back(std::move(r));
    }
  } else if (check.type == "variance_identity") {
    for (const auto& name : check.measures) {
      const auto& ctx = ws.measure(name);
      auto res = variance_identity(*ctx.density, *ctx.moments, name);
      for (auto& r : res.reports) reports.push_back(std::move(r));
    }
  } else if (check.type == "variance_bounds") {
    for (const auto& name : check.measures) {
      const auto& ctx = ws.measure(name);
      auto res = check_variance_bounds(*ctx.density, *ctx.moments, name);
      for (auto& r : res.reports) reports.push_back(std::move(r));
    }
  } else if (check.type == "quadratic_variation") {
    for (const auto& name : check.measures) {
      const auto& ctx = ws.measure(name);
      auto res = quadratic_variation_check(*ctx.density, *ctx.moments, 1e-6, name);
      reports.push_back(std::move(res.report));
    }
  } else if (check.type == "martingale") {
    for (const auto& name : check.measures) {
      const auto& ctx = ws.measure(name);
      reports.push_back(martingale_increment_check(*ctx.density, tol, name).report);
    }
  } else if (check.type == "steiner_law") {
    const auto& ctx = ws.measure(check.measure);
    require(ctx.body.has_value(), ErrorCode::ConfigInvalid,
            "steiner_law needs a polygon measure");
    const GridDensity law = recentered_law_grid(*ctx.density, ctx.rec);
    const ConvexBody2D sym = steiner_symmetrize_2d(*ctx.body);
    const GridDensity sym_density = build_grid_density(
        Potential{law.box(), sym.potential.eval, Smoothness::NonSmooth}, law.shape(),
        1000, 1e-9, /*supersample=*/4);
    const double tv = tv_distance(law, sym_density);
    const std::string id = "steiner_law/" + check.measure;
    auto rep = VerificationReport::make(id, tv, 0.0, tol, hex64(fnv1a64(id)));
    rep.constant_used = 3.0;  // 3x re-binning tolerance convention
    reports.push_back(std::move(rep));
  } else if (check.type == "cheeger_1d") {
    for (const auto& name : check.measures) {
      const auto& ctx = ws.measure(name);
      require(ctx.density->dim() == 1, ErrorCode::ConfigInvalid,
              "cheeger_1d needs 1D measures");
      const std::vector<std::pair<std::string, std::function<double(double)>>> probes = {
          {"x", [](double x) { return x; }},
          {"sin", [](double x) { return std::sin(x); }},
          {"clip", [](double x) { return std::clamp(x, -1.0, 1.0); }}};
      for (const auto& [lbl, f] : probes) {
        reports.push_back(
            verify_one_dim_functional(*ctx.density, f, OneDimMode::CheegerMedian,
                                      name + "/" + lbl));
        reports.push_back(
            verify_one_dim_functional(*ctx.density, f, OneDimMode::CheegerGammaN,
                                      name + "/" + lbl));
      }
      // Bobkov sandwich at quadrature tolerance
      const auto est = estimate_cheeger_constant(*ctx.density,
                                                 cheeger_probe_family(*ctx.density));
      const auto ch = cheeger_constant(*ctx.density);
      const double lower = std::sqrt(ch.lambda_sq_lower);
      const double upper = std::sqrt(2.0 / ch.variance);
      {
        const std::string id = "cheeger_sandwich_upper/" + name;
        auto rep = VerificationReport::make(id, est, upper, tol * upper, hex64(fnv1a64(id)));
        rep.best_constant_estimate = est;
        reports.push_back(std::move(rep));
      }
      {
        const std::string id = "cheeger_sandwich_lower/" + name;
        auto rep = VerificationReport::make(id, lower, est, tol * est, hex64(fnv1a64(id)));
        rep.best_constant_estimate = est;
        reports.push_back(std::move(rep));
      }
    }
  } else if (check.type == "n_cost_properties") {
    double worst_even = 0.0, worst_convex = 0.0, worst_quad = -kInf, worst_pn = 0.0;
    const double h = 1e-3;
    for (int k = -4000; k <= 4000; ++k) {
      const double t = k * h * 2.5;
      worst_even = std::max(worst_even, std::fabs(n_cost(t) - n_cost(-t)));
      const double second = n_cost(t - h) - 2.0 * n_cost(t) + n_cost(t + h);
      worst_convex = std::max(worst_convex, -second);
      worst_quad = std::max(worst_quad, n_cost(t) - 0.5 * t * t);
      if (t > 1e-9) {
        const double deriv = t / (1.0 + t);
        worst_pn = std::max(worst_pn, t * deriv / n_cost(t));
      }
    }
    auto push = [&](const std::string& label, double lhs, double rhs, double tolv,
                    bool gating = true) {
      const std::string id = "n_cost/" + label;
      reports.push_back(
          VerificationReport::make(id, lhs, rhs, tolv, hex64(fnv1a64(id)), gating));
    };
    push("zero", n_cost(0.0), 0.0, 0.0);
    push("even", worst_even, 0.0, 0.0);
    push("convex", worst_convex, 0.0, 1e-12);
    push("below_half_square", worst_quad, 0.0, 1e-12);
    push("p_N_le_2", worst_pn, 2.0, 1e-9);
    const double floor_c = n_quadratic_floor(2.0 / std::sqrt(6.0));
    {
      const std::string id = "n_cost/quadratic_floor";
      auto rep = VerificationReport::make(id, floor_c, floor_c, kInf, hex64(fnv1a64(id)), false);
      rep.best_constant_estimate = floor_c;
      reports.push_back(std::move(rep));
    }
  } else if (check.type == "sampling") {
    const auto& ctx = ws.measure(check.measure);
    const std::int64_t count = check.count > 0 ? check.count : 20000;
    const SampleSet s = ctx.density->sample(count, *seed);
    const SampleSet s2 = ctx.density->sample(count, *seed);
    const bool identical = s.points == s2.points;
    {
      const std::string id = "sampling_determinism/" + check.measure;
      reports.push_back(VerificationReport::make(id, identical ? 0.0 : 1.0, 0.0, 0.0,
                                                 hex64(fnv1a64(id))));
    }
    const int n = ctx.density->dim();
    const double band = tol / std::sqrt(static_cast<double>(count));
    for (int i = 0; i < n; ++i) {
      std::vector<int> powers(static_cast<std::size_t>(n), 0);
      powers[static_cast<std::size_t>(i)] = 1;
      const double exact = ctx.density->mixed_moment(powers);
      const double emp = sample_mixed_moment(s, powers);
      powers[static_cast<std::size_t>(i)] = 2;
      const double sigma = std::sqrt(
          std::max(1e-300, ctx.density->mixed_moment(powers) - exact * exact));
      const std::string id = "sampling_mean/" + check.measure + "/x" + std::to_string(i + 1);
      reports.push_back(VerificationReport::make(id, std::fabs(emp - exact), band * sigma,
                                                 0.0, hex64(fnv1a64(id))));
    }
  } else if (check.type == "thin_shell") {
    const auto& ctx = ws.measure(check.measure);
    const std::int64_t count = check.count > 0 ? check.count : 100000;
    const SampleSet s = ctx.density->sample(count, *seed);
    const auto rows = thin_shell_tail(s, false);
    double prev = 1.0;
    bool monotone = true;
    for (const auto& row : rows) {
      if (row.probability > prev + 1e-12) monotone = false;
      prev = row.probability;
      const std::string id = "thin_shell/" + check.measure + "/t" + format_g17(row.t);
      auto rep = VerificationReport::make(id, row.probability, row.wilson_hi, kInf,
                                          hex64(fnv1a64(id)), false);
      rep.pass = true;
      reports.push_back(std::move(rep));
    }
    const std::string id = "thin_shell_monotone/" + check.measure;
    reports.push_back(
        VerificationReport::make(id, monotone ? 0.0 : 1.0, 0.0, 0.0, hex64(fnv1a64(id))));
  } else {
    fail(ErrorCode::ConfigInvalid, "unknown check type '" + check.type + "'");
  }
  return reports;
}
}  // namespace

SuiteResult run_suite(const SuiteConfig& config, const RunOptions& options) {
  const SuiteWorkspace ws(config, options.grid_scale);
  std::optional<std::uint64_t> seed = config.seed;
  if (options.seed_override.has_value()) seed = options.seed_override;

  std::vector<std::vector<VerificationReport>> slots(config.checks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.checks.size()) break;
      const CheckSpec& check = config.checks[i];
      try {
        slots[i] = run_check(ws, check, seed);
      } catch (const Error& e) {
        const std::string id =
            check.type + "/" + check.id + "/error:" + error_code_name(e.code());
        auto rep = VerificationReport::make(id, 1.0, 0.0, 0.0, hex64(fnv1a64(e.what())));
        slots[i] = {rep};
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1 || config.checks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int threads = std::min<std::size_t>(jobs, config.checks.size());
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SuiteResult result;
  for (auto& slot : slots)
    for (auto& rep : slot) result.reports.push_back(std::move(rep));
  for (const auto& rep : result.reports)
    if (rep.gating && !rep.pass) result.exit_code = 1;
  return result;
}

MeasureContext build_single_measure(const SuiteConfig& config, const std::string& name,
                                    double grid_scale) {
  // collect the tilt base chain in declaration order
  std::vector<std::string> chain;
  std::string cur = name;
  for (;;) {
    const MeasureSpec* found = nullptr;
    for (const auto& m : config.measures)
      if (m.name == cur) { found = &m; break; }
    if (!found) fail(ErrorCode::ConfigInvalid, "undefined measure '" + cur + "'");
    chain.push_back(cur);
    if (found->kind != "tilt") break;
    cur = found->base;
  }
  SuiteConfig sub;
  sub.seed = config.seed;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    for (const auto& m : config.measures)
      if (m.name == *it) sub.measures.push_back(m);
  const SuiteWorkspace ws(sub, grid_scale);
  return ws.measure(name);
}

const std::string& default_suite_config() {
  static const std::string config = R"JSON({
  "seed": 20270401,
  "output": {"formats": ["csv", "json"]},
  "measures": [
    {"name": "g1", "kind": "gaussian", "dim": 1, "covariance": [[1.0]], "box_radius": 8.0, "shape": [1025]},
    {"name": "g1_narrow", "kind": "gaussian", "dim": 1, "covariance": [[0.25]], "box_radius": 8.0, "shape": [1025]},
    {"name": "g1_shift", "kind": "gaussian", "dim": 1, "covariance": [[1.0]], "mean": [1.0], "box_radius": 8.0, "shape": [1025]},
    {"name": "g1_tilt", "kind": "tilt", "base": "g1", "theta": [0.3]},
    {"name": "lap1", "kind": "laplace", "dim": 1, "scales": [1.0], "box_radius": 20.0, "shape": [2049]},
    {"name": "lap1_tilt", "kind": "tilt", "base": "lap1", "theta": [0.2]},
    {"name": "g2", "kind": "gaussian", "dim": 2, "covariance": [[1.0, 0.0], [0.0, 1.0]], "box_radius": 8.0, "shape": [257, 257]},
    {"name": "g2_rho05", "kind": "gaussian", "dim": 2, "covariance": [[1.0, 0.5], [0.5, 1.0]], "box_radius": 8.0, "shape": [257, 257]},
    {"name": "g2_rho08", "kind": "gaussian", "dim": 2, "covariance": [[1.0, 0.8], [0.8, 1.0]], "box_radius": 8.0, "shape": [257, 257]},
    {"name": "g2_tilt", "kind": "tilt", "base": "g2", "theta": [0.3, 0.0]},
    {"name": "g2_aniso", "kind": "gaussian", "dim": 2, "covariance": [[1.0, 0.0], [0.0, 0.49]], "box_radius": 8.0, "shape": [257, 257]},
    {"name": "g2_hj", "kind": "gaussian", "dim": 2, "covariance": [[1.0, 0.0], [0.0, 1.0]], "box_radius": 8.0, "shape": [65, 65]},
    {"name": "lap2", "kind": "laplace", "dim": 2, "scales": [1.0, 1.0], "box_radius": 16.0, "shape": [257, 257]},
    {"name": "lap2_tilt", "kind": "tilt", "base": "lap2", "theta": [0.2, 0.0]},
    {"name": "triangle", "kind": "polygon", "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], "recenter": true, "pad": 0.08, "shape": [257, 257]},
    {"name": "quad", "kind": "polygon", "vertices": [[0.0, 0.0], [1.2, 0.1], [1.4, 1.0], [0.2, 0.8]], "recenter": true, "pad": 0.08, "shape": [257, 257]},
    {"name": "cube2", "kind": "uniform_cube", "dim": 2, "radius": 1.0, "shape": [257, 257]},
    {"name": "cube2_tilt", "kind": "tilt", "base": "cube2", "theta": [0.3, 0.1]},
    {"name": "cube2_small", "kind": "uniform_cube", "dim": 2, "radius": 0.5, "shape": [257, 257]},
    {"name": "cube2_small_tilt", "kind": "tilt", "base": "cube2_small", "theta": [0.4, 0.0]},
    {"name": "cube2_big", "kind": "uniform_cube", "dim": 2, "radius": 2.0, "shape": [257, 257]},
    {"name": "cube2_big_tilt", "kind": "tilt", "base": "cube2_big", "theta": [0.2, 0.1]},
    {"name": "g3", "kind": "gaussian", "dim": 3, "covariance": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], "box_radius": 8.0, "shape": [49, 49, 49]},
    {"name": "g3_tilt", "kind": "tilt", "base": "g3", "theta": [0.2, 0.0, 0.0]},
    {"name": "g3_aniso", "kind": "gaussian", "dim": 3, "covariance": [[1.0, 0.0, 0.0], [0.0, 0.8, 0.0], [0.0, 0.0, 1.2]], "box_radius": 8.0, "shape": [49, 49, 49]},
    {"name": "g3_sampling", "kind": "gaussian", "dim": 3, "covariance": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], "box_radius": 6.0, "shape": [97, 97, 97]}
  ],
  "pairs": [
    {"name": "p_g1_shift", "mu": "g1", "nu": "g1_shift"},
    {"name": "p_g1_narrow", "mu": "g1", "nu": "g1_narrow"},
    {"name": "p_g1_tilt", "mu": "g1", "nu": "g1_tilt"},
    {"name": "p_g1_widen", "mu": "g1_narrow", "nu": "g1"},
    {"name": "p_lap1_tilt", "mu": "lap1", "nu": "lap1_tilt"},
    {"name": "p_g2_rho", "mu": "g2", "nu": "g2_rho05"},
    {"name": "p_g2_tilt", "mu": "g2", "nu": "g2_tilt"},
    {"name": "p_g2_rho_shift", "mu": "g2_rho05", "nu": "g2_rho08"},
    {"name": "p_g2_aniso", "mu": "g2", "nu": "g2_aniso"},
    {"name": "p_lap2_tilt", "mu": "lap2", "nu": "lap2_tilt"},
    {"name": "p_g3_tilt", "mu": "g3", "nu": "g3_tilt"},
    {"name": "p_g3_aniso", "mu": "g3", "nu": "g3_aniso"},
    {"name": "p_cube2_tilt", "mu": "cube2", "nu": "cube2_tilt"},
    {"name": "p_cube2_small_tilt", "mu": "cube2_small", "nu": "cube2_small_tilt"},
    {"name": "p_cube2_big_tilt", "mu": "cube2_big", "nu": "cube2_big_tilt"}
  ],
  "functions": {"poincare": "standard", "hamilton_jacobi": "hj_default"},
  "checks": [
    {"id": "wp", "type": "weighted_poincare", "measures": ["g2", "g2_rho05", "g2_rho08", "g2_tilt", "g2_aniso", "lap2", "triangle", "quad", "cube2", "g3"], "functions": "poincare", "tolerance": 1e-6},
    {"id": "te", "type": "transport_entropy", "pairs": ["p_g1_shift", "p_g1_narrow", "p_g1_tilt", "p_g1_widen", "p_lap1_tilt", "p_g2_rho", "p_g2_tilt", "p_g2_rho_shift", "p_g2_aniso", "p_lap2_tilt", "p_g3_tilt", "p_g3_aniso", "p_cube2_tilt"], "tolerance": 1e-6},
    {"id": "l32", "type": "knothe_entropy_bound", "pairs": ["p_g1_shift", "p_g1_narrow", "p_g1_tilt", "p_g1_widen", "p_lap1_tilt", "p_g2_rho", "p_g2_tilt", "p_g2_rho_shift", "p_g2_aniso", "p_lap2_tilt", "p_g3_tilt", "p_g3_aniso", "p_cube2_tilt"], "tolerance": 1e-6},
    {"id": "t2_r1", "type": "t2_cube", "pairs": ["p_cube2_tilt"], "cube_radius": 1.0, "tolerance": 1e-6},
    {"id": "t2_r05", "type": "t2_cube", "pairs": ["p_cube2_small_tilt"], "cube_radius": 0.5, "tolerance": 1e-6},
    {"id": "t2_r2", "type": "t2_cube", "pairs": ["p_cube2_big_tilt"], "cube_radius": 2.0, "tolerance": 1e-6},
    {"id": "hj", "type": "hj_bound", "measure": "g2_hj", "functions": "hamilton_jacobi", "t_sequence": [1e-2, 1e-3, 1e-4], "tolerance": 1e-2},
    {"id": "vi", "type": "variance_identity", "measures": ["g2_rho05", "g2_tilt", "triangle", "lap2", "cube2_tilt", "g3_aniso"], "tolerance": 1e-6},
    {"id": "vb", "type": "variance_bounds", "measures": ["g1", "g2", "g2_rho05", "lap2", "triangle", "g3"]},
    {"id": "qv", "type": "quadratic_variation", "measures": ["g2", "lap2", "cube2"]},
    {"id": "mart", "type": "martingale", "measures": ["g2", "lap2", "cube2", "g3"], "tolerance": 1e-6},
    {"id": "steiner", "type": "steiner_law", "measure": "triangle", "tolerance": 0.02},
    {"id": "cheeger", "type": "cheeger_1d", "measures": ["g1", "g1_narrow", "lap1", "g1_tilt"], "tolerance": 0.05},
    {"id": "ncost", "type": "n_cost_properties"},
    {"id": "sample", "type": "sampling", "measure": "g2_rho05", "count": 40000},
    {"id": "shell", "type": "thin_shell", "measure": "g3_sampling", "count": 100000}
  ]
})JSON";
  return config;
}

int run_suite_files(const std::string& config_json, const std::string& out_dir,
                    const RunOptions& options) {
  const SuiteConfig config = parse_suite_config(config_json);
  const SuiteResult result = run_suite(config, options);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create output directory " + out_dir);
  if (config.output.csv) {
    std::ofstream os(out_dir + "/reports.csv");
    require(os.good(), ErrorCode::IoError, "cannot write reports.csv");
    write_reports_csv(result.reports, os);
  }
  if (config.output.json) {
    std::ofstream os(out_dir + "/reports.json");
    require(os.good(), ErrorCode::IoError, "cannot write reports.json");
    write_reports_json(result.reports, os);
  }
  return result.exit_code;
}

}  // namespace lclab
