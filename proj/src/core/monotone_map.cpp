#include "core/monotone_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "core/cost_function.hpp"

namespace lclab {

double MonotoneMap1D::operator()(double x) const {
  if (x <= nodes.front()) return values.front();
  if (x >= nodes.back()) return values.back();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  const double h = nodes[j] - nodes[j - 1];
  const double frac = (x - nodes[j - 1]) / h;
  return values[j - 1] + frac * (values[j] - values[j - 1]);
}

void MonotoneMap1D::save_text(std::ostream& os) const {
  for (std::size_t j = 0; j < nodes.size(); ++j)
    os << format_g17(nodes[j]) << " " << format_g17(values[j]) << "\n";
}

void MonotoneMap1D::save_text_file(const std::string& path) const {
  std::ofstream os(path);
  require(os.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  save_text(os);
  require(os.good(), ErrorCode::IoError, "write failed for " + path);
}

MonotoneMap1D monotone_map(const std::vector<double>& source_nodes,
                           const CdfTable& source_cdf, const CdfTable& target_cdf) {
  MonotoneMap1D map;
  map.nodes = source_nodes;
  map.values.resize(source_nodes.size());
  for (std::size_t j = 0; j < source_nodes.size(); ++j)
    map.values[j] = target_cdf.quantile(source_cdf.cdf(source_nodes[j]));
  // quantile composition is monotone; enforce against rounding
  for (std::size_t j = 1; j < map.values.size(); ++j)
    map.values[j] = std::max(map.values[j], map.values[j - 1]);
  return map;
}

MonotoneMap1D monotone_map(const GridDensity& mu, const GridDensity& nu) {
  require(mu.dim() == 1 && nu.dim() == 1, ErrorCode::DimMismatch,
          "monotone_map needs one-dimensional densities");
  CdfTable fmu(mu.axis_nodes(0), mu.values().values());
  CdfTable fnu(nu.axis_nodes(0), nu.values().values());
  return monotone_map(mu.axis_nodes(0), fmu, fnu);
}

CheegerEstimate cheeger_constant(const GridDensity& gamma) {
  require(gamma.dim() == 1, ErrorCode::DimMismatch, "cheeger_constant is 1D");
  const int one[1] = {1};
  const int two[1] = {2};
  const double m1 = gamma.mixed_moment(one);
  const double m2 = gamma.mixed_moment(two);
  const double var = std::max(0.0, m2 - m1 * m1);
  CheegerEstimate est;
  est.variance = var;
  est.lambda_sq_lower = var > 0.0 ? 1.0 / (3.0 * var) : kInf;
  return est;
}

double pushforward_median(const GridDensity& gamma, const std::vector<double>& fvals) {
  const auto& nodes = gamma.axis_nodes(0);
  const auto& wts = gamma.axis_weights(0);
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fvals[a] < fvals[b];
  });
  double cum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t j = order[r];
    cum += wts[j] * gamma.values()[static_cast<std::int64_t>(j)];
    if (cum >= 0.5) return fvals[j];
  }
  return fvals[order.back()];
}

namespace {
// Difference quotients that keep growing under refinement mark a handle that
// is not locally Lipschitz on the grid.
void check_lipschitz_on_grid(const GridDensity& gamma,
                             const std::function<double(double)>& f,
                             const std::string& label) {
  const auto& nodes = gamma.axis_nodes(0);
  const double h0 = gamma.step(0);
  double first = 0.0;
  double last = 0.0;
  for (int level = 0; level < 3; ++level) {
    const double h = h0 / std::pow(4.0, level);
    double worst = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double x = std::clamp(nodes[j], nodes.front() + h, nodes.back() - h);
      worst = std::max(worst, std::fabs(f(x + h) - f(x - h)) / (2.0 * h));
    }
    if (level == 0) first = worst;
    last = worst;
  }
  // Lipschitz handles stabilize under refinement; cusps keep growing
  if (first > 0.0 && last / first > 3.0)
    fail(ErrorCode::NonLipschitzOnGrid,
         "difference quotients of " + label + " diverge with refinement");
}
}  // namespace

VerificationReport verify_one_dim_functional(const GridDensity& gamma,
                                             const std::function<double(double)>& f,
                                             OneDimMode mode, const std::string& label) {
  require(gamma.dim() == 1, ErrorCode::DimMismatch, "one-dimensional check");
  check_lipschitz_on_grid(gamma, f, label);

  const auto& nodes = gamma.axis_nodes(0);
  const std::size_t m = nodes.size();
  const double h = gamma.step(0);
  std::vector<double> fv(m), dfv(m);
  for (std::size_t j = 0; j < m; ++j) fv[j] = f(nodes[j]);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == 0)
      dfv[j] = (fv[1] - fv[0]) / h;
    else if (j == m - 1)
      dfv[j] = (fv[m - 1] - fv[m - 2]) / h;
    else
      dfv[j] = (fv[j + 1] - fv[j - 1]) / (2.0 * h);
  }

  const auto cheeger = cheeger_constant(gamma);
  const double lambda = std::sqrt(cheeger.lambda_sq_lower);

  double lhs = 0.0, rhs = 0.0;
  std::string id;
  if (mode == OneDimMode::CheegerMedian) {
    id = "cheeger_median/" + label;
    const double med = pushforward_median(gamma, fv);
    lhs = lambda * gamma.expect([&](std::int64_t flat, std::span<const int>) {
      return std::fabs(fv[static_cast<std::size_t>(flat)] - med);
    });
    rhs = gamma.expect([&](std::int64_t flat, std::span<const int>) {
      return std::fabs(dfv[static_cast<std::size_t>(flat)]);
    });
  } else {
    id = "cheeger_gamma_N/" + label;
    const double mean = gamma.expect([&](std::int64_t flat, std::span<const int>) {
      return fv[static_cast<std::size_t>(flat)];
    });
    lhs = gamma.expect([&](std::int64_t flat, std::span<const int>) {
             return n_cost(lambda * (fv[static_cast<std::size_t>(flat)] - mean));
           }) /
          16.0;
    rhs = gamma.expect([&](std::int64_t flat, std::span<const int>) {
      return n_cost(dfv[static_cast<std::size_t>(flat)]);
    });
  }

  auto report = VerificationReport::make(
      id, lhs, rhs, 1e-9 * (1.0 + std::fabs(rhs)),
      hex64(fnv1a64(id + "/" + format_g17(cheeger.variance))));
  report.constant_used = lambda;
  report.best_constant_estimate = lhs > 0.0 ? rhs / lhs * lambda : kNaN;
  return report;
}

double estimate_cheeger_constant(const GridDensity& gamma,
                                 const std::vector<std::function<double(double)>>& family) {
  const auto& nodes = gamma.axis_nodes(0);
  const std::size_t m = nodes.size();
  const double h = gamma.step(0);
  double best = kInf;
  for (const auto& f : family) {
    std::vector<double> fv(m), dfv(m);
    for (std::size_t j = 0; j < m; ++j) fv[j] = f(nodes[j]);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == 0)
        dfv[j] = (fv[1] - fv[0]) / h;
      else if (j == m - 1)
        dfv[j] = (fv[m - 1] - fv[m - 2]) / h;
      else
        dfv[j] = (fv[j + 1] - fv[j - 1]) / (2.0 * h);
    }
    const double med = pushforward_median(gamma, fv);
    const double denom = gamma.expect([&](std::int64_t flat, std::span<const int>) {
      return std::fabs(fv[static_cast<std::size_t>(flat)] - med);
    });
    if (denom <= 1e-13) continue;
    const double num = gamma.expect([&](std::int64_t flat, std::span<const int>) {
      return std::fabs(dfv[static_cast<std::size_t>(flat)]);
    });
    best = std::min(best, num / denom);
  }
  return best;
}

std::vector<std::function<double(double)>> cheeger_probe_family(const GridDensity& gamma) {
  std::vector<std::function<double(double)>> family;
  CdfTable cdf(gamma.axis_nodes(0), gamma.values().values());
  const double w = 3.0 * gamma.step(0);

  // 21 steep clipped ramps centered at interior quantiles: these approximate
  // half-line indicators, whose ratio recovers the isoperimetric constant.
  for (int k = 0; k < 21; ++k) {
    const double q = 0.05 + 0.9 * k / 20.0;
    const double c = cdf.quantile(q);
    family.push_back([c, w](double x) { return std::clamp((x - c) / w, 0.0, 1.0); });
  }
  // 10 sigmoids of varying sharpness
  for (int k = 0; k < 10; ++k) {
    const double q = 0.1 + 0.8 * k / 9.0;
    const double c = cdf.quantile(q);
    const double s = w * (1.0 + k);
    family.push_back([c, s](double x) { return std::tanh((x - c) / s); });
  }
  // 5 kinks
  for (int k = 0; k < 5; ++k) {
    const double c = cdf.quantile(0.2 + 0.15 * k);
    family.push_back([c](double x) { return std::fabs(x - c); });
  }
  // 6 trigonometric probes
  for (int k = 1; k <= 6; ++k) {
    const double scale = cdf.quantile(0.9) - cdf.quantile(0.1);
    const double omega = k / std::max(scale, 1e-9);
    family.push_back([omega, k](double x) {
      return k % 2 == 0 ? std::sin(omega * x) : std::cos(omega * x);
    });
  }
  // 4 quadratics / linears
  const double c0 = cdf.quantile(0.5);
  family.push_back([](double x) { return x; });
  family.push_back([c0](double x) { return (x - c0) * (x - c0); });
  family.push_back([c0](double x) { return (x - c0) * (x - c0) * (x - c0); });
  family.push_back([c0](double x) { return std::exp(-(x - c0) * (x - c0)); });
  // 4 wider ramps
  for (int k = 0; k < 4; ++k) {
    const double c = cdf.quantile(0.3 + 0.15 * k);
    const double s = w * (2 + 3 * k);
    family.push_back([c, s](double x) { return std::clamp((x - c) / s, -1.0, 1.0); });
  }
  return family;  // 50 probes
}

}  // namespace lclab
