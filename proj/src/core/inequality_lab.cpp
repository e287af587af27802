#include "core/inequality_lab.hpp"

#include <algorithm>
#include <cmath>

namespace lclab {

double weighted_poincare_constant() {
  const double r = 4.0 * std::sqrt(3.0) + 1.0;
  return r * r;
}

namespace {
void gradient_of(const TestFunction& f, std::span<const double> x, double step,
                 std::span<double> g) {
  if (f.has_gradient()) {
    f.gradient(x, g);
    return;
  }
  std::vector<double> p(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + step;
    const double fp = f.value(p);
    p[i] = keep - step;
    const double fm = f.value(p);
    p[i] = keep;
    g[i] = (fp - fm) / (2.0 * step);
  }
}
}  // namespace

std::vector<VerificationReport> verify_weighted_poincare(
    const GridDensity& mu, const ConditionalMoments& moments,
    const TestFunctionFamily& family, const PoincareOptions& options,
    const std::string& measure_label) {
  const double a = options.constant > 0.0 ? options.constant : weighted_poincare_constant();
  const int n = mu.dim();
  const RecenteredView view = make_recentered_view(mu, moments);

  // E[X_i^2 | prefix] weights for the specialization, and whether the
  // measure has (numerically) vanishing conditional means
  double worst_mean = 0.0;
  {
    std::vector<double> buf(static_cast<std::size_t>(view.nodes));
    for (int i = 0; i < n; ++i) {
      for_each_index(mu.shape(), [&](std::int64_t flat, std::span<const int> idx) {
        buf[static_cast<std::size_t>(flat)] =
            mu.node_weight(idx) * mu.values()[flat] *
            std::fabs(view.xred_at(flat)[i]);
      });
      worst_mean = std::max(worst_mean, pairwise_sum(buf));
    }
  }
  double scale_x = 0.0;
  for (int a2 = 0; a2 < n; ++a2)
    scale_x = std::max({scale_x, std::fabs(mu.box().lo[a2]), std::fabs(mu.box().hi[a2])});
  const bool martingale_like = worst_mean <= 1e-8 * (1.0 + scale_x);

  std::vector<VerificationReport> reports;
  std::vector<double> grad(static_cast<std::size_t>(n));
  std::vector<double> lhs_buf(static_cast<std::size_t>(view.nodes));
  std::vector<double> sq_buf(static_cast<std::size_t>(view.nodes));
  std::vector<double> rhs_buf(static_cast<std::size_t>(view.nodes));
  std::vector<double> rhs2_buf(static_cast<std::size_t>(view.nodes));

  for (const auto& f : family) {
    for_each_index(mu.shape(), [&](std::int64_t flat, std::span<const int> idx) {
      const double mass = mu.node_weight(idx) * mu.values()[flat];
      const auto xb = view.xbar_at(flat);
      if (mass <= 0.0) {
        lhs_buf[static_cast<std::size_t>(flat)] = 0.0;
        sq_buf[static_cast<std::size_t>(flat)] = 0.0;
        rhs_buf[static_cast<std::size_t>(flat)] = 0.0;
        rhs2_buf[static_cast<std::size_t>(flat)] = 0.0;
        return;
      }
      const double fv = f.value(xb);
      gradient_of(f, xb, mu.step(0), grad);
      double wsum = 0.0;
      double wsum2 = 0.0;
      const auto vars = view.var_at(flat);
      const auto means = view.xred_at(flat);
      for (int i = 0; i < n; ++i) {
        const double gi2 = grad[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(i)];
        wsum += vars[i] * gi2;
        wsum2 += (vars[i] + means[i] * means[i]) * gi2;
      }
      lhs_buf[static_cast<std::size_t>(flat)] = mass * fv;
      sq_buf[static_cast<std::size_t>(flat)] = mass * fv * fv;
      rhs_buf[static_cast<std::size_t>(flat)] = mass * wsum;
      rhs2_buf[static_cast<std::size_t>(flat)] = mass * wsum2;
    });
    const double mean = pairwise_sum(lhs_buf);
    const double lhs = std::max(0.0, pairwise_sum(sq_buf) - mean * mean);
    const double rhs_sum = pairwise_sum(rhs_buf);
    const double rhs = a * rhs_sum;
    const double scale = std::max({1.0, lhs, rhs});
    const std::string id = "weighted_poincare/" + measure_label + "/" + f.label;
    auto rep = VerificationReport::make(id, lhs, rhs, options.tolerance_scale * scale,
                                        hex64(fnv1a64(id)));
    rep.constant_used = a;
    rep.best_constant_estimate = rhs_sum > 1e-14 * scale ? lhs / rhs_sum : kNaN;
    reports.push_back(std::move(rep));

    if (martingale_like) {
      const double rhs2 = a * pairwise_sum(rhs2_buf);
      const std::string id2 = "weighted_poincare_wp2/" + measure_label + "/" + f.label;
      auto rep2 = VerificationReport::make(
          id2, lhs, rhs2, options.tolerance_scale * std::max({1.0, lhs, rhs2}),
          hex64(fnv1a64(id2)));
      rep2.constant_used = a;
      reports.push_back(std::move(rep2));
    }
  }
  return reports;
}

VerificationReport verify_transport_entropy(std::shared_ptr<const GridDensity> mu,
                                            std::shared_ptr<const GridDensity> nu,
                                            const RecenteringPair& rec,
                                            double tolerance, const std::string& label) {
  const CostSpec spec = CostSpec::from(rec, CostVariant::SumForm);
  const double lhs = knothe_coupling_cost(mu, nu, spec);
  const double rhs = relative_entropy(*nu, *mu);
  const std::string id = "transport_entropy/" + label;
  auto rep = VerificationReport::make(id, lhs, rhs, tolerance, hex64(fnv1a64(id)));
  rep.constant_used = 1.0;
  rep.best_constant_estimate = rhs > 1e-12 ? lhs / rhs : kNaN;
  return rep;
}

VerificationReport verify_entropy_lower_bound(std::shared_ptr<const GridDensity> mu,
                                              std::shared_ptr<const GridDensity> nu,
                                              double tolerance, const std::string& label) {
  const EntropyBound eb = entropy_lower_bound(mu, nu);
  const std::string id = "knothe_entropy_bound/" + label;
  auto rep = VerificationReport::make(id, eb.bound, eb.entropy, tolerance,
                                      hex64(fnv1a64(id)));
  rep.constant_used = 1.0;
  return rep;
}

std::vector<VerificationReport> verify_t2_cube(std::shared_ptr<const GridDensity> mu,
                                               std::shared_ptr<const GridDensity> nu,
                                               double cube_radius,
                                               const RecenteringPair& rec_mu,
                                               double tolerance, const std::string& label) {
  std::vector<VerificationReport> reports;
  const double floor = 1.0 / (6.0 * cube_radius * cube_radius);
  const double min_lsq = rec_mu.moments->min_lambda_sq();
  {
    const std::string id = "t2_cube_weight_floor/" + label;
    auto rep = VerificationReport::make(id, floor, std::min(min_lsq, 1e300),
                                        tolerance, hex64(fnv1a64(id)));
    rep.constant_used = floor;
    reports.push_back(std::move(rep));
  }
  const double entropy = relative_entropy(*nu, *mu);
  const std::string id = "t2_cube_ratio/" + label;
  if (entropy <= 1e-12) {
    auto rep = VerificationReport::make(id, 0.0, 0.0, tolerance, hex64(fnv1a64(id)), false);
    rep.best_constant_estimate = kNaN;
    reports.push_back(std::move(rep));
    return reports;
  }
  const RecenteringPair rec_nu = build_recentering(*nu);
  const GridDensity mu_bar = recentered_law_grid(*mu, rec_mu);
  const GridDensity nu_bar = recentered_law_grid(*nu, rec_nu);
  const W2Bound w2 = w2_upper_bound(std::make_shared<GridDensity>(mu_bar),
                                    std::make_shared<GridDensity>(nu_bar));
  const double lhs = w2.value * w2.value;
  const double rhs = cube_radius * cube_radius * entropy;
  auto rep = VerificationReport::make(id, lhs, rhs, kInf, hex64(fnv1a64(id)), false);
  rep.pass = true;  // ratio is reported, not asserted
  rep.best_constant_estimate = lhs / rhs;
  reports.push_back(std::move(rep));
  return reports;
}

double sup_convolution(const CostSpec& context, const TestFunction& f, double t,
                       std::span<const double> x) {
  require(t > 0.0, ErrorCode::InvalidArgument, "sup_convolution requires t > 0");
  require(f.sup_bound > 0.0, ErrorCode::InvalidArgument,
          "sup_convolution needs a bounded f with known bound");
  const int n = context.moments->dim();
  std::vector<double> s(static_cast<std::size_t>(n));
  context.inverse_recentering->apply_into(x, s);
  std::vector<double> lam_sq(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    lam_sq[static_cast<std::size_t>(i)] =
        context.moments->lambda_sq_at(i, std::span<const double>(s.data(), static_cast<std::size_t>(i)));

  const double big_m = 1.0 + f.sup_bound;
  const double radius = n_cost_inverse(48.0 * big_m * t);

  auto cost = [&](std::span<const double> y) {
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      const double dx = x[i] - y[i];
      if (lam_sq[static_cast<std::size_t>(i)] == kInf) {
        if (dx != 0.0) return kInf;
        continue;
      }
      q += lam_sq[static_cast<std::size_t>(i)] * dx * dx;
    }
    return n_cost(std::sqrt(q)) / 16.0;
  };
  auto objective = [&](std::span<const double> y) {
    const double c = cost(y);
    return c == kInf ? -kInf : f.value(y) - c / t;
  };

  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double lsq = lam_sq[static_cast<std::size_t>(i)];
    const double half = lsq == kInf ? 0.0 : radius / std::sqrt(lsq);
    lo[static_cast<std::size_t>(i)] = x[i] - half;
    hi[static_cast<std::size_t>(i)] = x[i] + half;
  }

  double best = f.value(x);  // y = x gives f(x); P_t f >= f always
  std::vector<double> y(static_cast<std::size_t>(n));
  std::vector<int> grid_idx(static_cast<std::size_t>(n), 0);
  const int starts_per_axis = 3;
  std::int64_t total_starts = 1;
  for (int i = 0; i < n; ++i) total_starts *= starts_per_axis;
  for (std::int64_t sidx = 0; sidx < total_starts; ++sidx) {
    std::int64_t rem = sidx;
    for (int i = 0; i < n; ++i) {
      const int g = static_cast<int>(rem % starts_per_axis);
      rem /= starts_per_axis;
      const double frac = starts_per_axis == 1 ? 0.5 : static_cast<double>(g) / (starts_per_axis - 1);
      y[static_cast<std::size_t>(i)] =
          lo[static_cast<std::size_t>(i)] +
          frac * (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]);
    }
    double cur = objective(y);
    for (int sweep = 0; sweep < 6; ++sweep) {
      const double before = cur;
      for (int i = 0; i < n; ++i) {
        if (hi[static_cast<std::size_t>(i)] <= lo[static_cast<std::size_t>(i)]) continue;
        double arg = y[static_cast<std::size_t>(i)];
        const double val = golden_max(
            [&](double u) {
              const double keep = y[static_cast<std::size_t>(i)];
              y[static_cast<std::size_t>(i)] = u;
              const double v = objective(y);
              y[static_cast<std::size_t>(i)] = keep;
              return v;
            },
            lo[static_cast<std::size_t>(i)], hi[static_cast<std::size_t>(i)], 48, &arg);
        if (val > cur) {
          cur = val;
          y[static_cast<std::size_t>(i)] = arg;
        }
      }
      if (cur - before <= 1e-15 * (1.0 + std::fabs(cur))) break;
    }
    best = std::max(best, cur);
  }
  return best;
}

HjCheck verify_hj_bound(const CostSpec& context, const GridDensity& nu,
                        const TestFunction& f, std::span<const double> t_sequence,
                        double tolerance, const std::string& label) {
  require(!t_sequence.empty(), ErrorCode::InvalidArgument, "empty t sequence");
  require(f.lipschitz > 0.0, ErrorCode::InvalidArgument,
          "verify_hj_bound needs a Lipschitz bound for f");
  const int n = nu.dim();
  HjCheck out;
  out.fatou_constant = hj_uniform_constant();

  // per-node contexts: lambda^{-2} at S(x), gradient of f
  const std::int64_t total = nu.values().size();
  std::vector<double> pt(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n));
  std::vector<double> grad(static_cast<std::size_t>(n));
  std::vector<double> rhs_buf(static_cast<std::size_t>(total), 0.0);
  std::vector<double> inv_min_lsq(static_cast<std::size_t>(total), 0.0);
  bool integrable = true;
  for_each_index(nu.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    const double mass = nu.node_weight(idx) * nu.values()[flat];
    if (mass <= 0.0) return;
    nu.node_point(idx, pt);
    context.inverse_recentering->apply_into(pt, s);
    gradient_of(f, pt, nu.step(0), grad);
    double acc = 0.0;
    double min_lsq = kInf;
    for (int i = 0; i < n; ++i) {
      const double lsq = context.moments->lambda_sq_at(
          i, std::span<const double>(s.data(), static_cast<std::size_t>(i)));
      min_lsq = std::min(min_lsq, lsq);
      if (lsq == kInf) continue;  // degenerate coordinates contribute zero
      acc += grad[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(i)] / lsq;
    }
    if (!std::isfinite(acc)) integrable = false;
    rhs_buf[static_cast<std::size_t>(flat)] = mass * 8.0 * acc;
    inv_min_lsq[static_cast<std::size_t>(flat)] = min_lsq == kInf ? 0.0 : 1.0 / min_lsq;
  });
  if (!integrable)
    fail(ErrorCode::IntegrabilityFailed,
         "Int lambda_i^{-2}(S) dnu is not finite");
  out.rhs = pairwise_sum(rhs_buf);

  const double a = out.fatou_constant;
  const double l2 = f.lipschitz * f.lipschitz;
  double worst_fatou_excess = -kInf;
  std::vector<double> qbuf(static_cast<std::size_t>(total), 0.0);
  for (double t : t_sequence) {
    for_each_index(nu.shape(), [&](std::int64_t flat, std::span<const int> idx) {
      const double mass = nu.node_weight(idx) * nu.values()[flat];
      if (mass <= 0.0) {
        qbuf[static_cast<std::size_t>(flat)] = 0.0;
        return;
      }
      nu.node_point(idx, pt);
      const double p = sup_convolution(context, f, t, pt);
      const double q = (p - f.value(pt)) / t;
      qbuf[static_cast<std::size_t>(flat)] = mass * q;
      const double bound = a * l2 * inv_min_lsq[static_cast<std::size_t>(flat)];
      worst_fatou_excess = std::max(worst_fatou_excess, q - bound);
    });
    out.quotients.push_back(pairwise_sum(qbuf));
  }

  const double scale = std::max(1.0, std::fabs(out.rhs));
  {
    const std::string id = "hj_limsup/" + label;
    auto rep = VerificationReport::make(id, out.quotients.back(), out.rhs,
                                        tolerance * scale, hex64(fnv1a64(id)));
    rep.constant_used = 8.0;
    rep.best_constant_estimate =
        out.rhs > 1e-12 ? out.quotients.back() / (out.rhs / 8.0) : kNaN;
    out.reports.push_back(std::move(rep));
  }
  {
    const std::string id = "hj_fatou/" + label;
    auto rep = VerificationReport::make(id, worst_fatou_excess, 0.0,
                                        tolerance * scale, hex64(fnv1a64(id)));
    rep.constant_used = a;
    out.reports.push_back(std::move(rep));
  }
  return out;
}

double gradient_discrepancy(const TestFunction& f,
                            std::span<const double> probe_points, int dim) {
  if (!f.has_gradient()) return 0.0;
  const std::int64_t count = static_cast<std::int64_t>(probe_points.size()) / dim;
  std::vector<double> ga(static_cast<std::size_t>(dim)), gf(static_cast<std::size_t>(dim));
  std::vector<double> p(static_cast<std::size_t>(dim));
  double worst = 0.0;
  for (std::int64_t k = 0; k < count; ++k) {
    for (int i = 0; i < dim; ++i) p[static_cast<std::size_t>(i)] = probe_points[static_cast<std::size_t>(k * dim + i)];
    f.gradient(p, ga);
    // near-optimal central-difference step for smooth doubles
    for (int i = 0; i < dim; ++i) {
      const double h = 6e-6 * (1.0 + std::fabs(p[static_cast<std::size_t>(i)]));
      const double keep = p[static_cast<std::size_t>(i)];
      p[static_cast<std::size_t>(i)] = keep + h;
      const double fp = f.value(p);
      p[static_cast<std::size_t>(i)] = keep - h;
      const double fm = f.value(p);
      p[static_cast<std::size_t>(i)] = keep;
      gf[static_cast<std::size_t>(i)] = (fp - fm) / (2.0 * h);
    }
    for (int i = 0; i < dim; ++i)
      worst = std::max(worst, std::fabs(ga[static_cast<std::size_t>(i)] - gf[static_cast<std::size_t>(i)]));
  }
  return worst;
}

}  // namespace lclab
