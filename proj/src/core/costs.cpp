#include "core/costs.hpp"

#include <algorithm>
#include <cmath>

namespace lclab {

namespace {
// lambda * dx with the extended-real conventions 0*inf = 0, a*inf = sign(a)*inf
double weighted_displacement(double lambda_sq, double dx) {
  if (lambda_sq == kInf) return dx == 0.0 ? 0.0 : (dx > 0.0 ? kInf : -kInf);
  return std::sqrt(lambda_sq) * dx;
}
}  // namespace

double cost_eval(const CostSpec& spec, std::span<const double> x,
                 std::span<const double> y) {
  const int n = spec.moments->dim();
  require(static_cast<int>(x.size()) == n && static_cast<int>(y.size()) == n,
          ErrorCode::DimMismatch, "cost_eval dimension mismatch");
  std::vector<double> s(static_cast<std::size_t>(n));
  spec.inverse_recentering->apply_into(x, s);
  if (spec.variant == CostVariant::SumForm) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double lsq = spec.moments->lambda_sq_at(i, std::span<const double>(s.data(), static_cast<std::size_t>(i)));
      acc += n_cost(weighted_displacement(lsq, x[i] - y[i]));
    }
    return acc / 16.0;
  }
  double q = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lsq = spec.moments->lambda_sq_at(i, std::span<const double>(s.data(), static_cast<std::size_t>(i)));
    const double dx = x[i] - y[i];
    if (lsq == kInf) {
      if (dx != 0.0) return kInf;
      continue;
    }
    q += lsq * dx * dx;
  }
  return n_cost(std::sqrt(q)) / 16.0;
}

double relative_entropy(const GridDensity& nu, const GridDensity& mu) {
  require(nu.dim() == mu.dim(), ErrorCode::DimMismatch,
          "relative_entropy dimension mismatch");
  for (int a = 0; a < mu.dim(); ++a)
    require(std::fabs(nu.box().lo[a] - mu.box().lo[a]) +
                    std::fabs(nu.box().hi[a] - mu.box().hi[a]) <=
                1e-9 * (1.0 + std::fabs(mu.box().hi[a])),
            ErrorCode::DimMismatch, "relative_entropy requires a common box");
  if (nu.shape() != mu.shape()) {
    // resample onto the finer mesh
    std::vector<int> fine(static_cast<std::size_t>(mu.dim()));
    for (int a = 0; a < mu.dim(); ++a)
      fine[static_cast<std::size_t>(a)] =
          std::max(nu.shape()[static_cast<std::size_t>(a)], mu.shape()[static_cast<std::size_t>(a)]);
    const GridDensity nu_f = regrid(nu, mu.box(), fine);
    const GridDensity mu_f = regrid(mu, mu.box(), fine);
    return relative_entropy(nu_f, mu_f);
  }
  std::vector<double> terms(static_cast<std::size_t>(mu.values().size()), 0.0);
  bool infinite = false;
  for_each_index(mu.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    const double p = nu.values()[flat];
    if (p <= 0.0) return;  // 0 log 0 = 0
    const double q = mu.values()[flat];
    if (q <= 0.0) {
      infinite = true;
      return;
    }
    terms[static_cast<std::size_t>(flat)] = nu.node_weight(idx) * p * std::log(p / q);
  });
  if (infinite) return kInf;
  const double d = pairwise_sum(terms);
  return std::max(0.0, d);
}

double knothe_coupling_cost(std::shared_ptr<const GridDensity> mu,
                            std::shared_ptr<const GridDensity> nu,
                            const CostSpec& spec) {
  const auto map = build_knothe(mu, nu);
  const GridDensity& m = *mu;
  const int n = m.dim();
  require(spec.moments->dim() == n, ErrorCode::DimMismatch,
          "cost context dimension mismatch");

  // per-axis tables at prefix nodes: conditional mean of T_i and of X_i,
  // lambda_i; scattered into per-node buffers of the coupling displacement
  const std::int64_t total = m.values().size();
  std::vector<double> disp(static_cast<std::size_t>(total * n), 0.0);
  std::vector<double> lam_sq(static_cast<std::size_t>(total * n), kNaN);

  for (int axis = 0; axis < n; ++axis) {
    std::vector<int> prefix_shape(m.shape().begin(), m.shape().begin() + axis);
    const Tensor& marg = m.prefix_marginal(axis + 1);
    const int cnt = m.shape()[static_cast<std::size_t>(axis)];
    const auto& nodes = m.axis_nodes(axis);
    const auto& wts = m.axis_weights(axis);
    for_each_index(prefix_shape, [&](std::int64_t, std::span<const int> pidx) {
      std::int64_t base = 0;
      for (int a = 0; a < axis; ++a) base += pidx[a] * marg.stride(a);
      const std::int64_t st = marg.stride(axis);
      double z = 0.0;
      for (int j = 0; j < cnt; ++j) z += wts[static_cast<std::size_t>(j)] * marg[base + j * st];
      if (!(z > 0.0)) return;
      const auto& data = map->node_slice_data(axis, pidx);
      const auto& t_vals = data.map->values;
      // conditional means of X_i and T_i(X) given the prefix
      double mx = 0.0, mt = 0.0;
      for (int j = 0; j < cnt; ++j) {
        const double w = wts[static_cast<std::size_t>(j)] * marg[base + j * st] / z;
        mx += w * nodes[static_cast<std::size_t>(j)];
        mt += w * t_vals[static_cast<std::size_t>(j)];
      }
      const double lsq = spec.moments->lambda_sq_node(axis, pidx);
      // scatter over the full grid nodes sharing this prefix+axis coordinate
      // (trailing axes are contiguous: stride(axis) nodes per coordinate)
      std::int64_t vbase = 0;
      for (int a = 0; a < axis; ++a) vbase += pidx[a] * m.values().stride(a);
      const std::int64_t vst = m.values().stride(axis);
      const std::int64_t tail = vst;
      for (int j = 0; j < cnt; ++j) {
        const double xbar_minus_ybar =
            (nodes[static_cast<std::size_t>(j)] - mx) - (t_vals[static_cast<std::size_t>(j)] - mt);
        for (std::int64_t r = 0; r < tail; ++r) {
          const std::int64_t flat = vbase + j * vst + r;
          disp[static_cast<std::size_t>(flat * n + axis)] = xbar_minus_ybar;
          lam_sq[static_cast<std::size_t>(flat * n + axis)] = lsq;
        }
      }
    });
  }

  std::vector<double> terms(static_cast<std::size_t>(total), 0.0);
  for_each_index(m.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    const double mass = m.node_weight(idx) * m.values()[flat];
    if (mass <= 0.0) return;
    double c;
    if (spec.variant == CostVariant::SumForm) {
      c = 0.0;
      for (int i = 0; i < n; ++i) {
        const double lsq = lam_sq[static_cast<std::size_t>(flat * n + i)];
        const double dx = disp[static_cast<std::size_t>(flat * n + i)];
        if (std::isnan(lsq)) continue;
        c += n_cost(lsq == kInf ? (dx == 0.0 ? 0.0 : kInf)
                                : std::sqrt(lsq) * dx);
      }
      c /= 16.0;
    } else {
      double q = 0.0;
      for (int i = 0; i < n; ++i) {
        const double lsq = lam_sq[static_cast<std::size_t>(flat * n + i)];
        const double dx = disp[static_cast<std::size_t>(flat * n + i)];
        if (std::isnan(lsq)) continue;
        if (lsq == kInf) {
          if (dx != 0.0) { q = kInf; break; }
          continue;
        }
        q += lsq * dx * dx;
      }
      c = n_cost(std::sqrt(q)) / 16.0;
    }
    terms[static_cast<std::size_t>(flat)] = mass * c;
  });
  return pairwise_sum(terms);
}

W2Bound w2_upper_bound(std::shared_ptr<const GridDensity> mu_bar,
                       std::shared_ptr<const GridDensity> nu_bar) {
  require(mu_bar->dim() == nu_bar->dim(), ErrorCode::DimMismatch,
          "w2 dimension mismatch");
  W2Bound out;
  if (mu_bar->dim() == 1) {
    const MonotoneMap1D t = monotone_map(*mu_bar, *nu_bar);
    const auto& nodes = mu_bar->axis_nodes(0);
    const double c2 = mu_bar->expect([&](std::int64_t flat, std::span<const int>) {
      const double d = t.values[static_cast<std::size_t>(flat)] - nodes[static_cast<std::size_t>(flat)];
      return d * d;
    });
    out.value = std::sqrt(std::max(0.0, c2));
    out.exact = true;
    return out;
  }
  // quadratic coupling cost E |T(X) - X|^2 over source nodes
  const auto map = build_knothe(mu_bar, nu_bar);
  const GridDensity& m = *mu_bar;
  const int n = m.dim();
  std::vector<double> buf(static_cast<std::size_t>(m.values().size()), 0.0);
  std::vector<double> pt(static_cast<std::size_t>(n));
  for_each_index(m.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    const double mass = m.node_weight(idx) * m.values()[flat];
    if (mass <= 0.0) return;
    m.node_point(idx, pt);
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto slice = map->node_slice(i, idx.first(static_cast<std::size_t>(i)));
      const double d = slice->values[static_cast<std::size_t>(idx[i])] - pt[static_cast<std::size_t>(i)];
      q += d * d;
    }
    buf[static_cast<std::size_t>(flat)] = mass * q;
  });
  out.value = std::sqrt(std::max(0.0, pairwise_sum(buf)));
  out.exact = false;
  return out;
}

}  // namespace lclab
