#include "core/grid_density.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lclab {

CdfTable::CdfTable(std::vector<double> nodes, std::span<const double> density)
    : nodes_(std::move(nodes)), density_(density.begin(), density.end()) {
  const std::size_t m = nodes_.size();
  cum_.assign(m, 0.0);
  for (std::size_t j = 1; j < m; ++j) {
    const double h = nodes_[j] - nodes_[j - 1];
    cum_[j] = cum_[j - 1] + 0.5 * h * (density[j - 1] + density[j]);
  }
}

double CdfTable::cdf(double x) const {
  const double total = total_mass();
  if (total <= 0.0) return 0.0;
  if (x <= nodes_.front()) return 0.0;
  if (x >= nodes_.back()) return 1.0;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
  const double h = nodes_[j] - nodes_[j - 1];
  const double frac = (x - nodes_[j - 1]) / h;
  return (cum_[j - 1] + frac * (cum_[j] - cum_[j - 1])) / total;
}

double CdfTable::quantile(double t) const {
  const double total = total_mass();
  if (total <= 0.0) return nodes_.empty() ? 0.0 : nodes_.front();
  const double target = std::clamp(t, 0.0, 1.0) * total;
  // smallest node index with cum >= target
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
  if (it == cum_.begin()) return nodes_.front();
  if (it == cum_.end()) return nodes_.back();
  const std::size_t j = static_cast<std::size_t>(it - cum_.begin());
  const double dm = cum_[j] - cum_[j - 1];
  if (dm <= 0.0) return nodes_[j];
  const double frac = (target - cum_[j - 1]) / dm;
  return nodes_[j - 1] + frac * (nodes_[j] - nodes_[j - 1]);
}

double CdfTable::quantile_pwl(double t) const {
  const double total = total_mass();
  if (total <= 0.0) return nodes_.empty() ? 0.0 : nodes_.front();
  const double target = std::clamp(t, 0.0, 1.0) * total;
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
  if (it == cum_.begin()) return nodes_.front();
  if (it == cum_.end()) return nodes_.back();
  const std::size_t j = static_cast<std::size_t>(it - cum_.begin());
  const double dm = cum_[j] - cum_[j - 1];
  if (dm <= 0.0) return nodes_[j];
  const double h = nodes_[j] - nodes_[j - 1];
  const double va = density_[j - 1];
  const double vb = density_[j];
  const double r = target - cum_[j - 1];
  const double slope = (vb - va) / h;
  double s;
  if (std::fabs(slope) * h <= 1e-12 * (va + vb)) {
    s = r / std::max(0.5 * (va + vb), 1e-300);
  } else {
    // solve va s + slope s^2 / 2 = r on [0, h]
    const double disc = va * va + 2.0 * slope * r;
    s = (std::sqrt(std::max(0.0, disc)) - va) / slope;
  }
  return nodes_[j - 1] + std::clamp(s, 0.0, h);
}

namespace {
void validate_shape(const Box& box, const std::vector<int>& shape) {
  require(static_cast<int>(shape.size()) == box.dim, ErrorCode::DimMismatch,
          "shape rank must match box dimension");
  std::int64_t total = 1;
  for (int s : shape) {
    require(s >= 8, ErrorCode::InvalidArgument, "grid needs >= 8 points per axis");
    total *= s;
    require(total <= (std::int64_t{1} << 26), ErrorCode::InvalidArgument,
            "grid size exceeds 2^26 nodes");
  }
}
}  // namespace

GridDensity::GridDensity(Box box, std::vector<int> shape, std::vector<double> raw_values)
    : GridDensity(std::move(box), std::move(shape), std::move(raw_values), {}) {}

GridDensity::GridDensity(Box box, std::vector<int> shape, std::vector<double> raw_values,
                         std::vector<double> log_values)
    : box_(std::move(box)), shape_(std::move(shape)) {
  validate_shape(box_, shape_);
  values_ = Tensor(shape_);
  require(static_cast<std::int64_t>(raw_values.size()) == values_.size(),
          ErrorCode::DimMismatch, "value count does not match grid shape");
  for (std::int64_t i = 0; i < values_.size(); ++i) {
    require(raw_values[static_cast<std::size_t>(i)] >= 0.0, ErrorCode::InvalidArgument,
            "density values must be nonnegative");
    values_[i] = raw_values[static_cast<std::size_t>(i)];
  }
  log_values_ = Tensor(shape_);
  if (!log_values.empty()) {
    require(static_cast<std::int64_t>(log_values.size()) == values_.size(),
            ErrorCode::DimMismatch, "log value count does not match grid shape");
    for (std::int64_t i = 0; i < values_.size(); ++i)
      log_values_[i] = log_values[static_cast<std::size_t>(i)];
  } else {
    for (std::int64_t i = 0; i < values_.size(); ++i)
      log_values_[i] = values_[i] > 0.0 ? std::log(values_[i]) : -kInf;
  }
  init_axes();
  normalize();
  build_marginals();
}

void GridDensity::init_axes() {
  const int n = dim();
  step_.resize(static_cast<std::size_t>(n));
  nodes_.resize(static_cast<std::size_t>(n));
  weights_.resize(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const int m = shape_[static_cast<std::size_t>(a)];
    const double h = box_.length(a) / (m - 1);
    step_[static_cast<std::size_t>(a)] = h;
    auto& nd = nodes_[static_cast<std::size_t>(a)];
    auto& wt = weights_[static_cast<std::size_t>(a)];
    nd.resize(static_cast<std::size_t>(m));
    wt.assign(static_cast<std::size_t>(m), h);
    for (int j = 0; j < m; ++j) nd[static_cast<std::size_t>(j)] = box_.lo[a] + h * j;
    nd.back() = box_.hi[a];
    wt.front() = 0.5 * h;
    wt.back() = 0.5 * h;
  }
}

void GridDensity::normalize() {
  std::vector<double> buf(static_cast<std::size_t>(values_.size()));
  for_each_index(shape_, [&](std::int64_t flat, std::span<const int> idx) {
    buf[static_cast<std::size_t>(flat)] = node_weight(idx) * values_[flat];
  });
  const double z = pairwise_sum(buf);
  require(std::isfinite(z), ErrorCode::InvalidArgument,
          "grid mass is not finite");
  if (z <= 0.0)
    fail(ErrorCode::MassUnderflow,
         "all grid values vanish; domain and potential are mismatched");
  // already-normalized input (e.g. a reloaded density) keeps its bits
  if (std::fabs(z - 1.0) <= 1e-13) return;
  for (std::int64_t i = 0; i < values_.size(); ++i) values_[i] /= z;
}

void GridDensity::build_marginals() {
  const int n = dim();
  marginals_.clear();
  if (n == 1) return;
  marginals_.resize(static_cast<std::size_t>(n - 1));
  // integrate the trailing axis repeatedly: marginals_[k-1] has k axes
  const Tensor* src = &values_;
  for (int k = n - 1; k >= 1; --k) {
    std::vector<int> mshape(shape_.begin(), shape_.begin() + k);
    Tensor out(mshape);
    const int m = shape_[static_cast<std::size_t>(k)];
    const auto& wt = weights_[static_cast<std::size_t>(k)];
    const std::int64_t inner = src->size() / out.size();
    for (std::int64_t p = 0; p < out.size(); ++p) {
      const double* row = src->data() + p * inner;
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += wt[static_cast<std::size_t>(j)] * row[j];
      out[p] = s;
    }
    marginals_[static_cast<std::size_t>(k - 1)] = std::move(out);
    src = &marginals_[static_cast<std::size_t>(k - 1)];
  }
}

double GridDensity::mass() const {
  std::vector<double> buf(static_cast<std::size_t>(values_.size()));
  for_each_index(shape_, [&](std::int64_t flat, std::span<const int> idx) {
    buf[static_cast<std::size_t>(flat)] = node_weight(idx) * values_[flat];
  });
  return pairwise_sum(buf);
}

const Tensor& GridDensity::prefix_marginal(int k) const {
  require(k >= 1 && k <= dim(), ErrorCode::InvalidArgument,
          "prefix marginal order out of range");
  if (k == dim()) return values_;
  return marginals_[static_cast<std::size_t>(k - 1)];
}

std::vector<double> GridDensity::conditional_values_at_node(
    int axis, std::span<const int> prefix_idx) const {
  require(axis >= 0 && axis < dim(), ErrorCode::InvalidArgument, "axis out of range");
  require(static_cast<int>(prefix_idx.size()) == axis, ErrorCode::InvalidArgument,
          "prefix length must equal the conditioned axis count");
  const Tensor& marg = prefix_marginal(axis + 1);
  const int m = shape_[static_cast<std::size_t>(axis)];
  std::int64_t base = 0;
  for (int a = 0; a < axis; ++a) base += prefix_idx[a] * marg.stride(a);
  std::vector<double> out(static_cast<std::size_t>(m));
  const std::int64_t st = marg.stride(axis);
  for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(j)] = marg[base + j * st];
  return out;
}

std::vector<double> GridDensity::conditional_values(
    int axis, std::span<const double> prefix) const {
  require(axis >= 0 && axis < dim(), ErrorCode::InvalidArgument, "axis out of range");
  require(static_cast<int>(prefix.size()) == axis, ErrorCode::InvalidArgument,
          "prefix length must equal the conditioned axis count");
  if (axis == 0) return conditional_values_at_node(0, {});
  const Tensor& marg = prefix_marginal(axis + 1);
  // cell and weight per conditioned axis
  std::vector<int> cell(static_cast<std::size_t>(axis));
  std::vector<double> frac(static_cast<std::size_t>(axis));
  for (int a = 0; a < axis; ++a) {
    const int m = shape_[static_cast<std::size_t>(a)];
    const double h = step_[static_cast<std::size_t>(a)];
    double u = (prefix[a] - box_.lo[a]) / h;
    u = std::clamp(u, 0.0, static_cast<double>(m - 1));
    int c = static_cast<int>(u);
    if (c > m - 2) c = m - 2;
    cell[static_cast<std::size_t>(a)] = c;
    frac[static_cast<std::size_t>(a)] = u - c;
  }
  const int m = shape_[static_cast<std::size_t>(axis)];
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  const std::int64_t st = marg.stride(axis);
  const int corners = 1 << axis;
  for (int mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::int64_t base = 0;
    for (int a = 0; a < axis; ++a) {
      const int hi = (mask >> a) & 1;
      w *= hi ? frac[static_cast<std::size_t>(a)] : 1.0 - frac[static_cast<std::size_t>(a)];
      base += (cell[static_cast<std::size_t>(a)] + hi) * marg.stride(a);
    }
    if (w == 0.0) continue;
    for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(j)] += w * marg[base + j * st];
  }
  return out;
}

double GridDensity::mixed_moment(std::span<const int> powers) const {
  require(static_cast<int>(powers.size()) == dim(), ErrorCode::DimMismatch,
          "powers length must equal dimension");
  // per-axis power tables keep the inner loop cheap
  std::vector<std::vector<double>> pw(static_cast<std::size_t>(dim()));
  for (int a = 0; a < dim(); ++a) {
    const auto& nd = nodes_[static_cast<std::size_t>(a)];
    auto& t = pw[static_cast<std::size_t>(a)];
    t.resize(nd.size());
    for (std::size_t j = 0; j < nd.size(); ++j) t[j] = std::pow(nd[j], powers[a]);
  }
  return expect([&](std::int64_t, std::span<const int> idx) {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= pw[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[a])];
    return v;
  });
}

double GridDensity::log_concavity_violation() const {
  double worst = -kInf;
  const int n = dim();
  for (int axis = 0; axis < n; ++axis) {
    const int m = shape_[static_cast<std::size_t>(axis)];
    const std::int64_t st = log_values_.stride(axis);
    std::vector<int> outer_shape;
    for (int a = 0; a < n; ++a)
      if (a != axis) outer_shape.push_back(shape_[static_cast<std::size_t>(a)]);
    for_each_index(outer_shape, [&](std::int64_t, std::span<const int> oidx) {
      std::vector<int> idx(static_cast<std::size_t>(n), 0);
      int k = 0;
      for (int a = 0; a < n; ++a)
        if (a != axis) idx[static_cast<std::size_t>(a)] = oidx[k++];
      const std::int64_t base = log_values_.offset(idx);
      for (int j = 1; j + 1 < m; ++j) {
        const double l0 = log_values_[base + (j - 1) * st];
        const double l1 = log_values_[base + j * st];
        const double l2 = log_values_[base + (j + 1) * st];
        if (std::isfinite(l0) && std::isfinite(l1) && std::isfinite(l2))
          worst = std::max(worst, l0 - 2.0 * l1 + l2);
      }
    });
  }
  return std::isfinite(worst) ? worst : 0.0;
}

SampleSet GridDensity::sample(std::int64_t count, std::uint64_t seed) const {
  require(count >= 1, ErrorCode::InvalidArgument, "sample count must be >= 1");
  Rng rng(seed);
  SampleSet out;
  out.dim = dim();
  out.seed = seed;
  out.points.resize(static_cast<std::size_t>(count * dim()));
  out.weights.assign(static_cast<std::size_t>(count), 1.0 / static_cast<double>(count));
  std::vector<double> prefix(static_cast<std::size_t>(dim()));
  for (std::int64_t k = 0; k < count; ++k) {
    for (int a = 0; a < dim(); ++a) {
      const auto vals = conditional_values(a, std::span<const double>(prefix.data(), static_cast<std::size_t>(a)));
      CdfTable cdf(nodes_[static_cast<std::size_t>(a)], vals);
      require(cdf.total_mass() > 0.0, ErrorCode::ZeroMassSlice,
              "sampling reached a zero-mass conditional");
      prefix[static_cast<std::size_t>(a)] = cdf.quantile_pwl(rng.uniform01());
      out.points[static_cast<std::size_t>(k * dim() + a)] = prefix[static_cast<std::size_t>(a)];
    }
  }
  return out;
}

GridDensity build_grid_density(const Potential& potential, std::vector<int> shape,
                               int audit_pairs, double audit_tol, int supersample) {
  const Box& box = potential.domain;
  validate_shape(box, shape);
  require(supersample >= 1 && supersample <= 16, ErrorCode::InvalidArgument,
          "supersample factor out of range");
  const auto audit = audit_convexity(potential, audit_pairs, audit_tol);
  if (!audit.passed)
    fail(ErrorCode::ConvexityAuditFailed,
         "potential failed midpoint-convexity audit (worst violation " +
             format_g17(audit.worst_violation) + ")");

  std::int64_t total = 1;
  for (int s : shape) total *= s;
  std::vector<double> logv(static_cast<std::size_t>(total));
  std::vector<double> raw(static_cast<std::size_t>(total));
  std::vector<double> pt(static_cast<std::size_t>(box.dim));
  std::vector<std::vector<double>> nodes(static_cast<std::size_t>(box.dim));
  std::vector<double> step(static_cast<std::size_t>(box.dim));
  for (int a = 0; a < box.dim; ++a) {
    const int m = shape[static_cast<std::size_t>(a)];
    const double h = box.length(a) / (m - 1);
    step[static_cast<std::size_t>(a)] = h;
    nodes[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) nodes[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] = box.lo[a] + h * j;
  }

  double vmin = kInf;
  for_each_index(shape, [&](std::int64_t flat, std::span<const int> idx) {
    for (int a = 0; a < box.dim; ++a)
      pt[static_cast<std::size_t>(a)] = nodes[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[a])];
    const double v = potential.eval(pt);
    logv[static_cast<std::size_t>(flat)] = -v;
    if (std::isfinite(v)) vmin = std::min(vmin, v);
  });
  if (!std::isfinite(vmin))
    fail(ErrorCode::MassUnderflow, "potential is +infinity on every grid node");

  if (supersample == 1) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const double lv = logv[i];
      raw[i] = std::isfinite(lv) ? std::exp(lv + vmin) : 0.0;  // shift by min V
    }
    return GridDensity(box, std::move(shape), std::move(raw), std::move(logv));
  }

  // cell average of exp(-V) around each node, clipped to the box
  const int n = box.dim;
  const int probes = supersample;
  std::vector<double> sub(static_cast<std::size_t>(n));
  for_each_index(shape, [&](std::int64_t flat, std::span<const int> idx) {
    double acc = 0.0;
    int count = 0;
    std::vector<int> sub_idx(static_cast<std::size_t>(n), 0);
    const std::int64_t sub_total = [&] {
      std::int64_t t = 1;
      for (int a = 0; a < n; ++a) t *= probes;
      return t;
    }();
    for (std::int64_t s = 0; s < sub_total; ++s) {
      std::int64_t rem = s;
      bool inside = true;
      for (int a = 0; a < n; ++a) {
        const int g = static_cast<int>(rem % probes);
        rem /= probes;
        const double off = (g + 0.5) / probes - 0.5;
        const double x = nodes[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[a])] +
                         off * step[static_cast<std::size_t>(a)];
        if (x < box.lo[a] || x > box.hi[a]) { inside = false; break; }
        sub[static_cast<std::size_t>(a)] = x;
      }
      if (!inside) continue;
      const double v = potential.eval(sub);
      acc += std::isfinite(v) ? std::exp(-(v - vmin)) : 0.0;
      ++count;
    }
    raw[static_cast<std::size_t>(flat)] = count > 0 ? acc / count : 0.0;
    logv[static_cast<std::size_t>(flat)] =
        raw[static_cast<std::size_t>(flat)] > 0.0
            ? std::log(raw[static_cast<std::size_t>(flat)]) - vmin
            : -kInf;
  });
  return GridDensity(box, std::move(shape), std::move(raw), std::move(logv));
}

GridDensity conditional_slice(const GridDensity& density,
                              std::span<const std::pair<int, double>> fixed) {
  const int p = static_cast<int>(fixed.size());
  require(p >= 0 && p < density.dim(), ErrorCode::InvalidArgument,
          "conditioning must leave one free axis");
  std::vector<int> prefix_idx(static_cast<std::size_t>(p), -1);
  for (const auto& [axis, value] : fixed) {
    require(axis >= 0 && axis < p, ErrorCode::InvalidArgument,
            "conditioning axes must form the prefix 0..k-1");
    const auto& nd = density.axis_nodes(axis);
    const double h = density.step(axis);
    const double u = (value - nd.front()) / h;
    const int j = static_cast<int>(std::llround(u));
    require(j >= 0 && j < static_cast<int>(nd.size()) &&
                std::fabs(value - nd[static_cast<std::size_t>(j)]) <= 1e-9 * (1.0 + std::fabs(value)) + 1e-12,
            ErrorCode::InvalidArgument, "conditioning values must be grid nodes");
    prefix_idx[static_cast<std::size_t>(axis)] = j;
  }
  for (int a = 0; a < p; ++a)
    require(prefix_idx[static_cast<std::size_t>(a)] >= 0, ErrorCode::InvalidArgument,
            "conditioning axes must form the prefix 0..k-1");

  auto vals = density.conditional_values_at_node(p, prefix_idx);
  double total = 0.0;
  for (double v : vals) total += v;
  if (!(total > 0.0))
    fail(ErrorCode::ZeroMassSlice, "conditioning point lies outside the support");
  Box b({density.box().lo[p]}, {density.box().hi[p]});
  return GridDensity(b, {density.shape()[static_cast<std::size_t>(p)]}, std::move(vals));
}

double mixed_moment(const GridDensity& density, std::span<const int> powers) {
  return density.mixed_moment(powers);
}

double tv_distance(const GridDensity& a, const GridDensity& b) {
  require(a.dim() == b.dim() && a.shape() == b.shape(), ErrorCode::DimMismatch,
          "tv_distance requires a common grid");
  for (int i = 0; i < a.dim(); ++i)
    require(std::fabs(a.box().lo[i] - b.box().lo[i]) +
                    std::fabs(a.box().hi[i] - b.box().hi[i]) <=
                1e-9 * (1.0 + std::fabs(a.box().hi[i])),
            ErrorCode::DimMismatch, "tv_distance requires a common box");
  std::vector<double> buf(static_cast<std::size_t>(a.values().size()));
  for_each_index(a.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    buf[static_cast<std::size_t>(flat)] =
        a.node_weight(idx) * std::fabs(a.values()[flat] - b.values()[flat]);
  });
  return 0.5 * pairwise_sum(buf);
}

GridDensity regrid(const GridDensity& density, const Box& box, std::vector<int> shape) {
  require(box.dim == density.dim(), ErrorCode::DimMismatch, "regrid dimension mismatch");
  validate_shape(box, shape);
  std::int64_t total = 1;
  for (int s : shape) total *= s;
  std::vector<double> raw(static_cast<std::size_t>(total), 0.0);
  std::vector<double> pt(static_cast<std::size_t>(box.dim));
  const int n = box.dim;
  for_each_index(shape, [&](std::int64_t flat, std::span<const int> idx) {
    for (int a = 0; a < n; ++a) {
      const double h = box.length(a) / (shape[static_cast<std::size_t>(a)] - 1);
      pt[static_cast<std::size_t>(a)] = box.lo[a] + h * idx[a];
    }
    if (!density.box().contains(pt)) return;
    // multilinear interpolation of the source values
    double acc = 0.0;
    std::vector<int> cell(static_cast<std::size_t>(n));
    std::vector<double> frac(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      const int m = density.shape()[static_cast<std::size_t>(a)];
      double u = (pt[static_cast<std::size_t>(a)] - density.box().lo[a]) / density.step(a);
      u = std::clamp(u, 0.0, static_cast<double>(m - 1));
      int c = std::min(static_cast<int>(u), m - 2);
      cell[static_cast<std::size_t>(a)] = c;
      frac[static_cast<std::size_t>(a)] = u - c;
    }
    for (int mask = 0; mask < (1 << n); ++mask) {
      double w = 1.0;
      std::int64_t off = 0;
      for (int a = 0; a < n; ++a) {
        const int hi = (mask >> a) & 1;
        w *= hi ? frac[static_cast<std::size_t>(a)] : 1.0 - frac[static_cast<std::size_t>(a)];
        off += (cell[static_cast<std::size_t>(a)] + hi) * density.values().stride(a);
      }
      if (w > 0.0) acc += w * density.values()[off];
    }
    raw[static_cast<std::size_t>(flat)] = acc;
  });
  return GridDensity(box, std::move(shape), std::move(raw));
}

void GridDensity::save_text(std::ostream& os) const {
  os << "lclab-density 1\n";
  os << "dim " << dim() << "\n";
  os << "shape";
  for (int s : shape_) os << " " << s;
  os << "\nlo";
  for (double v : box_.lo) os << " " << format_g17(v);
  os << "\nhi";
  for (double v : box_.hi) os << " " << format_g17(v);
  os << "\nquadrature trapezoid\n";
  for (std::int64_t i = 0; i < values_.size(); ++i)
    os << format_g17(values_[i]) << "\n";
}

void GridDensity::save_text_file(const std::string& path) const {
  std::ofstream os(path);
  require(os.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  save_text(os);
  os.flush();
  require(os.good(), ErrorCode::IoError, "write failed for " + path);
}

GridDensity GridDensity::load_text(std::istream& is) {
  std::string tag;
  int version = 0;
  is >> tag >> version;
  require(is.good() && tag == "lclab-density" && version == 1, ErrorCode::IoError,
          "not an lclab density file");
  std::string key;
  int n = 0;
  is >> key >> n;
  require(key == "dim" && n >= 1 && n <= 4, ErrorCode::IoError, "bad dim header");
  std::vector<int> shape(static_cast<std::size_t>(n));
  is >> key;
  require(key == "shape", ErrorCode::IoError, "bad shape header");
  for (auto& s : shape) is >> s;
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  is >> key;
  require(key == "lo", ErrorCode::IoError, "bad lo header");
  for (auto& v : lo) is >> v;
  is >> key;
  require(key == "hi", ErrorCode::IoError, "bad hi header");
  for (auto& v : hi) is >> v;
  is >> key >> tag;
  require(key == "quadrature" && tag == "trapezoid", ErrorCode::IoError,
          "unsupported quadrature");
  std::int64_t total = 1;
  for (int s : shape) total *= s;
  std::vector<double> raw(static_cast<std::size_t>(total));
  for (auto& v : raw) is >> v;
  require(!is.fail(), ErrorCode::IoError, "truncated density file");
  return GridDensity(Box(std::move(lo), std::move(hi)), std::move(shape), std::move(raw));
}

GridDensity GridDensity::load_text_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrorCode::IoError, "cannot open " + path);
  return load_text(is);
}

void GridDensity::save_binary_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  const char magic[8] = {'l', 'c', 'd', 'e', 'n', 's', '0', '1'};
  os.write(magic, 8);
  const std::int32_t n = dim();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (int s : shape_) {
    const std::int32_t s32 = s;
    os.write(reinterpret_cast<const char*>(&s32), sizeof(s32));
  }
  os.write(reinterpret_cast<const char*>(box_.lo.data()), static_cast<std::streamsize>(sizeof(double) * box_.lo.size()));
  os.write(reinterpret_cast<const char*>(box_.hi.data()), static_cast<std::streamsize>(sizeof(double) * box_.hi.size()));
  os.write(reinterpret_cast<const char*>(values_.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(values_.size())));
  require(os.good(), ErrorCode::IoError, "write failed for " + path);
}

GridDensity GridDensity::load_binary_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::IoError, "cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  require(is.good() && std::memcmp(magic, "lcdens01", 8) == 0, ErrorCode::IoError,
          "not an lclab binary density file");
  std::int32_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  require(n >= 1 && n <= 4, ErrorCode::IoError, "bad dimension");
  std::vector<int> shape(static_cast<std::size_t>(n));
  for (auto& s : shape) {
    std::int32_t s32 = 0;
    is.read(reinterpret_cast<char*>(&s32), sizeof(s32));
    s = s32;
  }
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  is.read(reinterpret_cast<char*>(lo.data()), static_cast<std::streamsize>(sizeof(double) * lo.size()));
  is.read(reinterpret_cast<char*>(hi.data()), static_cast<std::streamsize>(sizeof(double) * hi.size()));
  std::int64_t total = 1;
  for (int s : shape) total *= s;
  std::vector<double> raw(static_cast<std::size_t>(total));
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(sizeof(double) * raw.size()));
  require(!is.fail(), ErrorCode::IoError, "truncated binary density file");
  return GridDensity(Box(std::move(lo), std::move(hi)), std::move(shape), std::move(raw));
}

double sample_mean(const SampleSet& s, int axis) {
  std::vector<double> buf(static_cast<std::size_t>(s.count()));
  for (std::int64_t k = 0; k < s.count(); ++k)
    buf[static_cast<std::size_t>(k)] = s.weights[static_cast<std::size_t>(k)] * s.point(k)[axis];
  return pairwise_sum(buf);
}

double sample_mixed_moment(const SampleSet& s, std::span<const int> powers) {
  std::vector<double> buf(static_cast<std::size_t>(s.count()));
  for (std::int64_t k = 0; k < s.count(); ++k) {
    double v = 1.0;
    const auto p = s.point(k);
    for (int a = 0; a < s.dim; ++a)
      for (int e = 0; e < powers[a]; ++e) v *= p[a];
    buf[static_cast<std::size_t>(k)] = s.weights[static_cast<std::size_t>(k)] * v;
  }
  return pairwise_sum(buf);
}

}  // namespace lclab
