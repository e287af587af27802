#include "core/knothe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace lclab {

namespace {
// piecewise-linear density value on uniform-ish nodes
double interp_density(const std::vector<double>& nodes, const std::vector<double>& vals,
                      double x) {
  if (x <= nodes.front()) return vals.front();
  if (x >= nodes.back()) return vals.back();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  const double frac = (x - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
  return vals[j - 1] + frac * (vals[j] - vals[j - 1]);
}

void normalize_cond(std::vector<double>& vals, const std::vector<double>& wts) {
  double z = 0.0;
  for (std::size_t j = 0; j < vals.size(); ++j) z += wts[j] * vals[j];
  if (z > 0.0)
    for (auto& v : vals) v /= z;
  else
    fail(ErrorCode::ZeroMassSlice, "conditional slice carries no mass");
}

constexpr double kDensityRatioFloor = 1e-100;
constexpr double kJacobianClamp = 1e-12;
}  // namespace

double knothe_slice_derivative(const GridDensity& mu, const GridDensity& nu, int axis,
                               const KnotheMap::SliceData& data, double x) {
  const auto& src_nodes = mu.axis_nodes(axis);
  const auto& tgt_nodes = nu.axis_nodes(axis);
  const double fs = interp_density(src_nodes, data.src_cond, x);
  const double y = (*data.map)(x);
  const double ft = interp_density(tgt_nodes, data.tgt_cond, y);
  if (ft > kDensityRatioFloor && fs > 0.0) return fs / ft;
  // fallback: slope of the interpolated slice
  const double h = mu.step(axis);
  const double a = std::max(src_nodes.front(), x - h);
  const double b = std::min(src_nodes.back(), x + h);
  if (b <= a) return kJacobianClamp;
  return ((*data.map)(b) - (*data.map)(a)) / (b - a);
}

KnotheMap::KnotheMap(std::shared_ptr<const GridDensity> mu,
                     std::shared_ptr<const GridDensity> nu)
    : TriangularMap(mu->dim()), mu_(std::move(mu)), nu_(std::move(nu)) {
  require(mu_->dim() == nu_->dim(), ErrorCode::DimMismatch,
          "Knothe map needs equal dimensions");
  memo_.resize(static_cast<std::size_t>(dim()));
}

std::shared_ptr<KnotheMap> build_knothe(std::shared_ptr<const GridDensity> mu,
                                        std::shared_ptr<const GridDensity> nu) {
  auto map = std::make_shared<KnotheMap>(std::move(mu), std::move(nu));
  // force the first-coordinate slice so degenerate targets surface eagerly
  map->node_slice(0, {});
  return map;
}

KnotheMap::SliceData KnotheMap::build_slice(int axis, std::span<const double> src_prefix,
                                            std::span<const double> img_prefix) const {
  SliceData data;
  data.src_cond = mu_->conditional_values(axis, src_prefix);
  data.tgt_cond = nu_->conditional_values(axis, img_prefix);
  normalize_cond(data.src_cond, mu_->axis_weights(axis));
  normalize_cond(data.tgt_cond, nu_->axis_weights(axis));
  CdfTable src_cdf(mu_->axis_nodes(axis), data.src_cond);
  CdfTable tgt_cdf(nu_->axis_nodes(axis), data.tgt_cond);
  data.map = std::make_shared<const MonotoneMap1D>(
      monotone_map(mu_->axis_nodes(axis), src_cdf, tgt_cdf));
  return data;
}

const KnotheMap::SliceData& KnotheMap::node_slice_data(
    int axis, std::span<const int> prefix_idx) const {
  std::int64_t key = 0;
  if (axis > 0) key = mu_->prefix_marginal(axis).offset(prefix_idx);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = memo_[static_cast<std::size_t>(axis)].find(key);
    if (it != memo_[static_cast<std::size_t>(axis)].end()) return *it->second;
  }
  // build outside the lock; duplicate builds are idempotent
  std::vector<double> src_prefix(static_cast<std::size_t>(axis));
  std::vector<double> img_prefix(static_cast<std::size_t>(axis));
  for (int a = 0; a < axis; ++a)
    src_prefix[static_cast<std::size_t>(a)] =
        mu_->axis_nodes(a)[static_cast<std::size_t>(prefix_idx[a])];
  for (int a = 0; a < axis; ++a) {
    const auto& prev = node_slice_data(a, prefix_idx.first(static_cast<std::size_t>(a)));
    img_prefix[static_cast<std::size_t>(a)] =
        prev.map->values[static_cast<std::size_t>(prefix_idx[a])];
  }
  auto built = std::make_shared<SliceData>(build_slice(axis, src_prefix, img_prefix));
  std::lock_guard<std::mutex> lock(memo_mutex_);
  auto [it, inserted] = memo_[static_cast<std::size_t>(axis)].emplace(key, std::move(built));
  return *it->second;
}

std::shared_ptr<const MonotoneMap1D> KnotheMap::node_slice(
    int axis, std::span<const int> prefix_idx) const {
  return node_slice_data(axis, prefix_idx).map;
}

bool KnotheMap::prefix_on_nodes(int axis, std::span<const double> x,
                                std::vector<int>& idx) const {
  idx.assign(static_cast<std::size_t>(axis), 0);
  for (int a = 0; a < axis; ++a) {
    const double h = mu_->step(a);
    const double u = (x[a] - mu_->box().lo[a]) / h;
    const int j = static_cast<int>(std::llround(u));
    if (j < 0 || j >= mu_->shape()[static_cast<std::size_t>(a)]) return false;
    if (std::fabs(u - j) > 1e-9) return false;
    idx[static_cast<std::size_t>(a)] = j;
  }
  return true;
}

double KnotheMap::component(int i, std::span<const double> x) const {
  std::vector<int> idx;
  if (prefix_on_nodes(i, x, idx)) return (*node_slice_data(i, idx).map)(x[i]);
  std::vector<double> img(static_cast<std::size_t>(i));
  for (int a = 0; a < i; ++a) img[static_cast<std::size_t>(a)] = component(a, x);
  const SliceData data = build_slice(i, x.first(static_cast<std::size_t>(i)), img);
  return (*data.map)(x[i]);
}

void KnotheMap::apply_into(std::span<const double> x, std::span<double> out) const {
  std::vector<int> idx;
  if (prefix_on_nodes(dim() - 1, x, idx)) {
    for (int i = 0; i < dim(); ++i)
      out[i] = (*node_slice_data(i, std::span<const int>(idx.data(), static_cast<std::size_t>(i))).map)(x[i]);
    return;
  }
  for (int i = 0; i < dim(); ++i) {
    const SliceData data =
        build_slice(i, x.first(static_cast<std::size_t>(i)), out.first(static_cast<std::size_t>(i)));
    out[i] = (*data.map)(x[i]);
  }
}

double KnotheMap::diag_derivative(int i, std::span<const double> x) const {
  std::vector<int> idx;
  double d;
  if (prefix_on_nodes(i, x, idx)) {
    d = knothe_slice_derivative(*mu_, *nu_, i, node_slice_data(i, idx), x[i]);
  } else {
    std::vector<double> img(static_cast<std::size_t>(i));
    for (int a = 0; a < i; ++a) img[static_cast<std::size_t>(a)] = component(a, x);
    const SliceData data = build_slice(i, x.first(static_cast<std::size_t>(i)), img);
    d = knothe_slice_derivative(*mu_, *nu_, i, data, x[i]);
  }
  if (!(d > 0.0) || !std::isfinite(d))
    fail(ErrorCode::DegenerateJacobian,
         "diagonal Jacobian entry indistinguishable from zero");
  return d;
}

std::vector<double> diag_jacobian(const KnotheMap& map, std::span<const double> point) {
  std::vector<double> out(static_cast<std::size_t>(map.dim()));
  for (int i = 0; i < map.dim(); ++i)
    out[static_cast<std::size_t>(i)] = map.diag_derivative(i, point);
  return out;
}

EntropyBound entropy_lower_bound(std::shared_ptr<const GridDensity> mu,
                                 std::shared_ptr<const GridDensity> nu) {
  require(mu->dim() == nu->dim() && mu->shape() == nu->shape(), ErrorCode::DimMismatch,
          "entropy_lower_bound expects a common grid");
  // absolute continuity on the grid: nu must vanish wherever mu does
  for (std::int64_t i = 0; i < mu->values().size(); ++i)
    if (mu->values()[i] <= 0.0 && nu->values()[i] > 0.0)
      fail(ErrorCode::AbsoluteContinuityViolated, "nu charges a mu-null grid cell");

  const auto map = build_knothe(mu, nu);
  const GridDensity& m = *mu;
  const int n = m.dim();

  // bound = sum_i Int (dT_i - 1 - log dT_i) dmu, each axis integrated
  // against the (i+1)-prefix marginal
  double bound = 0.0;
  for (int axis = 0; axis < n; ++axis) {
    const Tensor& marg = m.prefix_marginal(axis + 1);
    std::vector<int> prefix_shape(m.shape().begin(), m.shape().begin() + axis);
    const int cnt = m.shape()[static_cast<std::size_t>(axis)];
    const auto& nodes = m.axis_nodes(axis);
    const auto& wts = m.axis_weights(axis);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(marg.size()));
    for_each_index(prefix_shape, [&](std::int64_t, std::span<const int> pidx) {
      double pw = 1.0;
      std::int64_t base = 0;
      for (int a = 0; a < axis; ++a) {
        pw *= m.axis_weights(a)[static_cast<std::size_t>(pidx[a])];
        base += pidx[a] * marg.stride(a);
      }
      bool has_mass = false;
      const std::int64_t st = marg.stride(axis);
      for (int j = 0; j < cnt; ++j)
        if (marg[base + j * st] > 0.0) { has_mass = true; break; }
      if (!has_mass) return;
      const auto& data = map->node_slice_data(axis, pidx);
      for (int j = 0; j < cnt; ++j) {
        const double w = pw * wts[static_cast<std::size_t>(j)] * marg[base + j * st];
        if (w <= 0.0) continue;
        double d = knothe_slice_derivative(m, *nu, axis, data, nodes[static_cast<std::size_t>(j)]);
        d = std::clamp(d, kJacobianClamp, 1.0 / kJacobianClamp);
        terms.push_back(w * (d - 1.0 - std::log(d)));
      }
    });
    bound += pairwise_sum(terms);
  }

  EntropyBound out;
  out.bound = bound;
  {
    std::vector<double> terms(static_cast<std::size_t>(m.values().size()), 0.0);
    for_each_index(m.shape(), [&](std::int64_t flat, std::span<const int> idx) {
      const double p = nu->values()[flat];
      const double q = m.values()[flat];
      if (p > 0.0)
        terms[static_cast<std::size_t>(flat)] = m.node_weight(idx) * p * std::log(p / q);
    });
    out.entropy = pairwise_sum(terms);
  }
  out.margin = out.entropy - out.bound;
  return out;
}

double pushforward_expect(const KnotheMap& map, const GridDensity& mu,
                          const std::function<double(std::span<const double>)>& phi) {
  const int n = mu.dim();
  std::vector<double> buf(static_cast<std::size_t>(mu.values().size()), 0.0);
  std::vector<double> img(static_cast<std::size_t>(n));
  for_each_index(mu.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    const double mass = mu.node_weight(idx) * mu.values()[flat];
    if (mass <= 0.0) return;
    for (int i = 0; i < n; ++i) {
      const auto slice = map.node_slice(i, idx.first(static_cast<std::size_t>(i)));
      img[static_cast<std::size_t>(i)] = slice->values[static_cast<std::size_t>(idx[i])];
    }
    buf[static_cast<std::size_t>(flat)] = mass * phi(img);
  });
  return pairwise_sum(buf);
}

void KnotheMap::save_text_file(const std::string& path) const {
  std::ofstream os(path);
  require(os.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  os << "lclab-triangular-map 1\ndim " << dim() << "\n";
  os << "# axis prefix_coordinates... x t\n";
  const GridDensity& m = *mu_;
  for (int axis = 0; axis < dim(); ++axis) {
    std::vector<int> prefix_shape(m.shape().begin(), m.shape().begin() + axis);
    for_each_index(prefix_shape, [&](std::int64_t, std::span<const int> pidx) {
      if (axis >= 1 && !(m.prefix_marginal(axis).at(pidx) > 0.0)) return;
      const auto slice = node_slice(axis, pidx);
      for (std::size_t j = 0; j < slice->nodes.size(); ++j) {
        os << (axis + 1);
        for (int a = 0; a < axis; ++a)
          os << " " << format_g17(m.axis_nodes(a)[static_cast<std::size_t>(pidx[a])]);
        os << " " << format_g17(slice->nodes[j]) << " " << format_g17(slice->values[j])
           << "\n";
      }
    });
  }
  require(os.good(), ErrorCode::IoError, "write failed for " + path);
}

}  // namespace lclab
