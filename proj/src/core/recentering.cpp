#include "core/recentering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace lclab {

std::shared_ptr<const ConditionalMoments> ConditionalMoments::build(const GridDensity& mu) {
  auto cm = std::make_shared<ConditionalMoments>();
  cm->dim_ = mu.dim();
  cm->box_ = mu.box();
  cm->shape_ = mu.shape();
  cm->step_.resize(static_cast<std::size_t>(mu.dim()));
  for (int a = 0; a < mu.dim(); ++a) cm->step_[static_cast<std::size_t>(a)] = mu.step(a);
  cm->mean_.resize(static_cast<std::size_t>(mu.dim()));
  cm->var_.resize(static_cast<std::size_t>(mu.dim()));

  for (int i = 0; i < mu.dim(); ++i) {
    std::vector<int> prefix_shape(mu.shape().begin(), mu.shape().begin() + i);
    Tensor mean(prefix_shape, kNaN);
    Tensor var(prefix_shape, kNaN);
    const Tensor& marg = mu.prefix_marginal(i + 1);
    const auto& nodes = mu.axis_nodes(i);
    const auto& wts = mu.axis_weights(i);
    const int m = mu.shape()[static_cast<std::size_t>(i)];
    const std::int64_t st = marg.stride(i);
    for_each_index(prefix_shape, [&](std::int64_t pflat, std::span<const int> pidx) {
      std::int64_t base = 0;
      for (int a = 0; a < i; ++a) base += pidx[a] * marg.stride(a);
      double z = 0.0, m1 = 0.0, m2 = 0.0;
      for (int j = 0; j < m; ++j) {
        const double w = wts[static_cast<std::size_t>(j)] * marg[base + j * st];
        z += w;
        m1 += w * nodes[static_cast<std::size_t>(j)];
        m2 += w * nodes[static_cast<std::size_t>(j)] * nodes[static_cast<std::size_t>(j)];
      }
      if (z > 0.0) {
        const double mean_v = m1 / z;
        mean[pflat] = mean_v;
        var[pflat] = std::max(0.0, m2 / z - mean_v * mean_v);
      }
    });
    cm->mean_[static_cast<std::size_t>(i)] = std::move(mean);
    cm->var_[static_cast<std::size_t>(i)] = std::move(var);
  }
  return cm;
}

double ConditionalMoments::mean_node(int i, std::span<const int> prefix_idx) const {
  return mean_[static_cast<std::size_t>(i)].at(prefix_idx);
}

double ConditionalMoments::var_node(int i, std::span<const int> prefix_idx) const {
  return var_[static_cast<std::size_t>(i)].at(prefix_idx);
}

double ConditionalMoments::lambda_sq_node(int i, std::span<const int> prefix_idx) const {
  const double v = var_node(i, prefix_idx);
  if (std::isnan(v)) return kNaN;
  return v > 0.0 ? 1.0 / (3.0 * v) : kInf;
}

double ConditionalMoments::interp(const Tensor& table, int i,
                                  std::span<const double> prefix) const {
  if (i == 0) return table[0];
  std::vector<int> cell(static_cast<std::size_t>(i));
  std::vector<double> frac(static_cast<std::size_t>(i));
  for (int a = 0; a < i; ++a) {
    const int m = shape_[static_cast<std::size_t>(a)];
    double u = (prefix[a] - box_.lo[a]) / step_[static_cast<std::size_t>(a)];
    u = std::clamp(u, 0.0, static_cast<double>(m - 1));
    int c = std::min(static_cast<int>(u), m - 2);
    cell[static_cast<std::size_t>(a)] = c;
    frac[static_cast<std::size_t>(a)] = u - c;
  }
  // undefined corners (zero-mass prefixes) are dropped and the weights
  // renormalized: support-boundary cells clamp to their defined side, truly
  // outside prefixes still raise
  double acc = 0.0;
  double wsum = 0.0;
  for (int mask = 0; mask < (1 << i); ++mask) {
    double w = 1.0;
    std::int64_t off = 0;
    for (int a = 0; a < i; ++a) {
      const int hi = (mask >> a) & 1;
      w *= hi ? frac[static_cast<std::size_t>(a)] : 1.0 - frac[static_cast<std::size_t>(a)];
      off += (cell[static_cast<std::size_t>(a)] + hi) * table.stride(a);
    }
    if (w == 0.0) continue;
    const double v = table[off];
    if (std::isnan(v)) continue;
    acc += w * v;
    wsum += w;
  }
  if (wsum <= 1e-12)
    fail(ErrorCode::UndefinedPrefix, "moment table is undefined at the requested prefix");
  return acc / wsum;
}

double ConditionalMoments::mean_at(int i, std::span<const double> prefix) const {
  return interp(mean_[static_cast<std::size_t>(i)], i, prefix);
}

double ConditionalMoments::var_at(int i, std::span<const double> prefix) const {
  return interp(var_[static_cast<std::size_t>(i)], i, prefix);
}

double ConditionalMoments::lambda_sq_at(int i, std::span<const double> prefix) const {
  const double v = var_at(i, prefix);
  return v > 0.0 ? 1.0 / (3.0 * v) : kInf;
}

double ConditionalMoments::min_lambda_sq() const {
  double floor = kInf;
  for (int i = 0; i < dim_; ++i) {
    const Tensor& var = var_[static_cast<std::size_t>(i)];
    for (std::int64_t p = 0; p < var.size(); ++p) {
      const double v = var[p];
      if (std::isnan(v)) continue;
      floor = std::min(floor, v > 0.0 ? 1.0 / (3.0 * v) : kInf);
    }
  }
  return floor;
}

void ConditionalMoments::save_csv(std::ostream& os) const {
  os << "axis";
  for (int a = 0; a + 1 < dim_; ++a) os << ",prefix_x" << (a + 1);
  os << ",mean,variance,lambda_sq\n";
  for (int i = 0; i < dim_; ++i) {
    const Tensor& mean = mean_[static_cast<std::size_t>(i)];
    const Tensor& var = var_[static_cast<std::size_t>(i)];
    std::vector<int> prefix_shape(shape_.begin(), shape_.begin() + i);
    for_each_index(prefix_shape, [&](std::int64_t pflat, std::span<const int> pidx) {
      os << (i + 1);
      for (int a = 0; a < dim_ - 1; ++a) {
        if (a < i) {
          const double x = box_.lo[a] + step_[static_cast<std::size_t>(a)] * pidx[a];
          os << "," << format_g17(x);
        } else {
          os << ",";
        }
      }
      const double v = var[pflat];
      const double lsq = std::isnan(v) ? kNaN : (v > 0.0 ? 1.0 / (3.0 * v) : kInf);
      os << "," << format_g17(mean[pflat]) << "," << format_g17(v) << ","
         << format_g17(lsq) << "\n";
    });
  }
}

void ConditionalMoments::save_csv_file(const std::string& path) const {
  std::ofstream os(path);
  require(os.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  save_csv(os);
  require(os.good(), ErrorCode::IoError, "write failed for " + path);
}

RecenteringPair build_recentering(std::shared_ptr<const ConditionalMoments> moments) {
  RecenteringPair pair;
  pair.moments = moments;
  pair.R = std::make_shared<RecenterMap>(moments);
  pair.S = std::make_shared<InverseRecenterMap>(moments);
  return pair;
}

RecenteringPair build_recentering(const GridDensity& mu) {
  return build_recentering(ConditionalMoments::build(mu));
}

RecenteredView make_recentered_view(const GridDensity& mu, const ConditionalMoments& moments) {
  RecenteredView view;
  const int n = mu.dim();
  view.dim = n;
  view.nodes = mu.values().size();
  view.xbar.resize(static_cast<std::size_t>(view.nodes * n));
  view.xred.resize(static_cast<std::size_t>(view.nodes * n));
  view.cond_var.resize(static_cast<std::size_t>(view.nodes * n));
  std::vector<double> pt(static_cast<std::size_t>(n));
  for_each_index(mu.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    mu.node_point(idx, pt);
    for (int i = 0; i < n; ++i) {
      const double m = moments.mean_node(i, idx.first(static_cast<std::size_t>(i)));
      const double v = moments.var_node(i, idx.first(static_cast<std::size_t>(i)));
      view.xred[static_cast<std::size_t>(flat * n + i)] = m;
      view.xbar[static_cast<std::size_t>(flat * n + i)] = pt[static_cast<std::size_t>(i)] - m;
      view.cond_var[static_cast<std::size_t>(flat * n + i)] = v;
    }
  });
  return view;
}

GridDensity rebin_pushforward(
    const GridDensity& mu,
    const std::function<void(std::span<const double>, std::span<double>)>& map,
    const Box* target_box, const std::vector<int>* target_shape) {
  const int n = mu.dim();
  require(n <= 3, ErrorCode::InvalidArgument,
          "grid pushforward re-binning supports dim <= 3");
  const std::int64_t total = mu.values().size();
  std::vector<double> images(static_cast<std::size_t>(total * n));
  std::vector<double> masses(static_cast<std::size_t>(total));
  std::vector<double> pt(static_cast<std::size_t>(n)), img(static_cast<std::size_t>(n));
  std::vector<double> lo(static_cast<std::size_t>(n), kInf), hi(static_cast<std::size_t>(n), -kInf);
  for_each_index(mu.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    const double mass = mu.node_weight(idx) * mu.values()[flat];
    masses[static_cast<std::size_t>(flat)] = mass;
    if (mass <= 0.0) return;
    mu.node_point(idx, pt);
    map(pt, img);
    for (int a = 0; a < n; ++a) {
      images[static_cast<std::size_t>(flat * n + a)] = img[static_cast<std::size_t>(a)];
      lo[static_cast<std::size_t>(a)] = std::min(lo[static_cast<std::size_t>(a)], img[static_cast<std::size_t>(a)]);
      hi[static_cast<std::size_t>(a)] = std::max(hi[static_cast<std::size_t>(a)], img[static_cast<std::size_t>(a)]);
    }
  });

  // Default target grid keeps the source spacing on every axis so the node
  // comb lands at a constant fractional offset; a rescaled axis would beat
  // against the image comb and ripple the re-binned marginals.
  std::vector<int> shape;
  Box box;
  if (target_box && target_shape) {
    box = *target_box;
    shape = *target_shape;
  } else {
    std::vector<double> blo(static_cast<std::size_t>(n)), bhi(static_cast<std::size_t>(n));
    shape.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      const double h = mu.step(a);
      const double span = hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)];
      int m = static_cast<int>(std::ceil(span / h)) + 5;  // two pad cells a side
      m = std::max(m, 8);
      blo[static_cast<std::size_t>(a)] = lo[static_cast<std::size_t>(a)] - 2.0 * h;
      bhi[static_cast<std::size_t>(a)] = blo[static_cast<std::size_t>(a)] + (m - 1) * h;
      shape[static_cast<std::size_t>(a)] = m;
    }
    box = Box(std::move(blo), std::move(bhi));
  }

  Tensor acc(shape, 0.0);
  std::vector<double> step(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    step[static_cast<std::size_t>(a)] = box.length(a) / (shape[static_cast<std::size_t>(a)] - 1);

  std::vector<int> cell(static_cast<std::size_t>(n));
  std::vector<double> frac(static_cast<std::size_t>(n));
  for (std::int64_t flat = 0; flat < total; ++flat) {
    const double mass = masses[static_cast<std::size_t>(flat)];
    if (mass <= 0.0) continue;
    for (int a = 0; a < n; ++a) {
      const int m = shape[static_cast<std::size_t>(a)];
      double u = (images[static_cast<std::size_t>(flat * n + a)] - box.lo[a]) / step[static_cast<std::size_t>(a)];
      u = std::clamp(u, 0.0, static_cast<double>(m - 1));
      int c = std::min(static_cast<int>(u), m - 2);
      cell[static_cast<std::size_t>(a)] = c;
      frac[static_cast<std::size_t>(a)] = u - c;
    }
    for (int mask = 0; mask < (1 << n); ++mask) {
      double w = 1.0;
      std::int64_t off = 0;
      for (int a = 0; a < n; ++a) {
        const int h = (mask >> a) & 1;
        w *= h ? frac[static_cast<std::size_t>(a)] : 1.0 - frac[static_cast<std::size_t>(a)];
        off += (cell[static_cast<std::size_t>(a)] + h) * acc.stride(a);
      }
      if (w > 0.0) acc[off] += w * mass;
    }
  }

  // convert splatted masses back to density values
  std::vector<double> raw(static_cast<std::size_t>(acc.size()));
  std::vector<std::vector<double>> wts(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const int m = shape[static_cast<std::size_t>(a)];
    auto& w = wts[static_cast<std::size_t>(a)];
    w.assign(static_cast<std::size_t>(m), step[static_cast<std::size_t>(a)]);
    w.front() = 0.5 * step[static_cast<std::size_t>(a)];
    w.back() = 0.5 * step[static_cast<std::size_t>(a)];
  }
  for_each_index(shape, [&](std::int64_t flat, std::span<const int> idx) {
    double w = 1.0;
    for (int a = 0; a < n; ++a) w *= wts[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[a])];
    raw[static_cast<std::size_t>(flat)] = acc[flat] / w;
  });
  return GridDensity(box, std::move(shape), std::move(raw));
}

GridDensity recentered_law_grid(const GridDensity& mu, const RecenteringPair& rec) {
  const auto* R = rec.R.get();
  return rebin_pushforward(mu, [R](std::span<const double> x, std::span<double> out) {
    R->apply_into(x, out);
  });
}

SampleSet recentered_law_sample(const GridDensity& mu, const RecenteringPair& rec,
                                std::int64_t count, std::uint64_t seed) {
  return push_samples(mu.sample(count, seed), *rec.R);
}

GridDensity reduced_vector_law_grid(const GridDensity& mu, const RecenteringPair& rec) {
  const auto* cm = rec.moments.get();
  return rebin_pushforward(mu, [cm](std::span<const double> x, std::span<double> out) {
    for (int i = 0; i < cm->dim(); ++i)
      out[i] = cm->mean_at(i, x.first(static_cast<std::size_t>(i)));
  });
}

SampleSet reduced_vector_law_sample(const GridDensity& mu, const RecenteringPair& rec,
                                    std::int64_t count, std::uint64_t seed) {
  SampleSet s = mu.sample(count, seed);
  const auto* cm = rec.moments.get();
  SampleSet out = s;
  std::vector<double> img(static_cast<std::size_t>(s.dim));
  for (std::int64_t k = 0; k < s.count(); ++k) {
    const auto p = s.point(k);
    for (int i = 0; i < s.dim; ++i)
      img[static_cast<std::size_t>(i)] = cm->mean_at(i, p.first(static_cast<std::size_t>(i)));
    std::copy(img.begin(), img.end(), out.points.begin() + k * s.dim);
  }
  return out;
}

SampleSet push_samples(const SampleSet& samples, const TriangularMap& map) {
  require(samples.dim == map.dim(), ErrorCode::DimMismatch,
          "sample/map dimension mismatch");
  SampleSet out = samples;
  std::vector<double> img(static_cast<std::size_t>(samples.dim));
  for (std::int64_t k = 0; k < samples.count(); ++k) {
    map.apply_into(samples.point(k), img);
    std::copy(img.begin(), img.end(), out.points.begin() + k * samples.dim);
  }
  return out;
}

void save_recentering_map_text(const ConditionalMoments& moments, bool inverse,
                               const std::string& path) {
  std::ofstream os(path);
  require(os.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  const int n = moments.dim();
  os << "lclab-triangular-map 1\ndim " << n << "\n";
  os << "# axis prefix_coordinates... x t\n";
  for (int axis = 0; axis < n; ++axis) {
    const Tensor& mean = moments.mean_table(axis);
    std::vector<int> prefix_shape(moments.shape().begin(), moments.shape().begin() + axis);
    const int m = moments.shape()[static_cast<std::size_t>(axis)];
    const double h = (moments.box().hi[axis] - moments.box().lo[axis]) / (m - 1);
    for_each_index(prefix_shape, [&](std::int64_t pflat, std::span<const int> pidx) {
      const double mv = mean[pflat];
      if (std::isnan(mv)) return;
      for (int j = 0; j < m; ++j) {
        const double x = moments.box().lo[axis] + h * j;
        os << (axis + 1);
        for (int a = 0; a < axis; ++a) {
          const double ha =
              (moments.box().hi[a] - moments.box().lo[a]) / (moments.shape()[static_cast<std::size_t>(a)] - 1);
          os << " " << format_g17(moments.box().lo[a] + ha * pidx[a]);
        }
        os << " " << format_g17(x) << " " << format_g17(inverse ? x + mv : x - mv) << "\n";
      }
    });
  }
  require(os.good(), ErrorCode::IoError, "write failed for " + path);
}

double max_conditional_mean_abs(const GridDensity& law) {
  const auto cm = ConditionalMoments::build(law);
  double worst = 0.0;
  for (int i = 0; i < law.dim(); ++i) {
    const Tensor& mean = cm->mean_table(i);
    if (i == 0) {
      worst = std::max(worst, std::fabs(mean[0]));
      continue;
    }
    // mass-weighted E|m_i(prefix)| so boundary slivers do not dominate
    const Tensor& marg = law.prefix_marginal(i);
    std::vector<int> prefix_shape(law.shape().begin(), law.shape().begin() + i);
    double acc = 0.0;
    for_each_index(prefix_shape, [&](std::int64_t pflat, std::span<const int> pidx) {
      const double m = mean[pflat];
      if (std::isnan(m)) return;
      double w = marg[pflat];
      for (int a = 0; a < i; ++a) w *= law.axis_weights(a)[static_cast<std::size_t>(pidx[a])];
      acc += w * std::fabs(m);
    });
    worst = std::max(worst, acc);
  }
  return worst;
}

}  // namespace lclab
