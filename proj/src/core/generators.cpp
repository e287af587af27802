#include "core/generators.hpp"

#include <algorithm>
#include <cmath>

#include "core/test_functions.hpp"

namespace lclab {

namespace {
// Cyclic Jacobi eigenvalues for symmetric matrices up to 4x4.
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-30) continue;
        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a[i][i];
  return ev;
}

// Solves Sigma y = x via Cholesky.
struct Cholesky {
  int n = 0;
  std::vector<double> l;  // lower triangular, row major

  static Cholesky factor(const std::vector<std::vector<double>>& a) {
    Cholesky ch;
    ch.n = static_cast<int>(a.size());
    ch.l.assign(static_cast<std::size_t>(ch.n * ch.n), 0.0);
    for (int i = 0; i < ch.n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = a[i][j];
        for (int k = 0; k < j; ++k) s -= ch.at(i, k) * ch.at(j, k);
        if (i == j) {
          require(s > 0.0, ErrorCode::NotPositiveDefinite,
                  "covariance is not positive definite");
          ch.at(i, j) = std::sqrt(s);
        } else {
          ch.at(i, j) = s / ch.at(j, j);
        }
      }
    }
    return ch;
  }

  double& at(int i, int j) { return l[static_cast<std::size_t>(i * n + j)]; }
  double at(int i, int j) const { return l[static_cast<std::size_t>(i * n + j)]; }

  // x . Sigma^{-1} x via two triangular solves
  double quad_form(std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double s = x[i];
      for (int k = 0; k < i; ++k) s -= at(i, k) * y[static_cast<std::size_t>(k)];
      y[static_cast<std::size_t>(i)] = s / at(i, i);
    }
    double q = 0.0;
    for (int i = 0; i < n; ++i) q += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    return q;
  }
};
}  // namespace

Potential make_gaussian(int dim, const std::vector<std::vector<double>>& covariance,
                        double box_radius) {
  require(dim >= 1 && dim <= 4, ErrorCode::InvalidArgument, "dimension must be 1..4");
  require(static_cast<int>(covariance.size()) == dim, ErrorCode::DimMismatch,
          "covariance size mismatch");
  for (const auto& row : covariance)
    require(static_cast<int>(row.size()) == dim, ErrorCode::DimMismatch,
            "covariance size mismatch");
  const auto ev = symmetric_eigenvalues(covariance);
  for (double e : ev)
    require(e >= 1e-6, ErrorCode::NotPositiveDefinite,
            "covariance eigenvalue below threshold 1e-6");
  const Cholesky ch = Cholesky::factor(covariance);
  auto eval = [ch](std::span<const double> x) { return 0.5 * ch.quad_form(x); };
  return Potential{Box::cube(dim, box_radius), eval, Smoothness::C1};
}

Potential make_laplace(int dim, const std::vector<double>& scales, double box_radius) {
  require(static_cast<int>(scales.size()) == dim, ErrorCode::DimMismatch,
          "scale vector size mismatch");
  for (double s : scales)
    require(s > 0.0, ErrorCode::InvalidArgument, "scales must be positive");
  std::vector<double> sc = scales;
  auto eval = [sc](std::span<const double> x) {
    double v = 0.0;
    for (std::size_t i = 0; i < sc.size(); ++i) v += std::fabs(x[i]) / sc[i];
    return v;
  };
  return Potential{Box::cube(dim, box_radius), eval, Smoothness::NonSmooth};
}

Potential make_uniform_cube(int dim, double radius) {
  auto eval = [](std::span<const double>) { return 0.0; };
  return Potential{Box::cube(dim, radius), eval, Smoothness::C1};
}

namespace {
double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
             const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew monotone chain, CCW output.
std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<std::array<double, 2>> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

struct PolygonGeometry {
  double area = 0.0;
  std::array<double, 2> centroid = {0.0, 0.0};
};

PolygonGeometry polygon_geometry(const std::vector<std::array<double, 2>>& hull) {
  PolygonGeometry g;
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& p = hull[i];
    const auto& q = hull[(i + 1) % hull.size()];
    const double w = p[0] * q[1] - q[0] * p[1];
    a2 += w;
    cx += (p[0] + q[0]) * w;
    cy += (p[1] + q[1]) * w;
  }
  g.area = 0.5 * a2;
  if (std::fabs(g.area) > 0.0) {
    g.centroid = {cx / (3.0 * a2), cy / (3.0 * a2)};
  }
  return g;
}

bool inside_hull(const std::vector<std::array<double, 2>>& hull, double x, double y,
                 double tol) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& p = hull[i];
    const auto& q = hull[(i + 1) % hull.size()];
    if ((q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]) < -tol) return false;
  }
  return true;
}

Potential body_potential(std::vector<std::array<double, 2>> hull, double box_pad) {
  double lo0 = kInf, lo1 = kInf, hi0 = -kInf, hi1 = -kInf;
  for (const auto& p : hull) {
    lo0 = std::min(lo0, p[0]);
    hi0 = std::max(hi0, p[0]);
    lo1 = std::min(lo1, p[1]);
    hi1 = std::max(hi1, p[1]);
  }
  const double pad0 = box_pad * std::max(hi0 - lo0, hi1 - lo1);
  const double pad1 = pad0;
  const double tol = 1e-12 * (1.0 + std::max(hi0 - lo0, hi1 - lo1));
  auto eval = [hull, tol](std::span<const double> x) {
    return inside_hull(hull, x[0], x[1], tol) ? 0.0 : kInf;
  };
  return Potential{Box({lo0 - pad0, lo1 - pad1}, {hi0 + pad0, hi1 + pad1}), eval,
                   Smoothness::NonSmooth};
}
}  // namespace

ConvexBody2D make_convex_body_2d(const std::vector<std::array<double, 2>>& vertices,
                                 double box_pad) {
  require(vertices.size() >= 3, ErrorCode::DegenerateHull,
          "a convex body needs at least 3 vertices");
  auto hull = convex_hull(vertices);
  double diam = 0.0;
  for (const auto& p : vertices)
    for (const auto& q : vertices)
      diam = std::max(diam, std::hypot(p[0] - q[0], p[1] - q[1]));
  const auto geom = hull.size() >= 3 ? polygon_geometry(hull) : PolygonGeometry{};
  if (hull.size() < 3 || std::fabs(geom.area) <= 1e-12 * diam * diam)
    fail(ErrorCode::DegenerateHull, "vertex set has a degenerate convex hull");
  ConvexBody2D body;
  body.hull = std::move(hull);
  body.area = geom.area;
  body.barycenter = geom.centroid;
  body.potential = body_potential(body.hull, box_pad);
  return body;
}

ConvexBody2D translate_body(const ConvexBody2D& body, std::array<double, 2> shift,
                            double box_pad) {
  std::vector<std::array<double, 2>> moved = body.hull;
  for (auto& p : moved) {
    p[0] += shift[0];
    p[1] += shift[1];
  }
  return make_convex_body_2d(moved, box_pad);
}

ConvexBody2D steiner_symmetrize_2d(const ConvexBody2D& body, double box_pad) {
  const double diam = std::max(body.potential.domain.length(0),
                               body.potential.domain.length(1));
  require(std::hypot(body.barycenter[0], body.barycenter[1]) <= 1e-8 * (1.0 + diam),
          ErrorCode::NotBarycentered,
          "steiner_symmetrize_2d expects a barycentered body");

  // section [a(x1), b(x1)] against each vertical line of hull x-breakpoints
  auto section = [&](double x) -> std::pair<double, double> {
    double a = kInf, b = -kInf;
    const auto& hull = body.hull;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const auto& p = hull[i];
      const auto& q = hull[(i + 1) % hull.size()];
      if ((p[0] - x) * (q[0] - x) > 0.0) continue;  // edge does not cross
      if (p[0] == q[0]) {
        if (p[0] == x) {
          a = std::min({a, p[1], q[1]});
          b = std::max({b, p[1], q[1]});
        }
        continue;
      }
      const double tt = (x - p[0]) / (q[0] - p[0]);
      if (tt < -1e-12 || tt > 1.0 + 1e-12) continue;
      const double y = p[1] + tt * (q[1] - p[1]);
      a = std::min(a, y);
      b = std::max(b, y);
    }
    return {a, b};
  };

  std::vector<double> xs;
  for (const auto& p : body.hull) xs.push_back(p[0]);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double u, double v) { return std::fabs(u - v) < 1e-12; }),
           xs.end());

  std::vector<std::array<double, 2>> sym_vertices;
  for (double x : xs) {
    const auto [a, b] = section(x);
    if (!(b >= a)) continue;
    const double half = 0.5 * (b - a);
    sym_vertices.push_back({x, half});
    sym_vertices.push_back({x, -half});
  }
  return make_convex_body_2d(sym_vertices, box_pad);
}

namespace {
MartingaleCheck finalize_martingale(double worst, double tol, const std::string& label) {
  MartingaleCheck out;
  out.worst_violation = worst;
  const std::string id = "martingale_increments/" + label;
  out.report = VerificationReport::make(id, worst, 0.0, tol, hex64(fnv1a64(id)));
  out.report.constant_used = 0.0;
  return out;
}
}  // namespace

MartingaleCheck martingale_increment_check(const GridDensity& law, double tol,
                                           const std::string& label) {
  const int n = law.dim();
  double worst = 0.0;
  std::vector<double> pt(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto family = martingale_prefix_family(i);
    std::vector<int> powers(static_cast<std::size_t>(n), 0);
    powers[static_cast<std::size_t>(i)] = 2;
    const double xi_sq = law.mixed_moment(powers);
    for (const auto& g : family) {
      std::vector<double> num_buf(static_cast<std::size_t>(law.values().size()), 0.0);
      std::vector<double> g2_buf = num_buf;
      for_each_index(law.shape(), [&](std::int64_t flat, std::span<const int> idx) {
        const double mass = law.node_weight(idx) * law.values()[flat];
        if (mass <= 0.0) return;
        law.node_point(idx, pt);
        const double gv = g(std::span<const double>(pt.data(), static_cast<std::size_t>(i)));
        num_buf[static_cast<std::size_t>(flat)] = mass * pt[static_cast<std::size_t>(i)] * gv;
        g2_buf[static_cast<std::size_t>(flat)] = mass * gv * gv;
      });
      const double num = pairwise_sum(num_buf);
      const double scale = std::sqrt(std::max(xi_sq, 1e-300) * std::max(pairwise_sum(g2_buf), 1e-300)) + 1e-12;
      worst = std::max(worst, std::fabs(num) / scale);
    }
  }
  return finalize_martingale(worst, tol, label);
}

MartingaleCheck martingale_increment_check(const SampleSet& law, double tol,
                                           const std::string& label) {
  const int n = law.dim;
  const std::int64_t count = law.count();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto family = martingale_prefix_family(i);
    std::vector<int> powers(static_cast<std::size_t>(n), 0);
    powers[static_cast<std::size_t>(i)] = 2;
    const double xi_sq = sample_mixed_moment(law, powers);
    for (const auto& g : family) {
      std::vector<double> num_buf(static_cast<std::size_t>(count));
      std::vector<double> g2_buf(static_cast<std::size_t>(count));
      for (std::int64_t k = 0; k < count; ++k) {
        const auto p = law.point(k);
        const double gv = g(p.first(static_cast<std::size_t>(i)));
        num_buf[static_cast<std::size_t>(k)] = law.weights[static_cast<std::size_t>(k)] * p[i] * gv;
        g2_buf[static_cast<std::size_t>(k)] = law.weights[static_cast<std::size_t>(k)] * gv * gv;
      }
      const double num = pairwise_sum(num_buf);
      const double scale = std::sqrt(std::max(xi_sq, 1e-300) * std::max(pairwise_sum(g2_buf), 1e-300)) + 1e-12;
      worst = std::max(worst, std::fabs(num) / scale);
    }
  }
  return finalize_martingale(worst, tol, label);
}

namespace {
struct MassPoint {
  std::vector<double> x;
  double mass = 0.0;
};

std::vector<MassPoint> grid_cloud(const GridDensity& g) {
  std::vector<MassPoint> cloud;
  std::vector<double> pt(static_cast<std::size_t>(g.dim()));
  for_each_index(g.shape(), [&](std::int64_t flat, std::span<const int> idx) {
    const double mass = g.node_weight(idx) * g.values()[flat];
    if (mass <= 0.0) return;
    g.node_point(idx, pt);
    cloud.push_back({pt, mass});
  });
  return cloud;
}

GridDensity splat_cloud_sums(const std::vector<MassPoint>& a,
                             const std::vector<MassPoint>& b, const Box& box,
                             const std::vector<int>& shape) {
  const int n = box.dim;
  Tensor acc(shape, 0.0);
  std::vector<double> step(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    step[static_cast<std::size_t>(i)] = box.length(i) / (shape[static_cast<std::size_t>(i)] - 1);
  std::vector<int> cell(static_cast<std::size_t>(n));
  std::vector<double> frac(static_cast<std::size_t>(n));
  for (const auto& pa : a) {
    for (const auto& pb : b) {
      const double mass = pa.mass * pb.mass;
      for (int i = 0; i < n; ++i) {
        const double v = pa.x[static_cast<std::size_t>(i)] + pb.x[static_cast<std::size_t>(i)];
        double u = (v - box.lo[i]) / step[static_cast<std::size_t>(i)];
        u = std::clamp(u, 0.0, static_cast<double>(shape[static_cast<std::size_t>(i)] - 1));
        int c = std::min(static_cast<int>(u), shape[static_cast<std::size_t>(i)] - 2);
        cell[static_cast<std::size_t>(i)] = c;
        frac[static_cast<std::size_t>(i)] = u - c;
      }
      for (int mask = 0; mask < (1 << n); ++mask) {
        double w = 1.0;
        std::int64_t off = 0;
        for (int i = 0; i < n; ++i) {
          const int hi = (mask >> i) & 1;
          w *= hi ? frac[static_cast<std::size_t>(i)] : 1.0 - frac[static_cast<std::size_t>(i)];
          off += (cell[static_cast<std::size_t>(i)] + hi) * acc.stride(i);
        }
        if (w > 0.0) acc[off] += w * mass;
      }
    }
  }
  std::vector<double> raw(static_cast<std::size_t>(acc.size()));
  std::vector<std::vector<double>> wts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& w = wts[static_cast<std::size_t>(i)];
    w.assign(static_cast<std::size_t>(shape[static_cast<std::size_t>(i)]), step[static_cast<std::size_t>(i)]);
    w.front() = 0.5 * step[static_cast<std::size_t>(i)];
    w.back() = 0.5 * step[static_cast<std::size_t>(i)];
  }
  for_each_index(shape, [&](std::int64_t flat, std::span<const int> idx) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= wts[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx[i])];
    raw[static_cast<std::size_t>(flat)] = acc[flat] / w;
  });
  return GridDensity(box, shape, std::move(raw));
}
}  // namespace

GridDensity convolve_grids(const GridDensity& a, const GridDensity& b,
                           const std::vector<int>& shape) {
  require(a.dim() == b.dim(), ErrorCode::DimMismatch, "convolution dimension mismatch");
  const int n = a.dim();
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    lo[static_cast<std::size_t>(i)] = a.box().lo[i] + b.box().lo[i];
    hi[static_cast<std::size_t>(i)] = a.box().hi[i] + b.box().hi[i];
  }
  return splat_cloud_sums(grid_cloud(a), grid_cloud(b), Box(std::move(lo), std::move(hi)),
                          shape);
}

EmbedSumResult embed_sum_construction(const std::vector<GridDensity>& components,
                                      EmbedMode mode, const std::vector<int>& grid_shape,
                                      std::int64_t sample_count, std::uint64_t seed,
                                      double component_tol) {
  require(!components.empty(), ErrorCode::InvalidArgument, "no components");
  const int k = components.front().dim();
  require(static_cast<int>(components.size()) == k + 1, ErrorCode::DimMismatch,
          "need k+1 components of dimension k");
  for (const auto& c : components) {
    require(c.dim() == k, ErrorCode::DimMismatch, "component dimension mismatch");
    const auto check = martingale_increment_check(c, component_tol, "component");
    if (check.worst_violation > component_tol)
      fail(ErrorCode::ComponentNotMartingale,
           "component fails the martingale-increment property (violation " +
               format_g17(check.worst_violation) + ")");
  }
  const int out_dim = k + 1;
  EmbedSumResult result;

  if (mode == EmbedMode::Sample) {
    require(sample_count >= 1, ErrorCode::InvalidArgument, "sample count required");
    SampleSet out;
    out.dim = out_dim;
    out.seed = seed;
    out.points.assign(static_cast<std::size_t>(sample_count * out_dim), 0.0);
    out.weights.assign(static_cast<std::size_t>(sample_count),
                       1.0 / static_cast<double>(sample_count));
    for (int c = 0; c < k + 1; ++c) {
      const SampleSet draw = components[static_cast<std::size_t>(c)].sample(
          sample_count, seed + 0x9e37 * static_cast<std::uint64_t>(c + 1));
      for (std::int64_t s = 0; s < sample_count; ++s) {
        const auto p = draw.point(s);
        int slot = 0;
        for (int i = 0; i < out_dim; ++i) {
          if (i == c) continue;  // the inserted zero coordinate
          out.points[static_cast<std::size_t>(s * out_dim + i)] += p[slot++];
        }
      }
    }
    result.check = martingale_increment_check(out, 1e-2, "embed_sum");
    result.samples = std::move(out);
    return result;
  }

  require(out_dim <= 3, ErrorCode::InvalidArgument,
          "grid-mode embedding supports output dimension <= 3");
  require(static_cast<int>(grid_shape.size()) == out_dim, ErrorCode::DimMismatch,
          "grid shape rank mismatch");

  // embedded component c: its nodes with a zero inserted at slot c
  auto embedded_cloud = [&](int c) {
    std::vector<MassPoint> cloud;
    const GridDensity& g = components[static_cast<std::size_t>(c)];
    std::vector<double> pt(static_cast<std::size_t>(k));
    for_each_index(g.shape(), [&](std::int64_t flat, std::span<const int> idx) {
      const double mass = g.node_weight(idx) * g.values()[flat];
      if (mass <= 0.0) return;
      g.node_point(idx, pt);
      MassPoint mp;
      mp.mass = mass;
      mp.x.assign(static_cast<std::size_t>(out_dim), 0.0);
      int slot = 0;
      for (int i = 0; i < out_dim; ++i)
        if (i != c) mp.x[static_cast<std::size_t>(i)] = pt[static_cast<std::size_t>(slot++)];
      cloud.push_back(std::move(mp));
    });
    return cloud;
  };

  // box of the total sum
  std::vector<double> lo(static_cast<std::size_t>(out_dim), 0.0);
  std::vector<double> hi(static_cast<std::size_t>(out_dim), 0.0);
  for (int c = 0; c < k + 1; ++c) {
    const Box& b = components[static_cast<std::size_t>(c)].box();
    int slot = 0;
    for (int i = 0; i < out_dim; ++i) {
      if (i == c) continue;
      lo[static_cast<std::size_t>(i)] += b.lo[slot];
      hi[static_cast<std::size_t>(i)] += b.hi[slot];
      ++slot;
    }
  }
  Box box(std::move(lo), std::move(hi));

  std::vector<MassPoint> acc = embedded_cloud(0);
  for (int c = 1; c < k + 1; ++c) {
    const GridDensity partial =
        splat_cloud_sums(acc, embedded_cloud(c), box, grid_shape);
    if (c == k) {
      result.check = martingale_increment_check(partial, 1e-2, "embed_sum");
      result.law = partial;
      return result;
    }
    acc = grid_cloud(partial);
  }
  // single component: k = 0 cannot happen (dim >= 1), loop always returns
  fail(ErrorCode::InvalidArgument, "embedding construction fell through");
}

}  // namespace lclab
