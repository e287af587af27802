#ifndef LCLAB_GRID_DENSITY_HPP
#define LCLAB_GRID_DENSITY_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "core/box.hpp"
#include "core/numerics.hpp"
#include "core/potential.hpp"
#include "core/tensor.hpp"

namespace lclab {

enum class CellQuadrature { Trapezoid };

// Monte Carlo carrier: points with uniform weights, reproducible from seed.
struct SampleSet {
  int dim = 0;
  std::vector<double> points;  // count * dim, row major
  std::vector<double> weights;
  std::uint64_t seed = 0;

  std::int64_t count() const {
    return dim == 0 ? 0 : static_cast<std::int64_t>(points.size()) / dim;
  }
  std::span<const double> point(std::int64_t k) const {
    return std::span<const double>(points.data() + k * dim, static_cast<std::size_t>(dim));
  }
};

// Cumulative trapezoid table of a 1D density on uniform nodes. Quantiles are
// found by binary search with linear interpolation inside cells, so F and
// F^{-1} are exact inverses of each other up to the cell resolution.
class CdfTable {
 public:
  CdfTable() = default;
  CdfTable(std::vector<double> nodes, std::span<const double> density);

  double total_mass() const { return cum_.empty() ? 0.0 : cum_.back(); }
  // F(x) normalized to [0,1]; clamps outside the node range.
  double cdf(double x) const;
  // F^{-1}(t) = inf { x : F(x) >= t } for t in [0,1], linear inside cells.
  double quantile(double t) const;
  // Exact inverse of the piecewise-linear density (quadratic inside cells);
  // sampling through this leaves the trapezoid moments unbiased.
  double quantile_pwl(double t) const;

  const std::vector<double>& nodes() const { return nodes_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> density_;
  std::vector<double> cum_;
};

// Normalized tensor-grid density over a box, dim <= 4. Immutable after
// construction; prefix marginals are precomputed so conditional laws are
// exact restrictions of the quadrature rule.
class GridDensity {
 public:
  // Normalizes raw nonnegative node values; log landscape defaults to
  // log(raw values).
  GridDensity(Box box, std::vector<int> shape, std::vector<double> raw_values);
  GridDensity(Box box, std::vector<int> shape, std::vector<double> raw_values,
              std::vector<double> log_values);

  int dim() const { return box_.dim; }
  const Box& box() const { return box_; }
  const std::vector<int>& shape() const { return shape_; }
  CellQuadrature cell_quadrature() const { return CellQuadrature::Trapezoid; }

  const Tensor& values() const { return values_; }
  const Tensor& log_values() const { return log_values_; }

  double step(int axis) const { return step_[static_cast<std::size_t>(axis)]; }
  const std::vector<double>& axis_nodes(int axis) const {
    return nodes_[static_cast<std::size_t>(axis)];
  }
  const std::vector<double>& axis_weights(int axis) const {
    return weights_[static_cast<std::size_t>(axis)];
  }
  double node_weight(std::span<const int> idx) const {
    double w = 1.0;
    for (int a = 0; a < dim(); ++a) w *= weights_[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[a])];
    return w;
  }

  // Quadrature mass; 1 within 1e-10 by construction.
  double mass() const;

  // Integral of term(flat index, multi index) against the density,
  // accumulated with a deterministic pairwise tree.
  template <class F>
  double expect(F&& term) const {
    std::vector<double> buf(static_cast<std::size_t>(values_.size()));
    for_each_index(shape_, [&](std::int64_t flat, std::span<const int> idx) {
      buf[static_cast<std::size_t>(flat)] =
          node_weight(idx) * values_[flat] * term(flat, idx);
    });
    return pairwise_sum(buf);
  }

  void node_point(std::span<const int> idx, std::span<double> out) const {
    for (int a = 0; a < dim(); ++a) out[a] = nodes_[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[a])];
  }

  // Marginal of the first k coordinates as an unnormalized tensor
  // (integrating the density over the trailing axes). k in 1..dim.
  const Tensor& prefix_marginal(int k) const;

  // Unnormalized conditional density values along `axis` for a prefix given
  // at grid nodes (axis = number of conditioned coordinates).
  std::vector<double> conditional_values_at_node(int axis, std::span<const int> prefix_idx) const;
  // Same with an off-grid prefix; multilinear interpolation over the
  // conditioned axes. Points outside the box clamp to the boundary.
  std::vector<double> conditional_values(int axis, std::span<const double> prefix) const;

  // Moment E[prod x_i^{powers[i]}].
  double mixed_moment(std::span<const int> powers) const;

  // Max violation of discrete concavity of log values along grid lines
  // (second differences of finite entries; <= ~1e-8 for convex potentials).
  double log_concavity_violation() const;

  // i.i.d.-approximating draws by sequential inverse-CDF on conditional
  // slices; deterministic given seed.
  SampleSet sample(std::int64_t count, std::uint64_t seed) const;

  void save_text(std::ostream& os) const;
  void save_text_file(const std::string& path) const;
  static GridDensity load_text(std::istream& is);
  static GridDensity load_text_file(const std::string& path);
  void save_binary_file(const std::string& path) const;
  static GridDensity load_binary_file(const std::string& path);

 private:
  void init_axes();
  void normalize();
  void build_marginals();

  Box box_;
  std::vector<int> shape_;
  Tensor values_;
  Tensor log_values_;
  std::vector<double> step_;
  std::vector<std::vector<double>> nodes_;
  std::vector<std::vector<double>> weights_;
  std::vector<Tensor> marginals_;  // prefix_marginal(k) for k = 1..dim-1
};

// Density exp(-V) on the tensor grid, normalized to quadrature mass one.
// Fails the build when the potential is not midpoint-convex on sampled pairs
// or when no grid node carries finite mass. supersample > 1 averages exp(-V)
// over each node's cell (supersample^dim probes); indicator potentials need
// this so partially covered boundary cells carry their share of mass instead
// of aliasing to 0/1.
GridDensity build_grid_density(const Potential& potential, std::vector<int> shape,
                               int audit_pairs = 1000, double audit_tol = 1e-9,
                               int supersample = 1);

// 1D conditional law on the axis after the conditioned prefix; `fixed` must
// cover axes 0..k-1 with values at grid nodes.
GridDensity conditional_slice(const GridDensity& density,
                              std::span<const std::pair<int, double>> fixed);

double mixed_moment(const GridDensity& density, std::span<const int> powers);

// 0.5 * integral |p - q| for densities on the same grid.
double tv_distance(const GridDensity& a, const GridDensity& b);

// Density resampled onto another grid by multilinear interpolation.
GridDensity regrid(const GridDensity& density, const Box& box, std::vector<int> shape);

double sample_mean(const SampleSet& s, int axis);
double sample_mixed_moment(const SampleSet& s, std::span<const int> powers);

}  // namespace lclab

#endif
