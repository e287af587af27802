#ifndef LCLAB_GENERATORS_HPP
#define LCLAB_GENERATORS_HPP

#include <array>
#include <optional>
#include <vector>

#include "core/grid_density.hpp"
#include "core/potential.hpp"
#include "core/recentering.hpp"
#include "core/reports.hpp"

namespace lclab {

// V(x) = x . Sigma^{-1} x / 2 on [-box_radius, box_radius]^n; covariance must
// have smallest eigenvalue above 1e-6.
Potential make_gaussian(int dim, const std::vector<std::vector<double>>& covariance,
                        double box_radius);

// Product exponential potential V(x) = sum |x_i| / scale_i.
Potential make_laplace(int dim, const std::vector<double>& scales, double box_radius);

// Uniform measure on the cube [-radius, radius]^n (zero potential).
Potential make_uniform_cube(int dim, double radius);

struct ConvexBody2D {
  Potential potential;               // 0 on the body, +infinity outside
  std::vector<std::array<double, 2>> hull;  // CCW vertices
  std::array<double, 2> barycenter = {0.0, 0.0};
  double area = 0.0;
};

// Uniform distribution over the convex hull of the given points; the
// barycenter is reported so callers can translate it to the origin.
ConvexBody2D make_convex_body_2d(const std::vector<std::array<double, 2>>& vertices,
                                 double box_pad = 0.05);

ConvexBody2D translate_body(const ConvexBody2D& body, std::array<double, 2> shift,
                            double box_pad = 0.05);

// Steiner symmetrization of a barycentered body with respect to the first
// axis: each vertical section [a(x1), b(x1)] is replaced by the centered
// section of the same length.
ConvexBody2D steiner_symmetrize_2d(const ConvexBody2D& body, double box_pad = 0.05);

struct MartingaleCheck {
  double worst_violation = 0.0;  // max_k |E[X_i g_k(X_{<i})]| / scale
  VerificationReport report;
};

// Certifies E_{i-1}[X_i] = 0 against the fixed 20-member prefix family;
// reports the worst normalized correlation.
MartingaleCheck martingale_increment_check(const GridDensity& law, double tol = 1e-6,
                                           const std::string& label = "law");
MartingaleCheck martingale_increment_check(const SampleSet& law, double tol = 1e-2,
                                           const std::string& label = "law");

// Law of the convolution A * B by pairwise mass re-binning onto a fresh grid
// over the Minkowski-sum box.
GridDensity convolve_grids(const GridDensity& a, const GridDensity& b,
                           const std::vector<int>& shape);

enum class EmbedMode { Grid, Sample };

struct EmbedSumResult {
  std::optional<GridDensity> law;     // grid mode, output dim <= 3
  std::optional<SampleSet> samples;   // sample mode
  MartingaleCheck check;
};

// Remark-style construction: k+1 independent dim-k laws, each a sequence of
// martingale increments, embedded with a zero at slots 1..k+1 and summed.
// The output is again log-concave with vanishing conditional means.
EmbedSumResult embed_sum_construction(const std::vector<GridDensity>& components,
                                      EmbedMode mode,
                                      const std::vector<int>& grid_shape = {},
                                      std::int64_t sample_count = 0,
                                      std::uint64_t seed = 0,
                                      double component_tol = 1e-6);

}  // namespace lclab

#endif
