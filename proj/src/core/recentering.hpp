#ifndef LCLAB_RECENTERING_HPP
#define LCLAB_RECENTERING_HPP

#include <functional>
#include <memory>
#include <string>

#include "core/grid_density.hpp"
#include "core/tensor.hpp"
#include "core/triangular_map.hpp"

namespace lclab {

// Per-coordinate conditional means and variances over prefix grid nodes,
// with the Cheeger weight lambda_i^2 = 1/(3 Var(X_i | X_1..X_{i-1})).
// Entries at zero-mass prefixes are NaN and stay undefined until touched.
class ConditionalMoments {
 public:
  static std::shared_ptr<const ConditionalMoments> build(const GridDensity& mu);

  int dim() const { return dim_; }

  // Node access; prefix_idx has length i.
  double mean_node(int i, std::span<const int> prefix_idx) const;
  double var_node(int i, std::span<const int> prefix_idx) const;
  double lambda_sq_node(int i, std::span<const int> prefix_idx) const;

  // Multilinear interpolation at off-grid prefixes. Undefined table cells
  // carrying interpolation weight above 1e-8 raise UndefinedPrefix.
  double mean_at(int i, std::span<const double> prefix) const;
  double var_at(int i, std::span<const double> prefix) const;
  double lambda_sq_at(int i, std::span<const double> prefix) const;

  const Tensor& mean_table(int i) const { return mean_[static_cast<std::size_t>(i)]; }
  const Tensor& var_table(int i) const { return var_[static_cast<std::size_t>(i)]; }

  // Smallest lambda_i^2 over populated prefix nodes; cube-supported
  // measures keep this above 1/(6 R^2).
  double min_lambda_sq() const;

  const Box& box() const { return box_; }
  const std::vector<int>& shape() const { return shape_; }

  void save_csv(std::ostream& os) const;
  void save_csv_file(const std::string& path) const;

 private:
  double interp(const Tensor& table, int i, std::span<const double> prefix) const;

  int dim_ = 0;
  Box box_;
  std::vector<int> shape_;
  std::vector<double> step_;
  std::vector<Tensor> mean_;  // mean_[i]: tensor over the first i axes
  std::vector<Tensor> var_;
};

// R_i(x) = x_i - m_i(x_1..x_{i-1}); triangular with unit diagonal.
class RecenterMap final : public TriangularMap {
 public:
  explicit RecenterMap(std::shared_ptr<const ConditionalMoments> moments)
      : TriangularMap(moments->dim()), moments_(std::move(moments)) {}

  double component(int i, std::span<const double> x) const override {
    return x[i] - moments_->mean_at(i, x.first(static_cast<std::size_t>(i)));
  }
  double diag_derivative(int, std::span<const double>) const override { return 1.0; }

  const ConditionalMoments& moments() const { return *moments_; }

 private:
  std::shared_ptr<const ConditionalMoments> moments_;
};

// Inverse S = R^{-1} by forward substitution:
// S_i(xbar) = xbar_i + m_i(S_1..S_{i-1}).
class InverseRecenterMap final : public TriangularMap {
 public:
  explicit InverseRecenterMap(std::shared_ptr<const ConditionalMoments> moments)
      : TriangularMap(moments->dim()), moments_(std::move(moments)) {}

  void apply_into(std::span<const double> x, std::span<double> out) const override {
    for (int i = 0; i < dim(); ++i)
      out[i] = x[i] + moments_->mean_at(i, out.first(static_cast<std::size_t>(i)));
  }
  double component(int i, std::span<const double> x) const override {
    std::vector<double> s(static_cast<std::size_t>(i) + 1);
    for (int a = 0; a <= i; ++a)
      s[static_cast<std::size_t>(a)] =
          x[a] + moments_->mean_at(a, std::span<const double>(s.data(), static_cast<std::size_t>(a)));
    return s[static_cast<std::size_t>(i)];
  }
  double diag_derivative(int, std::span<const double>) const override { return 1.0; }

 private:
  std::shared_ptr<const ConditionalMoments> moments_;
};

struct RecenteringPair {
  std::shared_ptr<const ConditionalMoments> moments;
  std::shared_ptr<const RecenterMap> R;
  std::shared_ptr<const InverseRecenterMap> S;
};

RecenteringPair build_recentering(const GridDensity& mu);
RecenteringPair build_recentering(std::shared_ptr<const ConditionalMoments> moments);

// Per-node recentered and reduced coordinates of a grid measure, cached for
// the verification loops: xbar = R(x), xred = x - xbar, cond_var[i] the
// conditional variance at the node's prefix.
struct RecenteredView {
  int dim = 0;
  std::int64_t nodes = 0;
  std::vector<double> xbar;
  std::vector<double> xred;
  std::vector<double> cond_var;

  std::span<const double> xbar_at(std::int64_t flat) const {
    return std::span<const double>(xbar.data() + flat * dim, static_cast<std::size_t>(dim));
  }
  std::span<const double> xred_at(std::int64_t flat) const {
    return std::span<const double>(xred.data() + flat * dim, static_cast<std::size_t>(dim));
  }
  std::span<const double> var_at(std::int64_t flat) const {
    return std::span<const double>(cond_var.data() + flat * dim, static_cast<std::size_t>(dim));
  }
};

RecenteredView make_recentered_view(const GridDensity& mu, const ConditionalMoments& moments);

enum class LawMode { GridPushforward, Sample };

// Law of Xbar = R # mu. Grid mode re-bins map images with mass-preserving
// multilinear cell splitting (dim <= 3); sample mode pushes draws through R.
GridDensity recentered_law_grid(const GridDensity& mu, const RecenteringPair& rec);
SampleSet recentered_law_sample(const GridDensity& mu, const RecenteringPair& rec,
                                std::int64_t count, std::uint64_t seed);

// Law of the reduced vector X' = (m_1, m_2(X_1), ..., m_n(X_{<n})).
GridDensity reduced_vector_law_grid(const GridDensity& mu, const RecenteringPair& rec);
SampleSet reduced_vector_law_sample(const GridDensity& mu, const RecenteringPair& rec,
                                    std::int64_t count, std::uint64_t seed);

// Mass-preserving re-binning of an arbitrary pushforward; target box derived
// from the image cloud when not supplied.
GridDensity rebin_pushforward(const GridDensity& mu,
                              const std::function<void(std::span<const double>, std::span<double>)>& map,
                              const Box* target_box = nullptr,
                              const std::vector<int>* target_shape = nullptr);

SampleSet push_samples(const SampleSet& samples, const TriangularMap& map);

// Worst |E[Xbar_i | prefix]| over populated prefixes of a (re-binned) law;
// should sit at re-binning tolerance for genuine recentered laws.
double max_conditional_mean_abs(const GridDensity& law);

// Node table of R (or S) in the shared triangular-map text format:
// axis, prefix coordinates, x, T(x) per populated prefix node.
void save_recentering_map_text(const ConditionalMoments& moments, bool inverse,
                               const std::string& path);

}  // namespace lclab

#endif
