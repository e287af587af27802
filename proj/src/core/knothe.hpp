#ifndef LCLAB_KNOTHE_HPP
#define LCLAB_KNOTHE_HPP

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/grid_density.hpp"
#include "core/monotone_map.hpp"
#include "core/triangular_map.hpp"

namespace lclab {

// Knothe-Rosenblatt rearrangement between grid densities: the first
// coordinate is the 1D quantile map between marginals, each further
// coordinate the quantile map between the source conditional and the target
// conditional along the already-mapped prefix. Slices are built lazily and
// memoized per source prefix node (insert-once cache, safe under concurrent
// evaluation).
class KnotheMap final : public TriangularMap {
 public:
  KnotheMap(std::shared_ptr<const GridDensity> mu, std::shared_ptr<const GridDensity> nu);

  double component(int i, std::span<const double> x) const override;
  void apply_into(std::span<const double> x, std::span<double> out) const override;

  // dT_i/dx_i by the density ratio of the 1D quantile map,
  // source conditional density / target conditional density at the image;
  // falls back to the interpolated slice slope where the target density is
  // below threshold. Raises DegenerateJacobian on nonpositive entries.
  double diag_derivative(int i, std::span<const double> x) const override;

  struct SliceData {
    std::shared_ptr<const MonotoneMap1D> map;
    std::vector<double> src_cond;  // normalized conditional density values
    std::vector<double> tgt_cond;
  };

  // Slice map along axis i for a source prefix at grid nodes.
  std::shared_ptr<const MonotoneMap1D> node_slice(int axis, std::span<const int> prefix_idx) const;
  const SliceData& node_slice_data(int axis, std::span<const int> prefix_idx) const;

  const GridDensity& source() const { return *mu_; }
  const GridDensity& target() const { return *nu_; }

  void save_text_file(const std::string& path) const;

 private:
  SliceData build_slice(int axis, std::span<const double> src_prefix,
                        std::span<const double> img_prefix) const;
  bool prefix_on_nodes(int axis, std::span<const double> x, std::vector<int>& idx) const;

  std::shared_ptr<const GridDensity> mu_;
  std::shared_ptr<const GridDensity> nu_;
  mutable std::vector<std::unordered_map<std::int64_t, std::shared_ptr<const SliceData>>> memo_;
  mutable std::mutex memo_mutex_;
};

// dT_i/dx_i along a prepared slice, by density ratio with slope fallback.
double knothe_slice_derivative(const GridDensity& mu, const GridDensity& nu, int axis,
                               const KnotheMap::SliceData& data, double x);

std::shared_ptr<KnotheMap> build_knothe(std::shared_ptr<const GridDensity> mu,
                                        std::shared_ptr<const GridDensity> nu);

// Vector of dT_i/dx_i at a point, all entries positive.
std::vector<double> diag_jacobian(const KnotheMap& map, std::span<const double> point);

struct EntropyBound {
  double bound = 0.0;    // Int sum_i (dT_i - 1 - log dT_i) dmu, always >= 0
  double entropy = 0.0;  // D(nu || mu)
  double margin = 0.0;   // entropy - bound
};

// Knothe change-of-variables lower bound on the relative entropy.
EntropyBound entropy_lower_bound(std::shared_ptr<const GridDensity> mu,
                                 std::shared_ptr<const GridDensity> nu);

// E[phi(T(X))] over the source grid through memoized node slices.
double pushforward_expect(const KnotheMap& map, const GridDensity& mu,
                          const std::function<double(std::span<const double>)>& phi);

}  // namespace lclab

#endif
