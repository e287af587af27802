#ifndef LCLAB_TRIANGULAR_MAP_HPP
#define LCLAB_TRIANGULAR_MAP_HPP

#include <span>
#include <vector>

#include "core/errors.hpp"

namespace lclab {

// Map T: R^n -> R^n with T_i depending only on x_1..x_i. Component i may read
// x[0..i] only.
class TriangularMap {
 public:
  explicit TriangularMap(int dim) : dim_(dim) {}
  virtual ~TriangularMap() = default;

  int dim() const { return dim_; }

  virtual double component(int i, std::span<const double> x) const = 0;

  // dT_i/dx_i at the point; entries are positive for transport maps and
  // exactly 1 for recentering maps.
  virtual double diag_derivative(int i, std::span<const double> x) const = 0;

  virtual void apply_into(std::span<const double> x, std::span<double> out) const {
    for (int i = 0; i < dim_; ++i) out[i] = component(i, x);
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(static_cast<std::size_t>(dim_));
    apply_into(x, out);
    return out;
  }

 private:
  int dim_;
};

}  // namespace lclab

#endif
