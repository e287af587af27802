#ifndef LCLAB_BOX_HPP
#define LCLAB_BOX_HPP

#include <span>
#include <vector>

#include "core/errors.hpp"

namespace lclab {

// Axis-aligned box [lo_1,hi_1] x ... x [lo_n,hi_n], the support carrier for
// every density in the library. Dimensions 1..4.
struct Box {
  int dim = 0;
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;

  Box(std::vector<double> lo_in, std::vector<double> hi_in)
      : dim(static_cast<int>(lo_in.size())), lo(std::move(lo_in)), hi(std::move(hi_in)) {
    require(dim >= 1 && dim <= 4, ErrorCode::InvalidArgument,
            "box dimension must be in 1..4");
    require(static_cast<int>(hi.size()) == dim, ErrorCode::DimMismatch,
            "box lo/hi length mismatch");
    for (int i = 0; i < dim; ++i)
      require(lo[i] < hi[i], ErrorCode::InvalidArgument,
              "box requires lo[i] < hi[i]");
  }

  static Box cube(int dim, double radius) {
    return Box(std::vector<double>(dim, -radius), std::vector<double>(dim, radius));
  }

  double length(int axis) const { return hi[axis] - lo[axis]; }

  bool contains(std::span<const double> x, double slack = 0.0) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
  }
};

}  // namespace lclab

#endif
