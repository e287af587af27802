#ifndef LCLAB_COST_FUNCTION_HPP
#define LCLAB_COST_FUNCTION_HPP

#include <cmath>

#include "core/numerics.hpp"

namespace lclab {

// N(t) = |t| - log(1 + |t|): even, convex, N(0) = 0, quadratic near zero and
// linear at infinity. N(+-inf) = +inf.
inline double n_cost(double t) {
  if (std::isnan(t)) return kNaN;
  const double a = std::fabs(t);
  if (a == kInf) return kInf;
  return a - std::log1p(a);
}

// Inverse of N on [0, inf).
double n_cost_inverse(double y);

// Largest c with N(u) >= c u^2 on 0 < |u| <= u_max (N(u)/u^2 is decreasing,
// so the minimum sits at u_max).
double n_quadratic_floor(double u_max);

// 4 * sup_{0 < v <= N^{-1}(1)} v^2 / N(v), the uniform Hamilton-Jacobi
// bound constant.
double hj_uniform_constant();

}  // namespace lclab

#endif
