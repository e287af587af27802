#include "core/cost_function.hpp"

namespace lclab {

double n_cost_inverse(double y) {
  if (y <= 0.0) return 0.0;
  if (y == kInf) return kInf;
  double hi = 2.0;
  while (n_cost(hi) < y) hi *= 2.0;
  return bisect_increasing([](double v) { return n_cost(v); }, y, 0.0, hi);
}

double n_quadratic_floor(double u_max) {
  double c = kInf;
  const int probes = 4096;
  for (int k = 1; k <= probes; ++k) {
    const double u = u_max * static_cast<double>(k) / probes;
    c = std::min(c, n_cost(u) / (u * u));
  }
  return c;
}

double hj_uniform_constant() {
  const double vmax = n_cost_inverse(1.0);
  // v^2/N(v) is increasing, but locate the max numerically anyway
  const double peak = golden_max(
      [](double v) { return v <= 0.0 ? 0.0 : v * v / n_cost(v); }, 1e-8, vmax, 200);
  return 4.0 * peak;
}

}  // namespace lclab
