#ifndef LCLAB_COSTS_HPP
#define LCLAB_COSTS_HPP

#include <memory>

#include "core/cost_function.hpp"
#include "core/knothe.hpp"
#include "core/recentering.hpp"

namespace lclab {

enum class CostVariant { SumForm, NormForm };

// Transport cost context of a base measure mu: the weights lambda_i are read
// at S(x), the inverse recentering of the evaluation point.
// SumForm: c_mu(x,y)    = (1/16) sum_i N(lambda_i(S(x)) (x_i - y_i))
// NormForm: ctilde(x,y) = (1/16) N(sqrt(sum_i lambda_i^2(S(x)) (x_i-y_i)^2))
// with the conventions 0 * inf = 0 and a * inf = sign(a) * inf.
struct CostSpec {
  std::shared_ptr<const ConditionalMoments> moments;
  std::shared_ptr<const InverseRecenterMap> inverse_recentering;
  CostVariant variant = CostVariant::SumForm;

  static CostSpec from(const RecenteringPair& rec, CostVariant variant) {
    return CostSpec{rec.moments, rec.S, variant};
  }
};

double cost_eval(const CostSpec& spec, std::span<const double> x,
                 std::span<const double> y);

// D(nu || mu) on a common box; unequal mesh sizes are resampled to the finer
// mesh first. +infinity when nu charges a mu-null cell.
double relative_entropy(const GridDensity& nu, const GridDensity& mu);

// E[c_mu(Xbar, Ybar)] along the Knothe coupling, with
// Ybar_i = T_i(X) - E[T_i(X) | X_1..X_{i-1}]; an upper bound on the optimal
// transport cost between the recentered laws.
double knothe_coupling_cost(std::shared_ptr<const GridDensity> mu,
                            std::shared_ptr<const GridDensity> nu,
                            const CostSpec& spec);

struct W2Bound {
  double value = 0.0;  // W2 distance (exact in 1D, coupling upper bound else)
  bool exact = false;
};

// Quadratic transport distance between laws: exact quantile coupling in 1D,
// Knothe-coupling upper bound in higher dimension.
W2Bound w2_upper_bound(std::shared_ptr<const GridDensity> mu_bar,
                       std::shared_ptr<const GridDensity> nu_bar);

}  // namespace lclab

#endif
