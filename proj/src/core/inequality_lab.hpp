#ifndef LCLAB_INEQUALITY_LAB_HPP
#define LCLAB_INEQUALITY_LAB_HPP

#include <memory>
#include <string>
#include <vector>

#include "core/costs.hpp"
#include "core/reports.hpp"
#include "core/test_functions.hpp"

namespace lclab {

// (4 sqrt(3) + 1)^2, the weighted Poincare constant delivered by the
// transport argument.
double weighted_poincare_constant();

struct PoincareOptions {
  double constant = 0.0;  // 0 = use weighted_poincare_constant()
  double tolerance_scale = 1e-6;
};

// Var(f(Xbar)) <= a * sum_i E[ E[Xbar_i^2 | Xbar_{<i}] (d_i f)^2(Xbar) ] for
// every family member. The conditional weight is read through the identity
// E[Xbar_i^2 | Xbar_{<i} = R(x)_{<i}] = Var(X_i | X_{<i} = x_{<i}), so the
// whole check integrates over the source grid. Measures with vanishing
// conditional means additionally get the specialization with weights
// E_{i-1}[X_i^2].
std::vector<VerificationReport> verify_weighted_poincare(
    const GridDensity& mu, const ConditionalMoments& moments,
    const TestFunctionFamily& family, const PoincareOptions& options = {},
    const std::string& measure_label = "mu");

// Coupling form of the transport-entropy inequality:
// E[c_mu(Xbar, Ybar)] <= D(nu || mu) along the Knothe coupling.
VerificationReport verify_transport_entropy(std::shared_ptr<const GridDensity> mu,
                                            std::shared_ptr<const GridDensity> nu,
                                            const RecenteringPair& rec,
                                            double tolerance = 1e-6,
                                            const std::string& label = "pair");

// Knothe change-of-variables bound D(nu||mu) >= Int sum (dT_i - 1 - log dT_i) dmu.
VerificationReport verify_entropy_lower_bound(std::shared_ptr<const GridDensity> mu,
                                              std::shared_ptr<const GridDensity> nu,
                                              double tolerance = 1e-6,
                                              const std::string& label = "pair");

// Cube-supported transport bound: checks the weight floor
// lambda_i^2 >= 1/(6 R^2) at every populated prefix node and reports the
// ratio W2_ub^2 / (R^2 D) as the empirical constant (never asserted).
std::vector<VerificationReport> verify_t2_cube(std::shared_ptr<const GridDensity> mu,
                                               std::shared_ptr<const GridDensity> nu,
                                               double cube_radius,
                                               const RecenteringPair& rec_mu,
                                               double tolerance = 1e-6,
                                               const std::string& label = "pair");

// P_t f(x) = sup_y { f(y) - (1/t) ctilde_mu(x,y) }. The supremum is attained
// on the ball ||y - x||_x <= N^{-1}(48 M t) with M = 1 + sup|f|; the search
// runs multi-start coordinate ascent with golden-section line probes over
// that ball's bounding box. Always >= f(x).
double sup_convolution(const CostSpec& context, const TestFunction& f, double t,
                       std::span<const double> x);

struct HjCheck {
  std::vector<VerificationReport> reports;  // limsup bound + uniform bound
  std::vector<double> quotients;            // (1/t) Int (P_t f - f) dnu per t
  double rhs = 0.0;                         // 8 Int sum lambda_i^{-2} (d_i f)^2 dnu
  double fatou_constant = 0.0;              // 4 sup v^2/N(v) on (0, N^{-1}(1)]
};

// Difference-quotient form of the Hamilton-Jacobi bound: the quotient at the
// smallest t must sit below the weighted Dirichlet form, and every quotient
// must respect the uniform bound a L^2 / lambda_*^2 pointwise.
HjCheck verify_hj_bound(const CostSpec& context, const GridDensity& nu,
                        const TestFunction& f, std::span<const double> t_sequence,
                        double tolerance = 1e-2, const std::string& label = "f");

// Max |analytic - central difference| gradient discrepancy over probe
// points; the harness for analytic family members.
double gradient_discrepancy(const TestFunction& f,
                            std::span<const double> probe_points, int dim);

}  // namespace lclab

#endif
