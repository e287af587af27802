#ifndef LCLAB_VARIANCE_LAB_HPP
#define LCLAB_VARIANCE_LAB_HPP

#include <vector>

#include "core/recentering.hpp"
#include "core/reports.hpp"

namespace lclab {

struct VarianceBounds {
  double var_norm_sq_bar = 0.0;      // Var(|Xbar|^2)
  double sum_fourth_bar = 0.0;       // sum_i E[Xbar_i^4]
  double sum_fourth = 0.0;           // sum_i E[X_i^4]
  std::vector<double> borell_ratios; // per-coordinate marginal E[Y^4]/E[Y^2]^2
  std::vector<VerificationReport> reports;
};

// Var(|Xbar|^2) <= 4a sum E[Xbar_i^4] with a the weighted Poincare constant,
// the per-coordinate
// step E[Xbar_i^4] <= 16 E[X_i^4], and the reverse-Holder ratios of the
// centered marginals (reported, never asserted against an unpinned
// universal constant).
VarianceBounds check_variance_bounds(const GridDensity& mu,
                                     const ConditionalMoments& moments,
                                     const std::string& label = "mu");

struct VarianceIdentity {
  double var_norm_sq = 0.0;        // Var(|X|^2)
  double var_bar = 0.0;            // Var(|Xbar|^2)
  double var_red = 0.0;            // Var(|X'|^2)
  double cov_bar_red = 0.0;        // Cov(|Xbar|^2, |X'|^2)
  double cross_sq = 0.0;           // E[(Xbar . X')^2]
  double bar_cross = 0.0;          // E[|Xbar|^2 Xbar . X']
  double red_cross = 0.0;          // E[|X'|^2 Xbar . X']
  double residual = 0.0;           // identity defect
  std::vector<VerificationReport> reports;
};

// Six-term decomposition of Var(|X|^2) plus the orthogonality
// E[Xbar_i X'_i] = 0 and the cross-term bound E[(Xbar.X')^2] <= sum E[X_i^4].
VarianceIdentity variance_identity(const GridDensity& mu,
                                   const ConditionalMoments& moments,
                                   const std::string& label = "mu");

// Sample mode: draws recentered through the moment tables of the generating
// measure; variance terms carry batch-means standard errors and the reports
// use statistical tolerances.
struct SampleVarianceIdentity {
  VarianceIdentity identity;
  double var_norm_sq_stderr = 0.0;  // batch-means error bar on Var(|X|^2)
};
SampleVarianceIdentity variance_identity(const SampleSet& samples,
                                         const ConditionalMoments& moments,
                                         const std::string& label = "mu",
                                         int batches = 20);
VarianceBounds check_variance_bounds(const SampleSet& samples,
                                     const ConditionalMoments& moments,
                                     const std::string& label = "mu");

struct QuadraticVariation {
  std::vector<double> ratios;  // Var([M]_k) / sum_{i<=k} E[X_i^4]
  double empirical_constant = 0.0;
  VerificationReport report;
};

// Var(sum_{i<=k} X_i^2) <= c sum_{i<=k} E[X_i^4] for martingale increments;
// the max ratio over k is the reported empirical c.
QuadraticVariation quadratic_variation_check(const GridDensity& increment_law,
                                             const ConditionalMoments& moments,
                                             double martingale_tol = 1e-6,
                                             const std::string& label = "mu");

struct ThinShellRow {
  double t = 0.0;
  double probability = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

// Empirical P(| |X| - sqrt(n) | >= t sqrt(n)) at the probe thresholds with
// 95% score intervals; requires isotropy within 0.02 unless the caller
// vouches for it.
std::vector<ThinShellRow> thin_shell_tail(const SampleSet& samples,
                                          bool isotropy_checked = false,
                                          std::span<const double> thresholds = {});

}  // namespace lclab

#endif
