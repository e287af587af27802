#ifndef LCLAB_MONOTONE_MAP_HPP
#define LCLAB_MONOTONE_MAP_HPP

#include <functional>
#include <string>
#include <vector>

#include "core/grid_density.hpp"
#include "core/reports.hpp"

namespace lclab {

// Nondecreasing left-continuous 1D transport map sampled at source nodes,
// evaluated elsewhere by monotone piecewise-linear interpolation.
struct MonotoneMap1D {
  std::vector<double> nodes;   // source grid
  std::vector<double> values;  // T at the nodes, nondecreasing
  bool left_continuous = true;

  double operator()(double x) const;

  void save_text(std::ostream& os) const;
  void save_text_file(const std::string& path) const;
};

// Quantile coupling T = F_nu^{-1} o F_mu evaluated at the source nodes.
MonotoneMap1D monotone_map(const GridDensity& mu, const GridDensity& nu);

// Same construction from precomputed tables; target quantiles taken against
// `target_cdf`, source ranks against `source_cdf`.
MonotoneMap1D monotone_map(const std::vector<double>& source_nodes,
                           const CdfTable& source_cdf, const CdfTable& target_cdf);

struct CheegerEstimate {
  double lambda_sq_lower = 0.0;  // 1/(3 Var), the working value
  double variance = 0.0;
};

// Bobkov's lower bound lambda^2 = 1/(3 Var(gamma)); +infinity at zero
// variance.
CheegerEstimate cheeger_constant(const GridDensity& gamma);

enum class OneDimMode { CheegerMedian, CheegerGammaN };

// CheegerMedian: lambda Int |f - m(f)| dgamma <= Int |f'| dgamma with
// lambda = sqrt(1/(3 Var)).
// CheegerGammaN: (1/16) Int N(lambda (f - mean f)) dgamma <= Int N(f') dgamma.
// Derivatives use central differences at the grid spacing (one-sided at the
// ends); handles whose difference quotients blow up under refinement are
// rejected.
VerificationReport verify_one_dim_functional(const GridDensity& gamma,
                                             const std::function<double(double)>& f,
                                             OneDimMode mode,
                                             const std::string& label = "f");

// Empirical best Cheeger constant: min over the family of RHS/LHS in the
// median form. Used to exercise the Bobkov sandwich
// sqrt(1/(3Var)) <= lambda <= sqrt(2/Var).
double estimate_cheeger_constant(const GridDensity& gamma,
                                 const std::vector<std::function<double(double)>>& family);

// Fixed 50-member probe family for the estimate above: steep clipped ramps at
// interior quantiles, sigmoids, kinks, trigonometric and quadratic probes.
std::vector<std::function<double(double)>> cheeger_probe_family(const GridDensity& gamma);

// Median of the pushforward of gamma by f: mass-weighted quantile 0.5 with
// ties broken by node order.
double pushforward_median(const GridDensity& gamma, const std::vector<double>& fvals);

}  // namespace lclab

#endif
