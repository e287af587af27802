#ifndef LCLAB_POTENTIAL_HPP
#define LCLAB_POTENTIAL_HPP

#include <functional>
#include <span>

#include "core/box.hpp"

namespace lclab {

enum class Smoothness { C1, NonSmooth };

// Convex potential V defining the density e^{-V} on its box. +infinity is
// allowed (indicator part of a convex body); evaluation outside the box is
// the caller's responsibility to avoid.
struct Potential {
  Box domain;
  std::function<double(std::span<const double>)> eval;
  Smoothness smoothness = Smoothness::C1;

  double operator()(std::span<const double> x) const { return eval(x); }
};

struct ConvexityAudit {
  double worst_violation = 0.0;  // max of V(mid) - (V(x)+V(y))/2 over pairs
  int pairs_checked = 0;
  bool passed = false;
};

// Midpoint-convexity audit on random pairs drawn from the domain box with a
// fixed internal seed. Pairs where either endpoint is +infinity impose no
// constraint.
ConvexityAudit audit_convexity(const Potential& p, int pairs = 1000,
                               double tol = 1e-9);

// Moreau envelope V_s(x) = inf_y { V(y) + |x-y|^2 / s }, evaluated by
// coordinate descent with golden-section line searches over the domain box.
// The result is convex, C1, <= V pointwise, and increases to V as s -> 0.
Potential moreau_smooth(const Potential& p, double s, int probe_budget = 64);

// Potential of the tilted density e^{theta.x} e^{-V}: V - theta.x.
Potential tilt_potential(const Potential& p, std::span<const double> theta);

// Potential translated so that x -> V(x - shift).
Potential translate_potential(const Potential& p, std::span<const double> shift);

}  // namespace lclab

#endif
