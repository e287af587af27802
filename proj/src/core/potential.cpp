#include "core/potential.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/numerics.hpp"

namespace lclab {

ConvexityAudit audit_convexity(const Potential& p, int pairs, double tol) {
  Rng rng(0x5eedc0de1234ULL);
  const Box& box = p.domain;
  std::vector<double> x(box.dim), y(box.dim), mid(box.dim);
  ConvexityAudit audit;
  audit.pairs_checked = pairs;
  for (int k = 0; k < pairs; ++k) {
    for (int i = 0; i < box.dim; ++i) {
      x[i] = rng.uniform(box.lo[i], box.hi[i]);
      y[i] = rng.uniform(box.lo[i], box.hi[i]);
      mid[i] = 0.5 * (x[i] + y[i]);
    }
    const double vx = p.eval(x);
    const double vy = p.eval(y);
    if (!std::isfinite(vx) || !std::isfinite(vy)) continue;
    const double vm = p.eval(mid);
    audit.worst_violation =
        std::max(audit.worst_violation, vm - 0.5 * (vx + vy));
  }
  audit.passed = audit.worst_violation <= tol;
  return audit;
}

Potential moreau_smooth(const Potential& p, double s, int probe_budget) {
  require(s > 0.0, ErrorCode::InvalidArgument, "moreau_smooth requires s > 0");
  require(probe_budget >= 1, ErrorCode::InvalidArgument,
          "probe budget must be positive");
  const Box box = p.domain;
  const auto base = p.eval;

  auto envelope = [box, base, s, probe_budget](std::span<const double> x) {
    const int n = box.dim;
    auto objective = [&](std::span<const double> y) {
      const double v = base(y);
      if (!std::isfinite(v)) return kInf;
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += (x[i] - y[i]) * (x[i] - y[i]);
      return v + q / s;
    };

    // Starts: the probe point itself (clamped) and the box center.
    std::vector<std::vector<double>> starts;
    std::vector<double> clamped(x.begin(), x.end());
    for (int i = 0; i < n; ++i)
      clamped[i] = std::clamp(clamped[i], box.lo[i], box.hi[i]);
    starts.push_back(clamped);
    std::vector<double> center(n);
    for (int i = 0; i < n; ++i) center[i] = 0.5 * (box.lo[i] + box.hi[i]);
    starts.push_back(center);

    double best = kInf;
    for (auto& y : starts) {
      double cur = objective(y);
      bool converged = false;
      for (int sweep = 0; sweep < probe_budget; ++sweep) {
        const double before = cur;
        for (int i = 0; i < n; ++i) {
          double arg = y[i];
          const double val = golden_min(
              [&](double t) {
                const double keep = y[i];
                y[i] = t;
                const double v = objective(y);
                y[i] = keep;
                return v;
              },
              box.lo[i], box.hi[i], 60, &arg);
          if (val < cur) {
            cur = val;
            y[i] = arg;
          }
        }
        if (before - cur <= 1e-12 * (1.0 + std::fabs(cur))) {
          converged = true;
          break;
        }
      }
      if (!converged && n > 1)
        fail(ErrorCode::NonConvergence,
             "moreau_smooth inner minimization did not settle within budget");
      best = std::min(best, cur);
    }
    return best;
  };

  return Potential{box, envelope, Smoothness::C1};
}

Potential tilt_potential(const Potential& p, std::span<const double> theta) {
  require(static_cast<int>(theta.size()) == p.domain.dim, ErrorCode::DimMismatch,
          "tilt direction dimension mismatch");
  std::vector<double> th(theta.begin(), theta.end());
  const auto base = p.eval;
  auto eval = [base, th](std::span<const double> x) {
    double dot = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) dot += th[i] * x[i];
    const double v = base(x);
    return std::isfinite(v) ? v - dot : v;
  };
  return Potential{p.domain, eval, p.smoothness};
}

Potential translate_potential(const Potential& p, std::span<const double> shift) {
  require(static_cast<int>(shift.size()) == p.domain.dim, ErrorCode::DimMismatch,
          "translation dimension mismatch");
  std::vector<double> sh(shift.begin(), shift.end());
  const auto base = p.eval;
  Box moved = p.domain;
  for (int i = 0; i < moved.dim; ++i) {
    moved.lo[i] += sh[static_cast<std::size_t>(i)];
    moved.hi[i] += sh[static_cast<std::size_t>(i)];
  }
  auto eval = [base, sh](std::span<const double> x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - sh[i];
    return base(y);
  };
  return Potential{moved, eval, p.smoothness};
}

}  // namespace lclab
