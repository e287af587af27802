#ifndef LCLAB_REPORTS_HPP
#define LCLAB_REPORTS_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "core/numerics.hpp"

namespace lclab {

// One verified inequality or identity: both raw sides, the margin, the
// constant in force and the suite-wide best-constant estimate when tracked.
struct VerificationReport {
  std::string inequality_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant_used = kNaN;
  double margin = 0.0;  // rhs - lhs
  double best_constant_estimate = kNaN;
  double tolerance = 0.0;
  std::string inputs_digest;
  bool pass = true;
  // Pinned-constant inequalities and exact identities gate the suite exit
  // status; empirical-constant reports never do.
  bool gating = true;

  static VerificationReport make(std::string id, double lhs, double rhs,
                                 double tolerance, std::string digest,
                                 bool gating = true) {
    VerificationReport r;
    r.inequality_id = std::move(id);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.tolerance = tolerance;
    r.inputs_digest = std::move(digest);
    r.pass = r.margin >= -tolerance;
    r.gating = gating;
    return r;
  }
};

void write_reports_csv(std::span<const VerificationReport> reports, std::ostream& os);
void write_reports_json(std::span<const VerificationReport> reports, std::ostream& os);

std::string reports_csv_string(std::span<const VerificationReport> reports);
std::string reports_json_string(std::span<const VerificationReport> reports);

}  // namespace lclab

#endif
