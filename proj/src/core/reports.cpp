#include "core/reports.hpp"

#include <ostream>
#include <sstream>

namespace lclab {

namespace {
void csv_row(std::ostream& os, const VerificationReport& r) {
  os << r.inequality_id << "," << format_g17(r.lhs) << "," << format_g17(r.rhs)
     << "," << format_g17(r.constant_used) << "," << format_g17(r.margin) << ","
     << format_g17(r.best_constant_estimate) << "," << format_g17(r.tolerance)
     << "," << (r.pass ? "PASS" : "FAIL") << "," << r.inputs_digest << "\n";
}

void json_escape(std::ostream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    if (c == '"' || c == '\\') os << '\\';
    os << c;
  }
  os << '"';
}

void json_number(std::ostream& os, double v) {
  // JSON has no inf/nan literals; report them as strings
  if (std::isfinite(v))
    os << format_g17(v);
  else
    os << '"' << format_g17(v) << '"';
}
}  // namespace

void write_reports_csv(std::span<const VerificationReport> reports, std::ostream& os) {
  os << "inequality_id,lhs,rhs,constant_used,margin,best_constant_estimate,"
        "tolerance,status,inputs_digest\n";
  for (const auto& r : reports) csv_row(os, r);
}

void write_reports_json(std::span<const VerificationReport> reports, std::ostream& os) {
  os << "[\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    os << "  {\"inequality_id\": ";
    json_escape(os, r.inequality_id);
    os << ", \"lhs\": ";
    json_number(os, r.lhs);
    os << ", \"rhs\": ";
    json_number(os, r.rhs);
    os << ", \"constant_used\": ";
    json_number(os, r.constant_used);
    os << ", \"margin\": ";
    json_number(os, r.margin);
    os << ", \"best_constant_estimate\": ";
    json_number(os, r.best_constant_estimate);
    os << ", \"tolerance\": ";
    json_number(os, r.tolerance);
    os << ", \"status\": \"" << (r.pass ? "PASS" : "FAIL") << "\"";
    os << ", \"inputs_digest\": ";
    json_escape(os, r.inputs_digest);
    os << "}" << (i + 1 < reports.size() ? "," : "") << "\n";
  }
  os << "]\n";
}

std::string reports_csv_string(std::span<const VerificationReport> reports) {
  std::ostringstream os;
  write_reports_csv(reports, os);
  return os.str();
}

std::string reports_json_string(std::span<const VerificationReport> reports) {
  std::ostringstream os;
  write_reports_json(reports, os);
  return os.str();
}

}  // namespace lclab
