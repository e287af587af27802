#ifndef LCLAB_ERRORS_HPP
#define LCLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lclab {

enum class ErrorCode {
  InvalidArgument,
  ConvexityAuditFailed,
  MassUnderflow,
  ZeroMassSlice,
  DimMismatch,
  DegenerateJacobian,
  AbsoluteContinuityViolated,
  UndefinedPrefix,
  NotPositiveDefinite,
  DegenerateHull,
  NotBarycentered,
  ComponentNotMartingale,
  NotMartingaleIncrements,
  NotIsotropic,
  IntegrabilityFailed,
  NonConvergence,
  NonLipschitzOnGrid,
  ConfigInvalid,
  IoError,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace lclab

#endif
