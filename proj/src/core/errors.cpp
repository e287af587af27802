#include "core/errors.hpp"

namespace lclab {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConvexityAuditFailed: return "ConvexityAuditFailed";
    case ErrorCode::MassUnderflow: return "MassUnderflow";
    case ErrorCode::ZeroMassSlice: return "ZeroMassSlice";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorCode::AbsoluteContinuityViolated: return "AbsoluteContinuityViolated";
    case ErrorCode::UndefinedPrefix: return "UndefinedPrefix";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DegenerateHull: return "DegenerateHull";
    case ErrorCode::NotBarycentered: return "NotBarycentered";
    case ErrorCode::ComponentNotMartingale: return "ComponentNotMartingale";
    case ErrorCode::NotMartingaleIncrements: return "NotMartingaleIncrements";
    case ErrorCode::NotIsotropic: return "NotIsotropic";
    case ErrorCode::IntegrabilityFailed: return "IntegrabilityFailed";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonLipschitzOnGrid: return "NonLipschitzOnGrid";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace lclab
