#include "reml/errors.hpp"

namespace reml {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroPivot: return "ZeroPivot";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InadmissibleParameter: return "InadmissibleParameter";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::BoundaryStall: return "BoundaryStall";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::OracleCapExceeded: return "OracleCapExceeded";
    case ErrorCode::NumericalError: return "NumericalError";
  }
  return "Unknown";
}

int error_exit_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::UnknownColumn:
    case ErrorCode::RankDeficient:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::OracleCapExceeded:
      return 1;
    case ErrorCode::MaxIterations:
    case ErrorCode::BoundaryStall:
      return 2;
    default:
      return 3;
  }
}

}  // namespace reml
