#ifndef REML_ERRORS_HPP
#define REML_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace reml {

/// Machine-readable failure classes. Every exception thrown by the library
/// carries one of these so callers (and the CLI) can map failures to exit
/// codes without string matching.
enum class ErrorCode {
  ZeroPivot,
  NotPositiveDefinite,
  DimensionMismatch,
  RankDeficient,
  InadmissibleParameter,
  IndexOutOfRange,
  SingularInformation,
  MaxIterations,
  BoundaryStall,
  ParseError,
  UnknownColumn,
  OracleCapExceeded,
  NumericalError,
};

const char* error_code_name(ErrorCode code);

/// Exit-code class for the CLI: 1 = input error, 2 = non-convergence,
/// 3 = numerical failure.
int error_exit_class(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace reml

#endif  // REML_ERRORS_HPP
