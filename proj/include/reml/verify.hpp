#ifndef REML_VERIFY_HPP
#define REML_VERIFY_HPP

#include <string>
#include <vector>

#include "reml/model.hpp"

namespace reml {

/// One executable identity: the residual actually measured, the tolerance
/// it must meet, and the verdict.
struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Runs every closed-form identity the library is built on against the
/// given instance: three-route likelihood equality, Py = R^-1 e, the MME-inverse
/// projector identity, the determinant identities, Woodbury, the C-inverse
/// blocks, the error-contrast identities, score vs finite differences and
/// the information-splitting identity. Throws OracleCapExceeded for
/// n > 2000 (the dense oracles refuse beyond that).
std::vector<IdentityCheck> run_identity_suite(const ModelSpec& spec, const ThetaVector& theta);

bool all_passed(const std::vector<IdentityCheck>& checks);

}  // namespace reml

#endif  // REML_VERIFY_HPP
