#ifndef REML_CONTRAST_HPP
#define REML_CONTRAST_HPP

#include "reml/sparse.hpp"

namespace reml {

/// Error-contrast transform L = [L1, L2] for a full-column-rank X:
/// L1'X = I_p and L2'X = 0, with [X, K2] nonsingular. L2'y carries the
/// restricted likelihood; L1'y carries the fixed effects.
struct ErrorContrast {
  Matrix L1;  // n x p
  Matrix L2;  // n x (n - p)
  int n = 0;
  int p = 0;
};

/// Builds L from L' = [X, K2 B']^-1 with B = I and K2 an orthonormal basis
/// of the complement of col(X). Throws RankDeficient when X is not full
/// column rank or p >= n.
ErrorContrast build_contrast(const Matrix& x);

/// L2 (L2'L2)^-1 L2', which equals I - P_X for any full-rank L2 with
/// L2'X = 0.
Matrix residual_projector_via_l2(const Matrix& l2);

/// The weighted projector L2 (L2'VL2)^-1 L2' for SPD V. Also evaluates the
/// direct form V^-1 - V^-1 X (X'V^-1 X)^-1 X'V^-1 and checks the two agree
/// to 1e-9 before returning their common value.
Matrix weighted_projector(const Matrix& v, const Matrix& x, const Matrix& l2);

}  // namespace reml

#endif  // REML_CONTRAST_HPP
