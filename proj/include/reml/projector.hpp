#ifndef REML_PROJECTOR_HPP
#define REML_PROJECTOR_HPP

#include "reml/sparse.hpp"

namespace reml {

/// Numerical column rank of X via column-pivoted QR of X^T X.
int column_rank(const Matrix& x);

/// Orthogonal projector onto the column space of X, X (X^T X)^{-1} X^T.
/// Throws RankDeficient when X^T X is numerically singular.
Matrix projector(const Matrix& x);

/// Orthonormal basis K2 of the complement of col(X): K2^T K2 = I,
/// K2^T X = 0, K2 K2^T = I - P_X. Built from the eigendecomposition of
/// I - P_X, keeping eigenvectors with eigenvalue > 1/2.
Matrix orthonormal_complement(const Matrix& x);

}  // namespace reml

#endif  // REML_PROJECTOR_HPP
