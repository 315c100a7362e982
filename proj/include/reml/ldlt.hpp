#ifndef REML_LDLT_HPP
#define REML_LDLT_HPP

#include <vector>

#include "reml/sparse.hpp"

namespace reml {

enum class OrderingChoice { MinimumDegree, Natural };

/// Result of an LDL^T factorization of a symmetric matrix, dense or sparse.
/// With perm the eliminated-index sequence and P the matrix P(perm[k], k) = 1,
/// the factors satisfy P^T A P = L D L^T with L unit lower triangular.
/// Immutable after construction; solves may run concurrently against it.
class SymmetricFactorization {
 public:
  int order() const { return n_; }
  bool positive_definite() const { return positive_definite_; }
  bool sparse() const { return sparse_; }
  const std::vector<int>& permutation() const { return perm_; }
  const Vector& pivots() const { return d_; }

  /// Number of stored off-diagonal entries of L (sparse path).
  int factor_nnz() const;

  /// Solve A X = B for one or many right-hand sides.
  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;

  /// log|A| = sum log d_ii. Requires all pivots positive.
  double log_determinant() const;

  /// Dense copy of the unit lower factor (order kept small by callers).
  Matrix unit_lower() const;

  /// P^T A P rebuilt from the factors, for verification.
  Matrix reconstruct_permuted() const;

 private:
  friend SymmetricFactorization ldlt_factor(const Matrix&);
  friend SymmetricFactorization ldlt_factor(const SparseSymmetric&, OrderingChoice);
  SymmetricFactorization() = default;

  int n_ = 0;
  bool sparse_ = false;
  bool positive_definite_ = false;
  std::vector<int> perm_;      // perm_[k] = original index of pivot k
  Vector d_;

  Matrix dense_l_;             // dense path: unit lower factor

  std::vector<int> l_colptr_;  // sparse path: strictly-lower CSC factor
  std::vector<int> l_rowind_;
  std::vector<double> l_values_;
};

/// Dense LDL^T without pivoting. Throws ZeroPivot when a pivot falls below
/// 1e-13 times the largest |a_jj|.
SymmetricFactorization ldlt_factor(const Matrix& a);

/// Sparse LDL^T: fill-reducing ordering, elimination-tree symbolic pass,
/// then an up-looking numeric pass. Same pivot rule as the dense path.
SymmetricFactorization ldlt_factor(const SparseSymmetric& a,
                                   OrderingChoice ordering = OrderingChoice::MinimumDegree);

/// log|A| straight from a factorization (all pivots must be positive).
double logdet(const SymmetricFactorization& f);

}  // namespace reml

#endif  // REML_LDLT_HPP
