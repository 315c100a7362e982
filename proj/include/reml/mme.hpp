#ifndef REML_MME_HPP
#define REML_MME_HPP

#include <memory>

#include "reml/ldlt.hpp"
#include "reml/model.hpp"
#include "reml/sparse.hpp"

namespace reml {

/// Henderson's mixed model equations C beta = W'R^-1 y on the H scale
/// (sigma2-free G and R), with
///   C = [X'R^-1X, X'R^-1Z; Z'R^-1X, Z'R^-1Z + G^-1],  W = [X, Z].
/// The LDL^T factorization of C is computed once at assembly and reused by
/// every downstream solve; the system is immutable afterwards, so concurrent
/// solves are safe.
struct MMESystem {
  int n = 0, p = 0, b = 0;
  double sigma2 = 1.0;
  Matrix W;      // n x (p+b)
  Matrix R_inv;  // n x n
  Vector y;
  SparseSymmetric C;
  Vector rhs;  // W'R^-1 y
  double logdet_R = 0.0;
  double logdet_G = 0.0;
  std::shared_ptr<const SymmetricFactorization> factor;

  int order() const { return p + b; }
  double logdet_C() const;
};

/// Solution of the MME: BLUE tau_hat, BLUP u_tilde, residual e and the
/// H-scale projection Py = R^-1 e.
struct MMESolution {
  Vector tau_hat;
  Vector u_tilde;
  Vector e;
  Vector Py;
  double logdet_C = 0.0;
};

/// Blocks of C^-1 partitioned by (X, Z): C^XX = (X'H^-1X)^-1 and friends.
struct CInverseBlocks {
  Matrix xx, xz, zx, zz;
};

/// How many times an MME coefficient matrix has been factorized in this
/// process. Tests use deltas of this counter to pin "one factorization per
/// theta" behaviour.
long mme_factorization_count();

MMESystem assemble(const ModelSpec& spec, const ThetaVector& theta);
MMESolution solve_mme(const MMESystem& sys);
CInverseBlocks c_inverse_blocks(const MMESystem& sys);

/// sigma2 * C^-1, the covariance of (tau_hat, u_tilde - u).
Matrix prediction_variance(const MMESystem& sys, double sigma2);

/// P v on the H scale via one factorized solve:
/// P v = R^-1 (v - W C^-1 W'R^-1 v).
Vector projected_matvec(const MMESystem& sys, const Vector& v);

/// Multi right-hand-side version of projected_matvec (one solve, shared
/// factorization).
Matrix projected_matmat(const MMESystem& sys, const Matrix& v);

}  // namespace reml

#endif  // REML_MME_HPP
