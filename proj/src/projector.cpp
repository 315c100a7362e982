#include "reml/projector.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "reml/errors.hpp"

namespace reml {

int column_rank(const Matrix& x) {
  const Matrix xtx = x.transpose() * x;
  Eigen::ColPivHouseholderQR<Matrix> qr(xtx);
  qr.setThreshold(1e-12);
  return static_cast<int>(qr.rank());
}

Matrix projector(const Matrix& x) {
  require(x.rows() >= 1 && x.cols() >= 1, ErrorCode::DimensionMismatch,
          "projector: empty design matrix");
  const Matrix xtx = x.transpose() * x;
  Eigen::ColPivHouseholderQR<Matrix> qr(xtx);
  qr.setThreshold(1e-12);
  require(qr.rank() == x.cols(), ErrorCode::RankDeficient,
          "projector: X^T X numerically singular (rank " +
              std::to_string(qr.rank()) + " of " + std::to_string(x.cols()) + ")");
  return x * qr.solve(x.transpose());
}

Matrix orthonormal_complement(const Matrix& x) {
  const auto n = x.rows();
  const auto p = x.cols();
  require(p < n, ErrorCode::RankDeficient,
          "orthonormal_complement: need p < n");
  const Matrix residual = Matrix::Identity(n, n) - projector(x);
  Eigen::SelfAdjointEigenSolver<Matrix> es(residual);
  require(es.info() == Eigen::Success, ErrorCode::NumericalError,
          "orthonormal_complement: eigendecomposition failed");
  // I - P_X has eigenvalues 0 (multiplicity p) and 1 (multiplicity n - p).
  Matrix k2(n, n - p);
  Eigen::Index taken = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (es.eigenvalues()(i) > 0.5) {
      require(taken < n - p, ErrorCode::RankDeficient,
              "orthonormal_complement: unexpected eigenvalue multiplicity");
      k2.col(taken++) = es.eigenvectors().col(i);
    }
  }
  require(taken == n - p, ErrorCode::RankDeficient,
          "orthonormal_complement: complement dimension mismatch");
  return k2;
}

}  // namespace reml
