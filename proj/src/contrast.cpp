#include "reml/contrast.hpp"

#include <Eigen/LU>

#include "reml/errors.hpp"
#include "reml/ldlt.hpp"
#include "reml/projector.hpp"

namespace reml {

ErrorContrast build_contrast(const Matrix& x) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  require(p >= 1 && p < n, ErrorCode::RankDeficient, "need 1 <= p < n for a contrast");
  require(column_rank(x) == p, ErrorCode::RankDeficient, "X must have full column rank");

  const Matrix k2 = orthonormal_complement(x);
  Matrix m(n, n);
  m.leftCols(p) = x;
  m.rightCols(n - p) = k2;

  Eigen::PartialPivLU<Matrix> lu(m);
  // [X, K2] is nonsingular by construction; L' = [X, K2]^-1, so L = M^-T.
  const Matrix l = lu.inverse().transpose();

  ErrorContrast contrast;
  contrast.n = n;
  contrast.p = p;
  contrast.L1 = l.leftCols(p);
  contrast.L2 = l.rightCols(n - p);
  return contrast;
}

Matrix residual_projector_via_l2(const Matrix& l2) {
  const int q = static_cast<int>(l2.cols());
  require(q >= 1, ErrorCode::RankDeficient, "L2 must have at least one column");
  require(column_rank(l2) == q, ErrorCode::RankDeficient, "L2 must have full column rank");
  SymmetricFactorization f = ldlt_factor(Matrix(l2.transpose() * l2));
  return l2 * f.solve(Matrix(l2.transpose()));
}

Matrix weighted_projector(const Matrix& v, const Matrix& x, const Matrix& l2) {
  require(v.rows() == v.cols(), ErrorCode::DimensionMismatch, "V must be square");
  require(x.rows() == v.rows() && l2.rows() == v.rows(), ErrorCode::DimensionMismatch,
          "X and L2 must match V's dimension");

  SymmetricFactorization inner = ldlt_factor(Matrix(l2.transpose() * v * l2));
  require(inner.positive_definite(), ErrorCode::NotPositiveDefinite,
          "L2'VL2 not positive definite");
  const Matrix p_contrast = l2 * inner.solve(Matrix(l2.transpose()));

  SymmetricFactorization vf = ldlt_factor(v);
  require(vf.positive_definite(), ErrorCode::NotPositiveDefinite, "V not positive definite");
  const Matrix vinv_x = vf.solve(x);
  SymmetricFactorization xvx = ldlt_factor(Matrix(x.transpose() * vinv_x));
  require(xvx.positive_definite(), ErrorCode::NotPositiveDefinite,
          "X'V^-1X not positive definite");
  const Matrix p_direct =
      vf.solve(Matrix(Matrix::Identity(v.rows(), v.cols()))) - vinv_x * xvx.solve(Matrix(vinv_x.transpose()));

  const double resid = (p_contrast - p_direct).cwiseAbs().maxCoeff();
  const double scale = 1.0 + p_direct.cwiseAbs().maxCoeff();
  require(resid <= 1e-9 * scale, ErrorCode::NumericalError,
          "weighted projector forms disagree beyond tolerance");
  return p_contrast;
}

}  // namespace reml
