#include "reml/mme.hpp"

#include <atomic>

#include "reml/errors.hpp"

namespace reml {

namespace {
std::atomic<long> factorization_count{0};
}

long mme_factorization_count() { return factorization_count.load(); }

double MMESystem::logdet_C() const {
  require(factor != nullptr, ErrorCode::ZeroPivot, "MME system has no factorization");
  return factor->log_determinant();
}

MMESystem assemble(const ModelSpec& spec, const ThetaVector& theta) {
  spec.validate();
  MMESystem sys;
  sys.n = spec.n();
  sys.p = spec.p();
  sys.b = spec.b();
  sys.sigma2 = theta.sigma2;
  sys.y = spec.y;

  sys.R_inv = spec.r_structure.inverse(theta.phi());
  sys.logdet_R = spec.r_structure.log_determinant(theta.phi());
  sys.logdet_G = g_ratio_logdet(spec, theta);

  sys.W.resize(sys.n, sys.p + sys.b);
  sys.W.leftCols(sys.p) = spec.X;
  if (sys.b > 0) sys.W.rightCols(sys.b) = spec.Z;

  // Assemble the dense coefficient blocks, then keep only the structural
  // nonzeros; indicator Z-blocks leave Z'R^-1Z (near-)diagonal.
  const Matrix wtri = sys.W.transpose() * sys.R_inv;
  Matrix c = wtri * sys.W;
  if (sys.b > 0) {
    const Matrix g = g_ratio_matrix(spec, theta);
    SymmetricFactorization gf = ldlt_factor(g);
    require(gf.positive_definite(), ErrorCode::NotPositiveDefinite, "G not positive definite");
    c.bottomRightCorner(sys.b, sys.b) += gf.solve(Matrix(Matrix::Identity(sys.b, sys.b)));
  }
  sys.C = SparseSymmetric::from_dense(c);
  sys.rhs = wtri * spec.y;

  auto f = std::make_shared<SymmetricFactorization>(ldlt_factor(sys.C));
  factorization_count.fetch_add(1);
  require(f->positive_definite(), ErrorCode::NotPositiveDefinite,
          "MME coefficient matrix not positive definite");
  sys.factor = std::move(f);
  return sys;
}

MMESolution solve_mme(const MMESystem& sys) {
  require(sys.factor != nullptr, ErrorCode::ZeroPivot, "MME system has no factorization");
  MMESolution sol;
  const Vector beta = sys.factor->solve(sys.rhs);
  sol.tau_hat = beta.head(sys.p);
  sol.u_tilde = beta.tail(sys.b);
  sol.e = sys.y - sys.W * beta;
  sol.Py = sys.R_inv * sol.e;
  sol.logdet_C = sys.factor->log_determinant();
  return sol;
}

CInverseBlocks c_inverse_blocks(const MMESystem& sys) {
  require(sys.factor != nullptr, ErrorCode::ZeroPivot, "MME system has no factorization");
  const int m = sys.order();
  const Matrix cinv = sys.factor->solve(Matrix(Matrix::Identity(m, m)));
  CInverseBlocks blocks;
  blocks.xx = cinv.topLeftCorner(sys.p, sys.p);
  blocks.xz = cinv.topRightCorner(sys.p, sys.b);
  blocks.zx = cinv.bottomLeftCorner(sys.b, sys.p);
  blocks.zz = cinv.bottomRightCorner(sys.b, sys.b);
  return blocks;
}

Matrix prediction_variance(const MMESystem& sys, double sigma2) {
  require(sys.factor != nullptr, ErrorCode::ZeroPivot, "MME system has no factorization");
  const int m = sys.order();
  return sigma2 * sys.factor->solve(Matrix(Matrix::Identity(m, m)));
}

Vector projected_matvec(const MMESystem& sys, const Vector& v) {
  require(v.size() == sys.n, ErrorCode::DimensionMismatch, "vector length != n");
  const Vector rv = sys.R_inv * v;
  const Vector beta = sys.factor->solve(Vector(sys.W.transpose() * rv));
  return sys.R_inv * (v - sys.W * beta);
}

Matrix projected_matmat(const MMESystem& sys, const Matrix& v) {
  require(v.rows() == sys.n, ErrorCode::DimensionMismatch, "matrix row count != n");
  const Matrix rv = sys.R_inv * v;
  const Matrix beta = sys.factor->solve(Matrix(sys.W.transpose() * rv));
  return sys.R_inv * (v - sys.W * beta);
}

}  // namespace reml
