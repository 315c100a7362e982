#include "reml/infomat.hpp"

#include <vector>

#include "reml/errors.hpp"
#include "reml/ldlt.hpp"
#include "reml/likelihood.hpp"

namespace reml {

namespace {

/// Shared dense-path work: the V-scale projector, Py, every first
/// derivative and its P-product.
struct DenseWork {
  int t = 0;
  Matrix P;
  Vector Py;
  std::vector<Matrix> vdot;    // Vdot_i
  std::vector<Matrix> pvdot;   // P Vdot_i
  std::vector<Vector> eta;     // Vdot_i P y
  std::vector<Vector> peta;    // P Vdot_i P y
};

DenseWork dense_work(const ModelSpec& spec, const ThetaVector& theta) {
  spec.validate();
  require(spec.n() <= kDenseOracleCap, ErrorCode::OracleCapExceeded,
          "dense oracle limited to n <= 2000");
  DenseWork w;
  w.t = spec.n_parameters();
  w.P = dense_projector(spec, theta);
  w.Py = w.P * spec.y;
  w.vdot.reserve(w.t);
  w.pvdot.reserve(w.t);
  for (int i = 0; i < w.t; ++i) {
    w.vdot.push_back(variance_first_derivative(spec, theta, i));
    w.pvdot.push_back(w.P * w.vdot.back());
    w.eta.push_back(w.vdot.back() * w.Py);
    w.peta.push_back(w.P * w.eta.back());
  }
  return w;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Vector score_from(const DenseWork& w) {
  Vector s(w.t);
  for (int i = 0; i < w.t; ++i)
    s[i] = -0.5 * (w.pvdot[i].trace() - w.Py.dot(w.eta[i]));
  return s;
}

Matrix fisher_from(const DenseWork& w) {
  Matrix f(w.t, w.t);
  for (int i = 0; i < w.t; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = 0.5 * w.pvdot[i].cwiseProduct(w.pvdot[j].transpose()).sum();
      f(i, j) = v;
      f(j, i) = v;
    }
  return f;
}

Matrix average_from(const DenseWork& w) {
  Matrix a(w.t, w.t);
  for (int i = 0; i < w.t; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = 0.5 * w.eta[i].dot(w.peta[j]);
      a(i, j) = v;
      a(j, i) = v;
    }
  return symmetrized(a);
}

Matrix observed_from(const ModelSpec& spec, const ThetaVector& theta, const DenseWork& w) {
  Matrix o(w.t, w.t);
  for (int i = 0; i < w.t; ++i)
    for (int j = 0; j <= i; ++j) {
      const Matrix vddot = variance_second_derivative(spec, theta, i, j);
      const double tr_pvddot = w.P.cwiseProduct(vddot).sum();
      const double tr_pvpv = w.pvdot[i].cwiseProduct(w.pvdot[j].transpose()).sum();
      const double quad2 = w.eta[i].dot(w.peta[j]);
      const double quad_dd = w.Py.dot(vddot * w.Py);
      const double v = 0.5 * (tr_pvddot - tr_pvpv + 2.0 * quad2 - quad_dd);
      o(i, j) = v;
      o(j, i) = v;
    }
  return o;
}

Matrix splitting_from(const ModelSpec& spec, const ThetaVector& theta, const DenseWork& w) {
  Matrix z(w.t, w.t);
  for (int i = 0; i < w.t; ++i)
    for (int j = 0; j <= i; ++j) {
      const Matrix vddot = variance_second_derivative(spec, theta, i, j);
      const double v = 0.25 * (w.P.cwiseProduct(vddot).sum() - w.Py.dot(vddot * w.Py));
      z(i, j) = v;
      z(j, i) = v;
    }
  return z;
}

}  // namespace

Matrix dense_projector(const ModelSpec& spec, const ThetaVector& theta) {
  spec.validate();
  require(spec.n() <= kDenseOracleCap, ErrorCode::OracleCapExceeded,
          "dense oracle limited to n <= 2000");
  const Matrix v = variance_value(spec, theta);
  SymmetricFactorization vf = ldlt_factor(v);
  require(vf.positive_definite(), ErrorCode::NotPositiveDefinite, "V not positive definite");
  const Matrix vinv = vf.solve(Matrix(Matrix::Identity(spec.n(), spec.n())));
  const Matrix vinv_x = vf.solve(spec.X);
  SymmetricFactorization xvx = ldlt_factor(Matrix(spec.X.transpose() * vinv_x));
  require(xvx.positive_definite(), ErrorCode::NotPositiveDefinite,
          "X'V^-1X not positive definite");
  return symmetrized(vinv - vinv_x * xvx.solve(Matrix(vinv_x.transpose())));
}

Vector score(const ModelSpec& spec, const ThetaVector& theta) {
  return score_from(dense_work(spec, theta));
}

Matrix observed_information(const ModelSpec& spec, const ThetaVector& theta) {
  const DenseWork w = dense_work(spec, theta);
  return observed_from(spec, theta, w);
}

Matrix fisher_information(const ModelSpec& spec, const ThetaVector& theta) {
  return fisher_from(dense_work(spec, theta));
}

Matrix average_information_dense(const ModelSpec& spec, const ThetaVector& theta) {
  return average_from(dense_work(spec, theta));
}

Matrix splitting_residual(const ModelSpec& spec, const ThetaVector& theta) {
  const DenseWork w = dense_work(spec, theta);
  return splitting_from(spec, theta, w);
}

DerivativeBundle derivative_bundle(const ModelSpec& spec, const ThetaVector& theta) {
  const DenseWork w = dense_work(spec, theta);
  DerivativeBundle bundle;
  bundle.score = score_from(w);
  bundle.observed = observed_from(spec, theta, w);
  bundle.fisher = fisher_from(w);
  bundle.average = average_from(w);
  bundle.splitting = splitting_from(spec, theta, w);
  return bundle;
}

FastDerivatives fast_derivatives(const ModelSpec& spec, const ThetaVector& theta) {
  return fast_derivatives(spec, theta, assemble(spec, theta));
}

FastDerivatives fast_derivatives(const ModelSpec& spec, const ThetaVector& theta,
                                 const MMESystem& sys) {
  const int t = spec.n_parameters();
  const MMESolution sol = solve_mme(sys);
  const Vector xi = sol.Py / theta.sigma2;  // P_V y = R^-1 e / sigma2

  FastDerivatives out;
  out.loglik = loglik_via_C(sys).value;
  out.score.resize(t);

  Matrix y_mat(sys.n, t);  // Y = [Vdot_1 xi, ..., Vdot_t xi]
  for (int i = 0; i < t; ++i) {
    const Matrix vdot = variance_first_derivative(spec, theta, i);
    y_mat.col(i) = vdot * xi;

    // tr(P_H Vdot) = tr(R^-1 Vdot) - tr(C^-1 W'R^-1 Vdot R^-1 W).
    const Matrix rv = sys.R_inv * vdot;
    const Matrix m = sys.W.transpose() * rv * sys.R_inv * sys.W;
    const double tr_ph_vdot = rv.trace() - sys.factor->solve(m).trace();
    out.score[i] = -0.5 * (tr_ph_vdot / theta.sigma2 - xi.dot(y_mat.col(i)));
  }

  // Xi = P_V Y via one multi-RHS solve against the cached factorization.
  const Matrix xi_mat = projected_matmat(sys, y_mat) / theta.sigma2;
  out.average = symmetrized(0.5 * (y_mat.transpose() * xi_mat));
  return out;
}

Matrix average_information_fast(const ModelSpec& spec, const ThetaVector& theta) {
  return fast_derivatives(spec, theta).average;
}

Vector score_fast(const ModelSpec& spec, const ThetaVector& theta) {
  return fast_derivatives(spec, theta).score;
}

}  // namespace reml
