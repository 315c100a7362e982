#include "reml/verify.hpp"

#include <cmath>

#include "reml/contrast.hpp"
#include "reml/errors.hpp"
#include "reml/infomat.hpp"
#include "reml/ldlt.hpp"
#include "reml/likelihood.hpp"
#include "reml/mme.hpp"
#include "reml/projector.hpp"

namespace reml {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void push(std::vector<IdentityCheck>& checks, const std::string& name, double residual,
          double tolerance) {
  checks.push_back({name, residual, tolerance, residual <= tolerance});
}

// Central finite-difference gradient of the production likelihood route,
// with the step shrunk where a coordinate sits near a bound.
Vector fd_gradient(const ModelSpec& spec, const ThetaVector& theta) {
  const int t = spec.n_parameters();
  Vector grad(t);
  const Vector flat = theta.flat();
  for (int i = 0; i < t; ++i) {
    double h = 1e-5 * (1.0 + std::abs(flat[i]));
    if (i == 0 || (spec.variance_scale_g() && i <= spec.g_structure.n_par()))
      h = std::min(h, 0.45 * flat[i]);  // variance coordinates must stay positive
    const int nphi = spec.r_structure.n_par();
    if (i >= t - nphi) {
      const int j = i - (t - nphi);
      h = std::min(h, 0.45 * (spec.r_structure.upper[j] - flat[i]));
      h = std::min(h, 0.45 * (flat[i] - spec.r_structure.lower[j]));
    }
    Vector hi = flat, lo = flat;
    hi[i] += h;
    lo[i] -= h;
    const double f_hi = loglik_via_C(spec, ThetaVector::from_flat(hi, theta.n_gamma)).value;
    const double f_lo = loglik_via_C(spec, ThetaVector::from_flat(lo, theta.n_gamma)).value;
    grad[i] = (f_hi - f_lo) / (2.0 * h);
  }
  return grad;
}

}  // namespace

bool all_passed(const std::vector<IdentityCheck>& checks) {
  for (const IdentityCheck& c : checks)
    if (!c.pass) return false;
  return true;
}

std::vector<IdentityCheck> run_identity_suite(const ModelSpec& spec, const ThetaVector& theta) {
  spec.validate();
  require(spec.n() <= kDenseOracleCap, ErrorCode::OracleCapExceeded,
          "identity suite limited to n <= 2000");
  std::vector<IdentityCheck> checks;
  const int n = spec.n(), p = spec.p();

  // The three closed forms agree.
  const LikelihoodValue la = loglik_via_contrast(spec, theta);
  const LikelihoodValue lb = loglik_via_V(spec, theta);
  const LikelihoodValue lc = loglik_via_C(spec, theta);
  const double lscale = 1.0 + std::abs(lb.value);
  push(checks, "loglik routes: |L2-oracle - V-dense| (relative)",
       std::abs(la.value - lb.value) / lscale, 1e-8);
  push(checks, "loglik routes: |C-factorized - V-dense| (relative)",
       std::abs(lc.value - lb.value) / lscale, 1e-8);

  // Contrast invariance: mix K2 by a deterministic non-orthogonal invertible
  // B, giving a second admissible L2 that is neither orthonormal nor a scalar
  // multiple of the first.
  const Matrix k2 = orthonormal_complement(spec.X);
  Matrix mix = Matrix::Identity(n - p, n - p);
  for (int i = 0; i < n - p; ++i) mix(i, i) = 1.0 + 0.5 * (i % 3);
  for (int i = 0; i + 1 < n - p; ++i) mix(i + 1, i) = 0.3;
  const LikelihoodValue la_mixed = loglik_via_contrast(spec, theta, Matrix(k2 * mix));
  push(checks, "loglik invariant to the choice of L2 (relative)",
       std::abs(la_mixed.value - la.value) / lscale, 1e-8);

  // H-scale pieces shared by several identities.
  const StandardBlocks blocks = standard_blocks(spec, theta);
  const MMESystem sys = assemble(spec, theta);
  const MMESolution sol = solve_mme(sys);

  SymmetricFactorization hf = ldlt_factor(blocks.H);
  require(hf.positive_definite(), ErrorCode::NotPositiveDefinite, "H not positive definite");
  const Matrix h_inv = hf.solve(Matrix(Matrix::Identity(n, n)));
  const Matrix hinv_x = hf.solve(spec.X);
  SymmetricFactorization xhx = ldlt_factor(Matrix(spec.X.transpose() * hinv_x));
  require(xhx.positive_definite(), ErrorCode::NotPositiveDefinite,
          "X'H^-1X not positive definite");
  const Matrix p_h = h_inv - hinv_x * xhx.solve(Matrix(hinv_x.transpose()));

  // Py = R^-1 e, with Py evaluated through the dense projector.
  const Vector py_dense = p_h * spec.y;
  push(checks, "Py = R^-1 e (H scale)", (py_dense - sol.Py).cwiseAbs().maxCoeff(),
       1e-9 * (1.0 + sol.Py.cwiseAbs().maxCoeff()));

  // The two projector forms: H^-1 - H^-1X(X'H^-1X)^-1X'H^-1 = R^-1 - R^-1 W C^-1 W'R^-1.
  const Matrix wtr = sys.W.transpose() * sys.R_inv;
  const Matrix p_mme = sys.R_inv - wtr.transpose() * sys.factor->solve(wtr);
  push(checks, "projector from the MME inverse (H scale)", max_abs(p_h - p_mme), 1e-8);

  // Woodbury H^-1 against the direct inverse.
  push(checks, "Woodbury H^-1", max_abs(blocks.H_inv - h_inv), n <= 100 ? 1e-10 : 1e-9);

  // Determinant identities.
  const double logdet_H = hf.log_determinant();
  const double logdet_XHX = xhx.log_determinant();
  push(checks, "determinants: log|C|+log|R|+log|G| = log|H|+log|X'H^-1X|",
       std::abs(sol.logdet_C + sys.logdet_R + sys.logdet_G - logdet_H - logdet_XHX),
       1e-8 * (1.0 + std::abs(logdet_H) + std::abs(logdet_XHX)));

  if (spec.b() > 0) {
    SymmetricFactorization zrz = ldlt_factor(
        Matrix(blocks.G_inv + spec.Z.transpose() * blocks.R_inv * spec.Z));
    require(zrz.positive_definite(), ErrorCode::NotPositiveDefinite,
            "G^-1 + Z'R^-1Z not positive definite");
    push(checks, "determinants: log|R|+log|G^-1+Z'R^-1Z| = log|H|+log|G^-1|",
         std::abs(sys.logdet_R + zrz.log_determinant() - logdet_H - (-sys.logdet_G)),
         1e-8 * (1.0 + std::abs(logdet_H)));
  }

  {
    const Matrix v = variance_value(spec, theta);
    SymmetricFactorization vf = ldlt_factor(v);
    const Matrix vinv_x = vf.solve(spec.X);
    SymmetricFactorization xvx = ldlt_factor(Matrix(spec.X.transpose() * vinv_x));
    push(checks, "determinants: log|V|+log|X'V^-1X| = (n-p)log(sigma2)+log|H|+log|X'H^-1X|",
         std::abs(vf.log_determinant() + xvx.log_determinant() -
                  ((n - p) * std::log(theta.sigma2) + logdet_H + logdet_XHX)),
         1e-8 * (1.0 + std::abs(logdet_H)));
  }

  // C^-1 blocks: C^XX = (X'H^-1X)^-1 in particular.
  {
    const CInverseBlocks cb = c_inverse_blocks(sys);
    const Matrix cxx_expected = xhx.solve(Matrix(Matrix::Identity(p, p)));
    push(checks, "C^XX = (X'H^-1X)^-1", max_abs(cb.xx - cxx_expected), 1e-8);
    const Matrix c_dense = sys.C.to_dense();
    SymmetricFactorization cf = ldlt_factor(c_dense);
    const Matrix cinv = cf.solve(Matrix(Matrix::Identity(sys.order(), sys.order())));
    Matrix cinv_blocks(sys.order(), sys.order());
    cinv_blocks.topLeftCorner(p, p) = cb.xx;
    cinv_blocks.topRightCorner(p, sys.b) = cb.xz;
    cinv_blocks.bottomLeftCorner(sys.b, p) = cb.zx;
    cinv_blocks.bottomRightCorner(sys.b, sys.b) = cb.zz;
    push(checks, "assembled C^-1 blocks vs dense inverse",
         max_abs(cinv_blocks - cinv), 1e-8 * (1.0 + max_abs(cinv)));
  }

  // Error-contrast identities.
  {
    const ErrorContrast contrast = build_contrast(spec.X);
    push(checks, "contrast: L1'X = I", max_abs(contrast.L1.transpose() * spec.X -
                                                Matrix::Identity(p, p)), 1e-10);
    push(checks, "contrast: L2'X = 0", max_abs(contrast.L2.transpose() * spec.X), 1e-10);
    push(checks, "contrast: K2'K2 = I",
         max_abs(k2.transpose() * k2 - Matrix::Identity(n - p, n - p)), 1e-10);
    const Matrix i_minus_px = Matrix::Identity(n, n) - projector(spec.X);
    push(checks, "contrast: K2 K2' = I - P_X", max_abs(k2 * k2.transpose() - i_minus_px), 1e-10);
    push(checks, "contrast: L2(L2'L2)^-1 L2' = I - P_X",
         max_abs(residual_projector_via_l2(contrast.L2) - i_minus_px), 1e-10);

    const Matrix v = variance_value(spec, theta);
    const Matrix pw = weighted_projector(v, spec.X, contrast.L2);
    push(checks, "projector: P X = 0", max_abs(pw * spec.X), 1e-9);
    push(checks, "projector: P V P = P", max_abs(pw * v * pw - pw), 1e-9 * (1.0 + max_abs(pw)));
    SymmetricFactorization vf = ldlt_factor(v);
    SymmetricFactorization xvx = ldlt_factor(Matrix(spec.X.transpose() * vf.solve(spec.X)));
    const Matrix lhs = xvx.solve(Matrix(Matrix::Identity(p, p)));
    const Matrix l1v = contrast.L1.transpose() * v;
    SymmetricFactorization l2vl2 = ldlt_factor(Matrix(contrast.L2.transpose() * v * contrast.L2));
    const Matrix rhs = l1v * contrast.L1 -
                       l1v * contrast.L2 * l2vl2.solve(Matrix(contrast.L2.transpose() * v * contrast.L1));
    push(checks, "projector: (X'V^-1X)^-1 = L1'VL1 - L1'VL2(L2'VL2)^-1L2'VL1",
         max_abs(lhs - rhs), 1e-8 * (1.0 + max_abs(lhs)));
  }

  // Score against central finite differences of the production route.
  {
    const Vector s = score(spec, theta);
    const Vector fd = fd_gradient(spec, theta);
    double rel = 0.0;
    for (int i = 0; i < s.size(); ++i)
      rel = std::max(rel, std::abs(s[i] - fd[i]) / (1.0 + std::abs(fd[i])));
    push(checks, "score vs finite-difference gradient (relative)", rel, 1e-5);
  }

  // Table 1 consistency: (I_O + I)/2 = I_A + I_Z entrywise.
  {
    const DerivativeBundle bundle = derivative_bundle(spec, theta);
    push(checks, "(I_O + I)/2 = I_A + I_Z",
         max_abs(0.5 * (bundle.observed + bundle.fisher) - bundle.average - bundle.splitting),
         1e-9 * (1.0 + max_abs(bundle.average)));
    push(checks, "fast I_A = dense I_A",
         max_abs(average_information_fast(spec, theta) - bundle.average),
         1e-8 * (1.0 + max_abs(bundle.average)));
  }

  return checks;
}

}  // namespace reml
