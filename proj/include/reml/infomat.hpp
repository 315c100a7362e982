#ifndef REML_INFOMAT_HPP
#define REML_INFOMAT_HPP

#include "reml/mme.hpp"
#include "reml/model.hpp"

namespace reml {

/// Score and the information matrices of the restricted log-likelihood,
/// all with respect to the full theta = (sigma2; kappa) coordinates:
///   score_i     = -1/2 { tr(P Vdot_i) - y'P Vdot_i P y }
///   observed_ij =  1/2 { tr(P Vddot_ij) - tr(P Vdot_i P Vdot_j)
///                        + 2 y'P Vdot_i P Vdot_j P y - y'P Vddot_ij P y }
///   fisher_ij   =  1/2 tr(P Vdot_i P Vdot_j)
///   average_ij  =  1/2 y'P Vdot_i P Vdot_j P y
///   splitting   = (observed + fisher)/2 - average
///               =  1/4 { tr(P Vddot_ij) - y'P Vddot_ij P y }
/// where P = V^-1 - V^-1X (X'V^-1X)^-1 X'V^-1 on the V scale.
struct DerivativeBundle {
  Vector score;
  Matrix observed;
  Matrix fisher;
  Matrix average;
  Matrix splitting;
};

/// Dense V-scale projector P (oracle path; n capped at the dense limit).
Matrix dense_projector(const ModelSpec& spec, const ThetaVector& theta);

Vector score(const ModelSpec& spec, const ThetaVector& theta);
Matrix observed_information(const ModelSpec& spec, const ThetaVector& theta);
Matrix fisher_information(const ModelSpec& spec, const ThetaVector& theta);
Matrix average_information_dense(const ModelSpec& spec, const ThetaVector& theta);
Matrix splitting_residual(const ModelSpec& spec, const ThetaVector& theta);

/// All five objects from one shared dense evaluation.
DerivativeBundle derivative_bundle(const ModelSpec& spec, const ThetaVector& theta);

/// Factorized-path results: one MME assembly (hence one factorization of C)
/// produces the likelihood, the score and the average information.
struct FastDerivatives {
  double loglik = 0.0;
  Vector score;
  Matrix average;
};

FastDerivatives fast_derivatives(const ModelSpec& spec, const ThetaVector& theta);
FastDerivatives fast_derivatives(const ModelSpec& spec, const ThetaVector& theta,
                                 const MMESystem& sys);

/// Average information through the factorized path (assembles internally;
/// exactly one factorization of C per call).
Matrix average_information_fast(const ModelSpec& spec, const ThetaVector& theta);

/// Score through the factorized path, using
/// tr(P_H Vdot) = tr(R^-1 Vdot) - tr(C^-1 W'R^-1 Vdot R^-1 W)
/// against the cached factorization.
Vector score_fast(const ModelSpec& spec, const ThetaVector& theta);

}  // namespace reml

#endif  // REML_INFOMAT_HPP
