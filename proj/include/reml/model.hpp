#ifndef REML_MODEL_HPP
#define REML_MODEL_HPP

#include <string>
#include <vector>

#include "reml/sparse.hpp"

namespace reml {

/// Parameter vector theta = (sigma2; kappa) with kappa = (gamma; phi).
/// The leading n_gamma entries of kappa belong to the G side, the rest to R.
struct ThetaVector {
  double sigma2 = 1.0;
  Vector kappa;
  int n_gamma = 0;

  ThetaVector() : kappa(0) {}
  ThetaVector(double s2, Vector k, int ng) : sigma2(s2), kappa(std::move(k)), n_gamma(ng) {}

  int size() const { return 1 + static_cast<int>(kappa.size()); }
  int n_phi() const { return static_cast<int>(kappa.size()) - n_gamma; }

  Vector gamma() const { return kappa.head(n_gamma); }
  Vector phi() const { return kappa.tail(n_phi()); }

  /// Flat coordinate view: index 0 is sigma2, then kappa in order.
  double coord(int i) const;
  void set_coord(int i, double v);
  Vector flat() const;
  static ThetaVector from_flat(const Vector& t, int n_gamma);
};

enum class StructureKind { Identity, IidBlocks, Ar1, Explicit };

/// A parameterized symmetric matrix family with first and second parameter
/// derivatives. Identity, IidBlocks and Explicit are linear in their
/// parameters; Ar1 (R_ij = phi^|i-j|) is the built-in nonlinear family.
struct VarianceStructure {
  StructureKind kind = StructureKind::Identity;
  int dim = 0;
  std::vector<int> block_sizes;  // IidBlocks: one iid block per entry
  Matrix base;                   // Explicit: constant term
  std::vector<Matrix> basis;     // Explicit: per-parameter slope matrices
  std::vector<double> lower, upper;

  static VarianceStructure identity(int n);
  static VarianceStructure iid_blocks(std::vector<int> sizes);
  static VarianceStructure ar1(int n, double phi_bound = 0.99);
  static VarianceStructure explicit_linear(Matrix base_mat, std::vector<Matrix> slopes);

  int n_par() const;
  bool linear() const { return kind != StructureKind::Ar1; }
  void check_admissible(const Vector& par) const;

  Matrix value(const Vector& par) const;
  Matrix d1(const Vector& par, int i) const;
  Matrix d2(const Vector& par, int i, int j) const;

  /// Inverse and log-determinant; closed forms for Identity/IidBlocks/Ar1,
  /// dense factorization for Explicit. Throws NotPositiveDefinite.
  Matrix inverse(const Vector& par) const;
  double log_determinant(const Vector& par) const;
};

/// Linear mixed model y = X tau + Z u + e with
///   u ~ N(0, sigma2 G(gamma)),  e ~ N(0, sigma2 R(phi)),
///   V = var(y) = sigma2 (R + Z G Z') = sigma2 H(kappa).
///
/// Two coordinate systems are in play for the G side:
///  - iid-blocks G: the gamma entries of kappa are variance components s_i,
///    V = sigma2 R(phi) + sum_i s_i Z_i Z_i'. Linear in theta whenever R has
///    no parameters; the MME-side ratio matrix is G = diag(s_i / sigma2).
///  - explicit G: V = sigma2 (R(phi) + Z G(gamma) Z'), so dV/dsigma2 = H.
struct ModelSpec {
  Vector y;
  Matrix X;
  Matrix Z;
  VarianceStructure g_structure;
  VarianceStructure r_structure;
  std::vector<std::string> theta_names;  // optional; defaults generated

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
  int b() const { return static_cast<int>(Z.cols()); }
  int n_parameters() const { return 1 + g_structure.n_par() + r_structure.n_par(); }

  /// True when the second derivative of V vanishes identically in theta.
  bool linear_in_theta() const;

  /// Whether the iid-blocks (variance-scale) coordinates are in effect.
  bool variance_scale_g() const { return g_structure.kind != StructureKind::Explicit; }

  std::vector<std::string> parameter_names() const;
  void validate() const;

  /// Column block of Z belonging to iid block i.
  Matrix z_block(int i) const;
};

ThetaVector make_theta(const ModelSpec& spec, double sigma2, const Vector& kappa);

/// V(theta), dV/dtheta_i and d2V/dtheta_i dtheta_j as dense matrices.
Matrix variance_value(const ModelSpec& spec, const ThetaVector& theta);
Matrix variance_first_derivative(const ModelSpec& spec, const ThetaVector& theta, int i);
Matrix variance_second_derivative(const ModelSpec& spec, const ThetaVector& theta, int i, int j);

/// The sigma2-free building blocks of the H-scale system.
struct StandardBlocks {
  Matrix G, G_inv, R, R_inv, H, H_inv;
  double logdet_G = 0.0;
  double logdet_R = 0.0;
};

/// G, R and friends at theta; H_inv goes through the Woodbury identity
/// H^-1 = R^-1 - R^-1 Z (G^-1 + Z'R^-1 Z)^-1 Z'R^-1.
StandardBlocks standard_blocks(const ModelSpec& spec, const ThetaVector& theta);

/// Ratio-scale G matrix (the one entering the MME and log|G|): for iid
/// blocks this is diag(s_i / sigma2), for explicit structures G(gamma).
Matrix g_ratio_matrix(const ModelSpec& spec, const ThetaVector& theta);
double g_ratio_logdet(const ModelSpec& spec, const ThetaVector& theta);

}  // namespace reml

#endif  // REML_MODEL_HPP
