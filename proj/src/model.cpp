#include "reml/model.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "reml/errors.hpp"
#include "reml/ldlt.hpp"

namespace reml {

double ThetaVector::coord(int i) const {
  require(i >= 0 && i < size(), ErrorCode::IndexOutOfRange, "theta index out of range");
  return i == 0 ? sigma2 : kappa[i - 1];
}

void ThetaVector::set_coord(int i, double v) {
  require(i >= 0 && i < size(), ErrorCode::IndexOutOfRange, "theta index out of range");
  if (i == 0)
    sigma2 = v;
  else
    kappa[i - 1] = v;
}

Vector ThetaVector::flat() const {
  Vector t(size());
  t[0] = sigma2;
  t.tail(kappa.size()) = kappa;
  return t;
}

ThetaVector ThetaVector::from_flat(const Vector& t, int n_gamma) {
  require(t.size() >= 1, ErrorCode::DimensionMismatch, "theta needs at least sigma2");
  require(n_gamma >= 0 && n_gamma <= t.size() - 1, ErrorCode::DimensionMismatch,
          "gamma partition exceeds kappa length");
  return ThetaVector(t[0], t.tail(t.size() - 1), n_gamma);
}

VarianceStructure VarianceStructure::identity(int n) {
  VarianceStructure s;
  s.kind = StructureKind::Identity;
  s.dim = n;
  return s;
}

VarianceStructure VarianceStructure::iid_blocks(std::vector<int> sizes) {
  VarianceStructure s;
  s.kind = StructureKind::IidBlocks;
  s.block_sizes = std::move(sizes);
  s.dim = 0;
  for (int bs : s.block_sizes) {
    require(bs >= 1, ErrorCode::DimensionMismatch, "iid block size must be positive");
    s.dim += bs;
  }
  s.lower.assign(s.block_sizes.size(), 0.0);
  s.upper.assign(s.block_sizes.size(), std::numeric_limits<double>::infinity());
  return s;
}

VarianceStructure VarianceStructure::ar1(int n, double phi_bound) {
  require(n >= 1, ErrorCode::DimensionMismatch, "ar1 dimension must be positive");
  require(phi_bound > 0 && phi_bound < 1, ErrorCode::InadmissibleParameter,
          "ar1 correlation bound must lie in (0,1)");
  VarianceStructure s;
  s.kind = StructureKind::Ar1;
  s.dim = n;
  s.lower = {-phi_bound};
  s.upper = {phi_bound};
  return s;
}

VarianceStructure VarianceStructure::explicit_linear(Matrix base_mat, std::vector<Matrix> slopes) {
  VarianceStructure s;
  s.kind = StructureKind::Explicit;
  s.dim = static_cast<int>(base_mat.rows());
  require(base_mat.rows() == base_mat.cols(), ErrorCode::DimensionMismatch,
          "explicit base matrix must be square");
  for (const Matrix& m : slopes)
    require(m.rows() == s.dim && m.cols() == s.dim, ErrorCode::DimensionMismatch,
            "explicit slope matrix dimension mismatch");
  s.base = std::move(base_mat);
  s.basis = std::move(slopes);
  s.lower.assign(s.basis.size(), -std::numeric_limits<double>::infinity());
  s.upper.assign(s.basis.size(), std::numeric_limits<double>::infinity());
  return s;
}

int VarianceStructure::n_par() const {
  switch (kind) {
    case StructureKind::Identity: return 0;
    case StructureKind::IidBlocks: return static_cast<int>(block_sizes.size());
    case StructureKind::Ar1: return 1;
    case StructureKind::Explicit: return static_cast<int>(basis.size());
  }
  return 0;
}

void VarianceStructure::check_admissible(const Vector& par) const {
  require(par.size() == n_par(), ErrorCode::DimensionMismatch,
          "structure parameter count mismatch");
  for (int i = 0; i < par.size(); ++i)
    require(par[i] >= lower[i] && par[i] <= upper[i], ErrorCode::InadmissibleParameter,
            "structure parameter outside admissible region");
}

Matrix VarianceStructure::value(const Vector& par) const {
  check_admissible(par);
  switch (kind) {
    case StructureKind::Identity:
      return Matrix::Identity(dim, dim);
    case StructureKind::IidBlocks: {
      Matrix g = Matrix::Zero(dim, dim);
      int off = 0;
      for (std::size_t i = 0; i < block_sizes.size(); ++i) {
        g.block(off, off, block_sizes[i], block_sizes[i]) =
            par[i] * Matrix::Identity(block_sizes[i], block_sizes[i]);
        off += block_sizes[i];
      }
      return g;
    }
    case StructureKind::Ar1: {
      const double phi = par[0];
      Matrix r(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j <= i; ++j) {
          const double v = (i == j) ? 1.0 : std::pow(phi, i - j);
          r(i, j) = v;
          r(j, i) = v;
        }
      return r;
    }
    case StructureKind::Explicit: {
      Matrix g = base;
      for (std::size_t i = 0; i < basis.size(); ++i) g += par[i] * basis[i];
      return g;
    }
  }
  fail(ErrorCode::InadmissibleParameter, "unknown structure kind");
}

Matrix VarianceStructure::d1(const Vector& par, int i) const {
  require(i >= 0 && i < n_par(), ErrorCode::IndexOutOfRange, "structure derivative index");
  switch (kind) {
    case StructureKind::Identity:
      break;
    case StructureKind::IidBlocks: {
      Matrix d = Matrix::Zero(dim, dim);
      int off = 0;
      for (int k = 0; k < i; ++k) off += block_sizes[k];
      d.block(off, off, block_sizes[i], block_sizes[i]) =
          Matrix::Identity(block_sizes[i], block_sizes[i]);
      return d;
    }
    case StructureKind::Ar1: {
      const double phi = par[0];
      Matrix d = Matrix::Zero(dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < r; ++c) {
          const int m = r - c;
          const double v = (m == 1) ? 1.0 : m * std::pow(phi, m - 1);
          d(r, c) = v;
          d(c, r) = v;
        }
      return d;
    }
    case StructureKind::Explicit:
      return basis[i];
  }
  return Matrix::Zero(dim, dim);
}

Matrix VarianceStructure::d2(const Vector& par, int i, int j) const {
  require(i >= 0 && i < n_par() && j >= 0 && j < n_par(), ErrorCode::IndexOutOfRange,
          "structure derivative index");
  if (kind == StructureKind::Ar1) {
    const double phi = par[0];
    Matrix d = Matrix::Zero(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < r; ++c) {
        const int m = r - c;
        if (m < 2) continue;
        const double v = (m == 2) ? 2.0 : m * (m - 1) * std::pow(phi, m - 2);
        d(r, c) = v;
        d(c, r) = v;
      }
    return d;
  }
  return Matrix::Zero(dim, dim);
}

Matrix VarianceStructure::inverse(const Vector& par) const {
  check_admissible(par);
  switch (kind) {
    case StructureKind::Identity:
      return Matrix::Identity(dim, dim);
    case StructureKind::IidBlocks: {
      Matrix g = Matrix::Zero(dim, dim);
      int off = 0;
      for (std::size_t i = 0; i < block_sizes.size(); ++i) {
        require(par[i] > 0, ErrorCode::NotPositiveDefinite,
                "iid block variance must be positive for inversion");
        g.block(off, off, block_sizes[i], block_sizes[i]) =
            (1.0 / par[i]) * Matrix::Identity(block_sizes[i], block_sizes[i]);
        off += block_sizes[i];
      }
      return g;
    }
    case StructureKind::Ar1: {
      // Tridiagonal closed form of the AR(1) inverse.
      const double phi = par[0];
      const double c = 1.0 / (1.0 - phi * phi);
      Matrix r = Matrix::Zero(dim, dim);
      for (int i = 0; i < dim; ++i) {
        const bool interior = (i > 0 && i < dim - 1);
        r(i, i) = dim == 1 ? 1.0 : (interior ? (1.0 + phi * phi) * c : c);
        if (i + 1 < dim) {
          r(i, i + 1) = -phi * c;
          r(i + 1, i) = -phi * c;
        }
      }
      return r;
    }
    case StructureKind::Explicit: {
      SymmetricFactorization f = ldlt_factor(value(par));
      require(f.positive_definite(), ErrorCode::NotPositiveDefinite,
              "explicit structure not positive definite");
      return f.solve(Matrix(Matrix::Identity(dim, dim)));
    }
  }
  fail(ErrorCode::InadmissibleParameter, "unknown structure kind");
}

double VarianceStructure::log_determinant(const Vector& par) const {
  check_admissible(par);
  switch (kind) {
    case StructureKind::Identity:
      return 0.0;
    case StructureKind::IidBlocks: {
      double ld = 0.0;
      for (std::size_t i = 0; i < block_sizes.size(); ++i) {
        require(par[i] > 0, ErrorCode::NotPositiveDefinite,
                "iid block variance must be positive for log-determinant");
        ld += block_sizes[i] * std::log(par[i]);
      }
      return ld;
    }
    case StructureKind::Ar1:
      return (dim - 1) * std::log(1.0 - par[0] * par[0]);
    case StructureKind::Explicit:
      return ldlt_factor(value(par)).log_determinant();
  }
  fail(ErrorCode::InadmissibleParameter, "unknown structure kind");
}

bool ModelSpec::linear_in_theta() const {
  // V is linear in theta exactly when every second derivative vanishes:
  // variance-scale G coordinates with a parameter-free R.
  return variance_scale_g() && r_structure.n_par() == 0;
}

std::vector<std::string> ModelSpec::parameter_names() const {
  if (!theta_names.empty()) return theta_names;
  std::vector<std::string> names;
  names.push_back("sigma2");
  const int ng = g_structure.n_par();
  for (int i = 0; i < ng; ++i)
    names.push_back(variance_scale_g() ? "sigma2_u" + std::to_string(i + 1)
                                       : "gamma" + std::to_string(i + 1));
  for (int j = 0; j < r_structure.n_par(); ++j)
    names.push_back(r_structure.kind == StructureKind::Ar1 ? "phi"
                                                           : "phi" + std::to_string(j + 1));
  return names;
}

void ModelSpec::validate() const {
  require(y.size() > 0, ErrorCode::DimensionMismatch, "empty response");
  require(X.rows() == y.size(), ErrorCode::DimensionMismatch, "X row count != n");
  require(Z.rows() == y.size() || Z.cols() == 0, ErrorCode::DimensionMismatch,
          "Z row count != n");
  require(p() >= 1 && n() > p(), ErrorCode::DimensionMismatch,
          "need n > p >= 1");
  require(g_structure.dim == b(), ErrorCode::DimensionMismatch,
          "G dimension != number of random-effect columns");
  require(r_structure.dim == n(), ErrorCode::DimensionMismatch, "R dimension != n");
  if (!theta_names.empty())
    require(static_cast<int>(theta_names.size()) == n_parameters(),
            ErrorCode::DimensionMismatch, "theta name count mismatch");
}

Matrix ModelSpec::z_block(int i) const {
  require(g_structure.kind == StructureKind::IidBlocks, ErrorCode::IndexOutOfRange,
          "z_block applies to iid-blocks structures");
  require(i >= 0 && i < static_cast<int>(g_structure.block_sizes.size()),
          ErrorCode::IndexOutOfRange, "z_block index");
  int off = 0;
  for (int k = 0; k < i; ++k) off += g_structure.block_sizes[k];
  return Z.middleCols(off, g_structure.block_sizes[i]);
}

ThetaVector make_theta(const ModelSpec& spec, double sigma2, const Vector& kappa) {
  require(kappa.size() == spec.g_structure.n_par() + spec.r_structure.n_par(),
          ErrorCode::DimensionMismatch, "kappa length mismatch");
  return ThetaVector(sigma2, kappa, spec.g_structure.n_par());
}

namespace {

void check_theta(const ModelSpec& spec, const ThetaVector& theta) {
  require(theta.sigma2 > 0, ErrorCode::InadmissibleParameter, "sigma2 must be positive");
  require(theta.n_gamma == spec.g_structure.n_par(), ErrorCode::DimensionMismatch,
          "gamma partition mismatch");
  require(theta.n_phi() == spec.r_structure.n_par(), ErrorCode::DimensionMismatch,
          "phi partition mismatch");
  spec.g_structure.check_admissible(theta.gamma());
  spec.r_structure.check_admissible(theta.phi());
}

// Locates flat index i within (sigma2 | gamma | phi); returns -1 for sigma2,
// otherwise the in-structure index, with in_g telling which side.
int locate(const ModelSpec& spec, int i, bool& in_g) {
  const int ng = spec.g_structure.n_par();
  if (i == 0) return -1;
  if (i <= ng) {
    in_g = true;
    return i - 1;
  }
  in_g = false;
  return i - 1 - ng;
}

}  // namespace

Matrix variance_value(const ModelSpec& spec, const ThetaVector& theta) {
  check_theta(spec, theta);
  const Matrix r = spec.r_structure.value(theta.phi());
  if (spec.b() == 0) return theta.sigma2 * r;
  const Matrix g = spec.g_structure.value(theta.gamma());
  if (spec.variance_scale_g())
    return theta.sigma2 * r + spec.Z * g * spec.Z.transpose();
  return theta.sigma2 * (r + spec.Z * g * spec.Z.transpose());
}

Matrix variance_first_derivative(const ModelSpec& spec, const ThetaVector& theta, int i) {
  check_theta(spec, theta);
  require(i >= 0 && i < spec.n_parameters(), ErrorCode::IndexOutOfRange,
          "theta index out of range");
  bool in_g = false;
  const int k = locate(spec, i, in_g);
  if (spec.variance_scale_g()) {
    // V = sigma2 R(phi) + sum_i s_i Z_i Z_i'
    if (k < 0) return spec.r_structure.value(theta.phi());
    if (in_g) {
      const Matrix zi = spec.z_block(k);
      return zi * zi.transpose();
    }
    return theta.sigma2 * spec.r_structure.d1(theta.phi(), k);
  }
  // V = sigma2 (R(phi) + Z G(gamma) Z')
  if (k < 0) {
    Matrix h = spec.r_structure.value(theta.phi());
    if (spec.b() > 0)
      h += spec.Z * spec.g_structure.value(theta.gamma()) * spec.Z.transpose();
    return h;
  }
  if (in_g)
    return theta.sigma2 * (spec.Z * spec.g_structure.d1(theta.gamma(), k) * spec.Z.transpose());
  return theta.sigma2 * spec.r_structure.d1(theta.phi(), k);
}

Matrix variance_second_derivative(const ModelSpec& spec, const ThetaVector& theta, int i, int j) {
  check_theta(spec, theta);
  require(i >= 0 && i < spec.n_parameters() && j >= 0 && j < spec.n_parameters(),
          ErrorCode::IndexOutOfRange, "theta index out of range");
  if (i > j) std::swap(i, j);
  const int n = spec.n();
  bool i_in_g = false, j_in_g = false;
  const int ki = locate(spec, i, i_in_g);
  const int kj = locate(spec, j, j_in_g);
  const Matrix zero = Matrix::Zero(n, n);

  if (spec.variance_scale_g()) {
    // Nonzero blocks: (sigma2, phi) -> dR/dphi, (phi, phi) -> sigma2 d2R.
    if (ki < 0 && kj >= 0 && !j_in_g) return spec.r_structure.d1(theta.phi(), kj);
    if (ki >= 0 && !i_in_g && !j_in_g)
      return theta.sigma2 * spec.r_structure.d2(theta.phi(), ki, kj);
    return zero;
  }

  // Scaled family V = sigma2 H(kappa):
  // (sigma2, kappa_m) -> dH/dkappa_m; (phi, phi) -> sigma2 d2R; rest zero.
  if (ki < 0 && kj >= 0) {
    if (j_in_g)
      return spec.Z * spec.g_structure.d1(theta.gamma(), kj) * spec.Z.transpose();
    return spec.r_structure.d1(theta.phi(), kj);
  }
  if (ki >= 0 && !i_in_g && !j_in_g)
    return theta.sigma2 * spec.r_structure.d2(theta.phi(), ki, kj);
  return zero;
}

Matrix g_ratio_matrix(const ModelSpec& spec, const ThetaVector& theta) {
  check_theta(spec, theta);
  if (spec.b() == 0) return Matrix(0, 0);
  if (spec.variance_scale_g())
    return spec.g_structure.value(theta.gamma() / theta.sigma2);
  return spec.g_structure.value(theta.gamma());
}

double g_ratio_logdet(const ModelSpec& spec, const ThetaVector& theta) {
  check_theta(spec, theta);
  if (spec.b() == 0) return 0.0;
  if (spec.variance_scale_g())
    return spec.g_structure.log_determinant(theta.gamma() / theta.sigma2);
  return spec.g_structure.log_determinant(theta.gamma());
}

StandardBlocks standard_blocks(const ModelSpec& spec, const ThetaVector& theta) {
  check_theta(spec, theta);
  StandardBlocks blocks;
  blocks.R = spec.r_structure.value(theta.phi());
  blocks.R_inv = spec.r_structure.inverse(theta.phi());
  blocks.logdet_R = spec.r_structure.log_determinant(theta.phi());
  if (spec.b() == 0) {
    blocks.G = Matrix(0, 0);
    blocks.G_inv = Matrix(0, 0);
    blocks.logdet_G = 0.0;
    blocks.H = blocks.R;
    blocks.H_inv = blocks.R_inv;
    return blocks;
  }
  const Vector gpar =
      spec.variance_scale_g() ? Vector(theta.gamma() / theta.sigma2) : Vector(theta.gamma());
  blocks.G = spec.g_structure.value(gpar);
  blocks.G_inv = spec.g_structure.inverse(gpar);
  blocks.logdet_G = spec.g_structure.log_determinant(gpar);
  blocks.H = blocks.R + spec.Z * blocks.G * spec.Z.transpose();

  // Woodbury: H^-1 = R^-1 - R^-1 Z (G^-1 + Z'R^-1 Z)^-1 Z'R^-1.
  const Matrix rinv_z = blocks.R_inv * spec.Z;
  Matrix middle = blocks.G_inv + spec.Z.transpose() * rinv_z;
  SymmetricFactorization f = ldlt_factor(middle);
  require(f.positive_definite(), ErrorCode::NotPositiveDefinite,
          "Woodbury core matrix not positive definite");
  blocks.H_inv = blocks.R_inv - rinv_z * f.solve(Matrix(rinv_z.transpose()));
  return blocks;
}

}  // namespace reml
