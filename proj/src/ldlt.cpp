#include "reml/ldlt.hpp"

#include <cmath>
#include <numeric>

#include "reml/errors.hpp"
#include "reml/ordering.hpp"

namespace reml {

namespace {

constexpr double kPivotTolerance = 1e-13;  // relative to max |a_jj|

void check_pivot(double d, double diag_scale, int k) {
  if (std::abs(d) < kPivotTolerance * std::max(diag_scale, 1e-300)) {
    fail(ErrorCode::ZeroPivot,
         "ldlt_factor: zero pivot at elimination step " + std::to_string(k) +
             " (matrix singular to working precision)");
  }
}

// Upper-triangle CSC view (entries (i, j) with i <= j) of the lower-triangle
// storage, i.e. the pattern transpose. The up-looking factorization consumes
// columns of this view.
struct UpperView {
  std::vector<int> col_ptr, row_ind;
  std::vector<double> values;
};

UpperView transpose_to_upper(const SparseSymmetric& a, const std::vector<int>& perm) {
  const int n = a.n;
  std::vector<int> inv(n);
  for (int k = 0; k < n; ++k) inv[perm[k]] = k;

  // Permuted entry (inv[i], inv[j]) of the lower triangle may land in either
  // triangle; normalize to (r >= c) then store into upper column r at row c.
  UpperView u;
  u.col_ptr.assign(n + 2, 0);
  std::vector<int> rows, cols;
  std::vector<double> vals;
  rows.reserve(a.nnz());
  cols.reserve(a.nnz());
  vals.reserve(a.nnz());
  for (int j = 0; j < a.n; ++j) {
    for (int k = a.col_ptr[j]; k < a.col_ptr[j + 1]; ++k) {
      int r = inv[a.row_ind[k]], c = inv[j];
      if (r < c) std::swap(r, c);
      rows.push_back(r);
      cols.push_back(c);
      vals.push_back(a.values[k]);
      u.col_ptr[r + 2]++;
    }
  }
  for (int j = 0; j < n; ++j) u.col_ptr[j + 2] += u.col_ptr[j + 1];
  u.row_ind.resize(rows.size());
  u.values.resize(rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    const int dest = u.col_ptr[rows[k] + 1]++;
    u.row_ind[dest] = cols[k];
    u.values[dest] = vals[k];
  }
  u.col_ptr.pop_back();
  return u;
}

}  // namespace

int SymmetricFactorization::factor_nnz() const {
  return sparse_ ? static_cast<int>(l_rowind_.size()) : 0;
}

Vector SymmetricFactorization::solve(const Vector& b) const {
  Matrix result = solve(Matrix(b));
  return result.col(0);
}

Matrix SymmetricFactorization::solve(const Matrix& b) const {
  require(b.rows() == n_, ErrorCode::DimensionMismatch,
          "SymmetricFactorization::solve: right-hand side has " +
              std::to_string(b.rows()) + " rows, expected " + std::to_string(n_));
  const int nrhs = static_cast<int>(b.cols());
  Matrix x(n_, nrhs);
  for (int k = 0; k < n_; ++k) x.row(k) = b.row(perm_[k]);

  if (!sparse_) {
    dense_l_.triangularView<Eigen::UnitLower>().solveInPlace(x);
    x.array().colwise() /= d_.array();
    dense_l_.transpose().triangularView<Eigen::UnitUpper>().solveInPlace(x);
  } else {
    for (int j = 0; j < n_; ++j) {
      for (int p = l_colptr_[j]; p < l_colptr_[j + 1]; ++p) {
        x.row(l_rowind_[p]) -= l_values_[p] * x.row(j);
      }
    }
    x.array().colwise() /= d_.array();
    for (int j = n_ - 1; j >= 0; --j) {
      for (int p = l_colptr_[j]; p < l_colptr_[j + 1]; ++p) {
        x.row(j) -= l_values_[p] * x.row(l_rowind_[p]);
      }
    }
  }

  Matrix out(n_, nrhs);
  for (int k = 0; k < n_; ++k) out.row(perm_[k]) = x.row(k);
  return out;
}

double SymmetricFactorization::log_determinant() const {
  double sum = 0.0;
  for (int k = 0; k < n_; ++k) {
    require(d_(k) > 0.0, ErrorCode::NotPositiveDefinite,
            "log_determinant: nonpositive pivot d[" + std::to_string(k) + "]");
    sum += std::log(d_(k));
  }
  return sum;
}

Matrix SymmetricFactorization::unit_lower() const {
  if (!sparse_) {
    Matrix l = dense_l_;
    l.triangularView<Eigen::StrictlyUpper>().setZero();
    l.diagonal().setOnes();
    return l;
  }
  Matrix l = Matrix::Identity(n_, n_);
  for (int j = 0; j < n_; ++j) {
    for (int p = l_colptr_[j]; p < l_colptr_[j + 1]; ++p) {
      l(l_rowind_[p], j) = l_values_[p];
    }
  }
  return l;
}

Matrix SymmetricFactorization::reconstruct_permuted() const {
  const Matrix l = unit_lower();
  return l * d_.asDiagonal() * l.transpose();
}

SymmetricFactorization ldlt_factor(const Matrix& a) {
  require(a.rows() == a.cols() && a.rows() >= 1, ErrorCode::DimensionMismatch,
          "ldlt_factor: matrix must be square and of order >= 1");
  const int n = static_cast<int>(a.rows());
  const double scale = a.cwiseAbs().maxCoeff();
  require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0),
          ErrorCode::NumericalError, "ldlt_factor: matrix is not symmetric");

  SymmetricFactorization f;
  f.n_ = n;
  f.sparse_ = false;
  f.perm_ = natural_ordering(n);
  f.d_ = Vector::Zero(n);
  f.dense_l_ = Matrix::Identity(n, n);
  const double diag_scale = a.diagonal().cwiseAbs().maxCoeff();

  // Up-looking dense LDL^T: row j of L, then pivot d_j.
  Matrix& l = f.dense_l_;
  for (int j = 0; j < n; ++j) {
    Vector dl = f.d_.head(j).cwiseProduct(l.row(j).head(j).transpose());
    double dj = a(j, j) - l.row(j).head(j).dot(dl);
    check_pivot(dj, diag_scale, j);
    f.d_(j) = dj;
    for (int i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(dl)) / dj;
    }
  }
  f.positive_definite_ = (f.d_.array() > 0.0).all();
  return f;
}

SymmetricFactorization ldlt_factor(const SparseSymmetric& a, OrderingChoice ordering) {
  a.validate();
  const int n = a.n;
  SymmetricFactorization f;
  f.n_ = n;
  f.sparse_ = true;
  f.perm_ = (ordering == OrderingChoice::MinimumDegree) ? minimum_degree_ordering(a)
                                                        : natural_ordering(n);
  const double diag_scale = a.max_abs_diagonal();
  const UpperView up = transpose_to_upper(a, f.perm_);

  // Symbolic pass: elimination tree and per-column counts of L.
  std::vector<int> parent(n, -1), flag(n, -1), lnz(n, 0);
  for (int k = 0; k < n; ++k) {
    parent[k] = -1;
    flag[k] = k;
    for (int p = up.col_ptr[k]; p < up.col_ptr[k + 1]; ++p) {
      int i = up.row_ind[p];
      while (i < k && flag[i] != k) {
        if (parent[i] == -1) parent[i] = k;
        lnz[i]++;
        flag[i] = k;
        i = parent[i];
      }
    }
  }
  f.l_colptr_.assign(n + 1, 0);
  std::partial_sum(lnz.begin(), lnz.end(), f.l_colptr_.begin() + 1);
  f.l_rowind_.assign(f.l_colptr_[n], 0);
  f.l_values_.assign(f.l_colptr_[n], 0.0);
  f.d_ = Vector::Zero(n);

  // Numeric pass (up-looking): sparse triangular solve per row of L.
  std::vector<double> y(n, 0.0);
  std::vector<int> pattern(n, 0), next(n, 0);
  std::fill(flag.begin(), flag.end(), -1);
  std::fill(lnz.begin(), lnz.end(), 0);
  for (int k = 0; k < n; ++k) {
    int top = n;
    flag[k] = k;
    y[k] = 0.0;
    for (int p = up.col_ptr[k]; p < up.col_ptr[k + 1]; ++p) {
      int i = up.row_ind[p];
      y[i] += up.values[p];
      int len = 0;
      while (i < k && flag[i] != k) {
        next[len++] = i;
        flag[i] = k;
        i = parent[i];
      }
      while (len > 0) pattern[--top] = next[--len];
    }
    double dk = y[k];
    y[k] = 0.0;
    for (int s = top; s < n; ++s) {
      const int i = pattern[s];
      const double yi = y[i];
      y[i] = 0.0;
      for (int p = f.l_colptr_[i]; p < f.l_colptr_[i] + lnz[i]; ++p) {
        y[f.l_rowind_[p]] -= f.l_values_[p] * yi;
      }
      const double lki = yi / f.d_(i);
      dk -= lki * yi;
      const int dest = f.l_colptr_[i] + lnz[i]++;
      f.l_rowind_[dest] = k;
      f.l_values_[dest] = lki;
    }
    check_pivot(dk, diag_scale, k);
    f.d_(k) = dk;
  }
  f.positive_definite_ = (f.d_.array() > 0.0).all();
  return f;
}

double logdet(const SymmetricFactorization& f) { return f.log_determinant(); }

}  // namespace reml
