#ifndef REML_SPARSE_HPP
#define REML_SPARSE_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace reml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric sparse matrix holding the lower triangle (diagonal included)
/// in compressed-column form. Row indices are strictly increasing within a
/// column and every column stores its diagonal entry, even when zero, so
/// pivots are always addressable.
struct SparseSymmetric {
  int n = 0;
  std::vector<int> col_ptr;   // size n + 1
  std::vector<int> row_ind;   // size nnz
  std::vector<double> values; // size nnz

  int nnz() const { return static_cast<int>(row_ind.size()); }

  /// Entry (i, j) of the full symmetric matrix; zero if not stored.
  double coeff(int i, int j) const;

  /// Full dense reconstruction (both triangles).
  Matrix to_dense() const;

  /// y = A * x using the symmetric structure.
  Vector multiply(const Vector& x) const;

  /// Largest |a_jj| over the diagonal.
  double max_abs_diagonal() const;

  /// Checks the structural invariants (sorted rows, diagonal present,
  /// lower triangle only). Throws reml::Error on violation.
  void validate() const;

  /// Build from the lower triangle of a dense symmetric matrix, keeping the
  /// diagonal and dropping exact zeros elsewhere.
  static SparseSymmetric from_dense(const Matrix& a);

  /// Build from coordinate triplets (lower-triangle entries; duplicates are
  /// summed, upper-triangle input entries are mirrored down).
  static SparseSymmetric from_triplets(int n,
                                       const std::vector<int>& rows,
                                       const std::vector<int>& cols,
                                       const std::vector<double>& vals);
};

/// Matrix Market coordinate I/O ("matrix coordinate real symmetric",
/// lower triangle, 1-based indices).
void write_matrix_market(const SparseSymmetric& a, std::ostream& out);
void write_matrix_market(const SparseSymmetric& a, const std::string& path);
SparseSymmetric read_matrix_market(std::istream& in);
SparseSymmetric read_matrix_market_file(const std::string& path);

}  // namespace reml

#endif  // REML_SPARSE_HPP
