#include "reml/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "reml/errors.hpp"

namespace reml {

double SparseSymmetric::coeff(int i, int j) const {
  if (i < j) std::swap(i, j);  // stored triangle
  for (int k = col_ptr[j]; k < col_ptr[j + 1]; ++k) {
    if (row_ind[k] == i) return values[k];
    if (row_ind[k] > i) break;
  }
  return 0.0;
}

Matrix SparseSymmetric::to_dense() const {
  Matrix a = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = col_ptr[j]; k < col_ptr[j + 1]; ++k) {
      const int i = row_ind[k];
      a(i, j) = values[k];
      a(j, i) = values[k];
    }
  }
  return a;
}

Vector SparseSymmetric::multiply(const Vector& x) const {
  require(x.size() == n, ErrorCode::DimensionMismatch,
          "SparseSymmetric::multiply: vector length mismatch");
  Vector y = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    for (int k = col_ptr[j]; k < col_ptr[j + 1]; ++k) {
      const int i = row_ind[k];
      y(i) += values[k] * x(j);
      if (i != j) y(j) += values[k] * x(i);
    }
  }
  return y;
}

double SparseSymmetric::max_abs_diagonal() const {
  double d = 0.0;
  for (int j = 0; j < n; ++j) {
    // diagonal is the first entry of each column by the sorted invariant
    d = std::max(d, std::abs(values[col_ptr[j]]));
  }
  return d;
}

void SparseSymmetric::validate() const {
  require(n >= 1, ErrorCode::DimensionMismatch, "SparseSymmetric: order < 1");
  require(static_cast<int>(col_ptr.size()) == n + 1, ErrorCode::DimensionMismatch,
          "SparseSymmetric: bad column pointer length");
  for (int j = 0; j < n; ++j) {
    require(col_ptr[j] < col_ptr[j + 1], ErrorCode::DimensionMismatch,
            "SparseSymmetric: column " + std::to_string(j) + " missing diagonal");
    require(row_ind[col_ptr[j]] == j, ErrorCode::DimensionMismatch,
            "SparseSymmetric: column " + std::to_string(j) + " must start at the diagonal");
    for (int k = col_ptr[j] + 1; k < col_ptr[j + 1]; ++k) {
      require(row_ind[k] > row_ind[k - 1] && row_ind[k] < n,
              ErrorCode::DimensionMismatch,
              "SparseSymmetric: row indices not strictly increasing in column " +
                  std::to_string(j));
    }
  }
}

SparseSymmetric SparseSymmetric::from_dense(const Matrix& a) {
  require(a.rows() == a.cols() && a.rows() >= 1, ErrorCode::DimensionMismatch,
          "from_dense: matrix must be square and non-empty");
  const int n = static_cast<int>(a.rows());
  SparseSymmetric s;
  s.n = n;
  s.col_ptr.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) {
    s.row_ind.push_back(j);
    s.values.push_back(a(j, j));
    for (int i = j + 1; i < n; ++i) {
      if (a(i, j) != 0.0) {
        s.row_ind.push_back(i);
        s.values.push_back(a(i, j));
      }
    }
    s.col_ptr[j + 1] = static_cast<int>(s.row_ind.size());
  }
  return s;
}

SparseSymmetric SparseSymmetric::from_triplets(int n,
                                               const std::vector<int>& rows,
                                               const std::vector<int>& cols,
                                               const std::vector<double>& vals) {
  require(rows.size() == cols.size() && rows.size() == vals.size(),
          ErrorCode::DimensionMismatch, "from_triplets: array length mismatch");
  std::map<std::pair<int, int>, double> cells;
  for (int j = 0; j < n; ++j) cells[{j, j}] = 0.0;  // keep every diagonal
  for (size_t k = 0; k < rows.size(); ++k) {
    int i = rows[k], j = cols[k];
    require(i >= 0 && i < n && j >= 0 && j < n, ErrorCode::IndexOutOfRange,
            "from_triplets: index out of range");
    if (i < j) std::swap(i, j);
    cells[{j, i}] += vals[k];  // key = (col, row), keeps column-major order
  }
  SparseSymmetric s;
  s.n = n;
  s.col_ptr.assign(n + 1, 0);
  int col = 0;
  for (const auto& [key, v] : cells) {
    const auto [j, i] = key;
    const bool keep = (i == j) || v != 0.0;
    if (!keep) continue;
    while (col < j) s.col_ptr[++col] = static_cast<int>(s.row_ind.size());
    s.row_ind.push_back(i);
    s.values.push_back(v);
  }
  while (col < n) s.col_ptr[++col] = static_cast<int>(s.row_ind.size());
  return s;
}

void write_matrix_market(const SparseSymmetric& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.n << " " << a.n << " " << a.nnz() << "\n";
  out.precision(17);
  for (int j = 0; j < a.n; ++j) {
    for (int k = a.col_ptr[j]; k < a.col_ptr[j + 1]; ++k) {
      out << a.row_ind[k] + 1 << " " << j + 1 << " " << a.values[k] << "\n";
    }
  }
}

void write_matrix_market(const SparseSymmetric& a, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::ParseError, "cannot open for write: " + path);
  write_matrix_market(a, out);
}

SparseSymmetric read_matrix_market(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError,
          "Matrix Market: empty input");
  {
    std::istringstream hdr(line);
    std::string banner, object, format, field, symmetry;
    hdr >> banner >> object >> format >> field >> symmetry;
    require(banner == "%%MatrixMarket" && object == "matrix" &&
                format == "coordinate" && field == "real" &&
                symmetry == "symmetric",
            ErrorCode::ParseError,
            "Matrix Market: expected 'matrix coordinate real symmetric' header");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  int rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream sz(line);
    require(static_cast<bool>(sz >> rows >> cols >> nnz) && rows == cols && rows >= 1,
            ErrorCode::ParseError, "Matrix Market: bad size line");
  }
  std::vector<int> ri, ci;
  std::vector<double> vals;
  ri.reserve(nnz);
  ci.reserve(nnz);
  vals.reserve(nnz);
  for (int k = 0; k < nnz; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    require(static_cast<bool>(in >> i >> j >> v), ErrorCode::ParseError,
            "Matrix Market: truncated entry list");
    ri.push_back(i - 1);
    ci.push_back(j - 1);
    vals.push_back(v);
  }
  return SparseSymmetric::from_triplets(rows, ri, ci, vals);
}

SparseSymmetric read_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, "cannot open: " + path);
  return read_matrix_market(in);
}

}  // namespace reml
