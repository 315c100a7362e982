#include "reml/dense_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "reml/errors.hpp"

namespace reml {

void write_csv(const Matrix& m, std::ostream& out) {
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ",";
      out << m(i, j);
    }
    out << "\n";
  }
}

void write_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::ParseError, "cannot open for write: " + path);
  write_csv(m, out);
}

Matrix read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "CSV: not a number: '" + cell + "'");
      }
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) used++;
      require(used == cell.size(), ErrorCode::ParseError,
              "CSV: trailing characters in '" + cell + "'");
      row.push_back(v);
    }
    require(rows.empty() || row.size() == rows.front().size(), ErrorCode::ParseError,
            "CSV: ragged rows");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::ParseError, "CSV: empty input");
  Matrix m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix read_csv_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, "cannot open: " + path);
  return read_csv(in);
}

}  // namespace reml
