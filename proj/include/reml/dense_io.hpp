#ifndef REML_DENSE_IO_HPP
#define REML_DENSE_IO_HPP

#include <iosfwd>
#include <string>

#include "reml/sparse.hpp"

namespace reml {

/// Plain CSV (no header) for dense matrices.
void write_csv(const Matrix& m, std::ostream& out);
void write_csv(const Matrix& m, const std::string& path);
Matrix read_csv(std::istream& in);
Matrix read_csv_file(const std::string& path);

}  // namespace reml

#endif  // REML_DENSE_IO_HPP
