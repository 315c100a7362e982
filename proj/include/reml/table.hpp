#ifndef REML_TABLE_HPP
#define REML_TABLE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "reml/sparse.hpp"

namespace reml {

/// Rectangular data table read from headered CSV. A column is numeric when
/// every cell parses as a double; otherwise it is categorical with levels
/// enumerated in first-appearance order. Raw cell text is retained so any
/// column can later serve as a grouping factor.
struct DataTable {
  struct Column {
    std::string name;
    bool numeric = false;
    Vector values;                    // numeric columns
    std::vector<int> codes;           // categorical columns: level index per row
    std::vector<std::string> levels;  // first-appearance order
    std::vector<std::string> raw;     // cell text, all columns
  };

  std::vector<Column> columns;
  int rows = 0;

  int n_columns() const { return static_cast<int>(columns.size()); }
  /// Index of a named column; throws UnknownColumn.
  int column_index(const std::string& name) const;
  const Column& column(const std::string& name) const { return columns[column_index(name)]; }

  /// Grouping codes for any column: numeric columns group by exact cell
  /// text, categorical columns reuse their level coding.
  std::vector<int> grouping_codes(const std::string& name, std::vector<std::string>& levels) const;

  static DataTable read_csv(std::istream& in);
  static DataTable read_csv_file(const std::string& path);
};

}  // namespace reml

#endif  // REML_TABLE_HPP
