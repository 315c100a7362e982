#include "reml/table.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "reml/errors.hpp"

namespace reml {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

}  // namespace

int DataTable::column_index(const std::string& name) const {
  for (int i = 0; i < n_columns(); ++i)
    if (columns[i].name == name) return i;
  fail(ErrorCode::UnknownColumn, "no column named '" + name + "'");
}

std::vector<int> DataTable::grouping_codes(const std::string& name,
                                           std::vector<std::string>& levels) const {
  const Column& col = columns[column_index(name)];
  if (!col.numeric) {
    levels = col.levels;
    return col.codes;
  }
  levels.clear();
  std::vector<int> codes(rows);
  std::map<std::string, int> seen;
  for (int r = 0; r < rows; ++r) {
    auto [it, inserted] = seen.emplace(col.raw[r], static_cast<int>(levels.size()));
    if (inserted) levels.push_back(col.raw[r]);
    codes[r] = it->second;
  }
  return codes;
}

DataTable DataTable::read_csv(std::istream& in) {
  DataTable table;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError,
          "empty CSV: missing header row");
  const std::vector<std::string> header = split_line(line);
  require(!header.empty(), ErrorCode::ParseError, "empty CSV header");
  for (const std::string& name : header) {
    require(!name.empty(), ErrorCode::ParseError, "blank column name in CSV header");
    Column col;
    col.name = name;
    table.columns.push_back(std::move(col));
  }

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    require(cells.size() == header.size(), ErrorCode::ParseError,
            "CSV row " + std::to_string(table.rows + 2) + " has " +
                std::to_string(cells.size()) + " cells, expected " +
                std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) table.columns[c].raw.push_back(cells[c]);
    ++table.rows;
  }
  require(table.rows > 0, ErrorCode::ParseError, "CSV has no data rows");

  // Type each column: numeric iff every cell parses fully as a double.
  for (Column& col : table.columns) {
    std::vector<double> parsed(table.rows);
    bool numeric = true;
    for (int r = 0; r < table.rows && numeric; ++r) numeric = parse_double(col.raw[r], parsed[r]);
    col.numeric = numeric;
    if (numeric) {
      col.values.resize(table.rows);
      for (int r = 0; r < table.rows; ++r) col.values[r] = parsed[r];
    } else {
      std::map<std::string, int> seen;
      col.codes.resize(table.rows);
      for (int r = 0; r < table.rows; ++r) {
        auto [it, inserted] = seen.emplace(col.raw[r], static_cast<int>(col.levels.size()));
        if (inserted) col.levels.push_back(col.raw[r]);
        col.codes[r] = it->second;
      }
    }
  }
  return table;
}

DataTable DataTable::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, "cannot open CSV file '" + path + "'");
  return read_csv(in);
}

}  // namespace reml
