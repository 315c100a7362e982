#include "reml/ingest.hpp"

#include <Eigen/QR>
#include <fstream>
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

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

ModelConfig ModelConfig::parse(std::istream& in) {
  ModelConfig config;
  bool saw_response = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::ParseError,
            "model config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "response") {
      require(!value.empty(), ErrorCode::ParseError, "response must name a column");
      config.response = value;
      saw_response = true;
    } else if (key == "fixed") {
      config.fixed = split_list(value);
    } else if (key == "random") {
      config.random_effects = split_list(value);
    } else if (key == "residual") {
      require(value == "iid" || value == "ar1", ErrorCode::ParseError,
              "residual must be 'iid' or 'ar1', got '" + value + "'");
      config.residual = value;
    } else if (key == "phi_bound") {
      try {
        config.phi_bound = std::stod(value);
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "phi_bound must be a number, got '" + value + "'");
      }
      require(config.phi_bound > 0 && config.phi_bound < 1, ErrorCode::ParseError,
              "phi_bound must lie in (0,1)");
    } else {
      fail(ErrorCode::ParseError, "unknown model config key '" + key + "'");
    }
  }
  require(saw_response, ErrorCode::ParseError, "model config must set 'response'");
  return config;
}

ModelConfig ModelConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, "cannot open model config '" + path + "'");
  return parse(in);
}

IngestResult build_design(const DataTable& table, const ModelConfig& config) {
  const int n = table.rows;
  IngestResult out;

  const DataTable::Column& resp = table.column(config.response);
  require(resp.numeric, ErrorCode::ParseError,
          "response column '" + config.response + "' is not numeric");
  out.spec.y = resp.values;

  // X: intercept, numeric columns as-is, categoricals dummy-coded with the
  // first level dropped so the design stays full rank.
  std::vector<Vector> x_cols;
  x_cols.push_back(Vector::Ones(n));
  out.fixed_names.push_back("(intercept)");
  for (const std::string& name : config.fixed) {
    const DataTable::Column& col = table.column(name);
    if (col.numeric) {
      x_cols.push_back(col.values);
      out.fixed_names.push_back(name);
    } else {
      for (std::size_t level = 1; level < col.levels.size(); ++level) {
        Vector ind = Vector::Zero(n);
        for (int r = 0; r < n; ++r)
          if (col.codes[r] == static_cast<int>(level)) ind[r] = 1.0;
        x_cols.push_back(ind);
        out.fixed_names.push_back(name + "=" + col.levels[level]);
      }
    }
  }
  const int p = static_cast<int>(x_cols.size());
  Matrix x(n, p);
  for (int j = 0; j < p; ++j) x.col(j) = x_cols[j];

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  if (rank < p) {
    // Columns rejected by the pivoting are the dependent ones; name them.
    const auto& perm = qr.colsPermutation().indices();
    std::string offenders;
    for (int k = rank; k < p; ++k) {
      if (!offenders.empty()) offenders += ", ";
      offenders += out.fixed_names[perm[k]];
    }
    fail(ErrorCode::RankDeficient,
         "fixed-effect design is rank deficient; dependent columns: " + offenders);
  }
  out.spec.X = x;

  // Z: one indicator block per grouping factor.
  std::vector<int> block_sizes;
  std::vector<Matrix> blocks;
  int b = 0;
  for (const std::string& name : config.random_effects) {
    std::vector<std::string> levels;
    const std::vector<int> codes = table.grouping_codes(name, levels);
    const int m = static_cast<int>(levels.size());
    require(m >= 1, ErrorCode::ParseError, "random factor '" + name + "' has no levels");
    Matrix z = Matrix::Zero(n, m);
    for (int r = 0; r < n; ++r) z(r, codes[r]) = 1.0;
    blocks.push_back(std::move(z));
    block_sizes.push_back(m);
    b += m;
    out.random_names.push_back(name);
  }
  out.spec.Z.resize(n, b);
  int off = 0;
  for (const Matrix& z : blocks) {
    out.spec.Z.middleCols(off, z.cols()) = z;
    off += static_cast<int>(z.cols());
  }
  out.spec.g_structure = VarianceStructure::iid_blocks(block_sizes);

  out.spec.r_structure = config.residual == "ar1"
                             ? VarianceStructure::ar1(n, config.phi_bound)
                             : VarianceStructure::identity(n);

  out.spec.theta_names.push_back("sigma2");
  for (const std::string& name : out.random_names)
    out.spec.theta_names.push_back("sigma2_" + name);
  if (config.residual == "ar1") out.spec.theta_names.push_back("phi");

  out.spec.validate();
  return out;
}

IngestResult ingest(const std::string& data_path, const std::string& config_path) {
  const DataTable table = DataTable::read_csv_file(data_path);
  const ModelConfig config = ModelConfig::parse_file(config_path);
  return build_design(table, config);
}

}  // namespace reml
