#ifndef REML_INGEST_HPP
#define REML_INGEST_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "reml/model.hpp"
#include "reml/table.hpp"

namespace reml {

/// Key-value model configuration:
///   response  = y                # required, numeric column
///   fixed     = x1, treatment    # optional; intercept is always included
///   random    = group, batch     # optional; one indicator block per factor
///   residual  = iid | ar1        # optional, default iid
///   phi_bound = 0.99             # optional, ar1 only
/// Lines starting with '#' and blank lines are ignored.
struct ModelConfig {
  std::string response;
  std::vector<std::string> fixed;
  std::vector<std::string> random_effects;
  std::string residual = "iid";
  double phi_bound = 0.99;

  static ModelConfig parse(std::istream& in);
  static ModelConfig parse_file(const std::string& path);
};

/// A ModelSpec plus the column names of the assembled designs.
struct IngestResult {
  ModelSpec spec;
  std::vector<std::string> fixed_names;   // one per column of X
  std::vector<std::string> random_names;  // one per Z block
};

/// Builds X (intercept + fixed effects, categoricals dummy-coded with the
/// first level dropped) and Z (indicator block per grouping factor), checks
/// rank(X), and wires up the variance structures.
IngestResult build_design(const DataTable& table, const ModelConfig& config);

IngestResult ingest(const std::string& data_path, const std::string& config_path);

}  // namespace reml

#endif  // REML_INGEST_HPP
