#ifndef REML_REPORT_HPP
#define REML_REPORT_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "reml/likelihood.hpp"
#include "reml/optimizer.hpp"
#include "reml/verify.hpp"

namespace reml {

/// Current version stamped into every report and into the schema document.
inline constexpr const char* kReportSchemaVersion = "1.0";

/// Fit report as JSON. All volatile content (wall-clock time, elapsed
/// milliseconds) lives under the single "timestamp" key, so two runs on the
/// same inputs differ in that field only.
nlohmann::json fit_report_to_json(const FitReport& report, const LikelihoodValue& components,
                                  const std::vector<std::string>& fixed_names,
                                  const Vector& tau_hat, double elapsed_ms);

nlohmann::json verification_report_to_json(const std::vector<IdentityCheck>& checks, int n,
                                           int p, int b, double elapsed_ms);

nlohmann::json iteration_record_to_json(const IterationRecord& record);

/// The versioned schema document covering the fit report and the
/// verification report. Unknown fields are rejected
/// ("additionalProperties": false throughout).
nlohmann::json report_schema();

/// Minimal JSON-schema checker for the subset report_schema() uses:
/// type, properties, required, additionalProperties, items, enum.
/// Returns human-readable violations; empty means the document validates.
std::vector<std::string> validate_against_schema(const nlohmann::json& doc,
                                                 const nlohmann::json& schema);

}  // namespace reml

#endif  // REML_REPORT_HPP
