#include "reml/report.hpp"

#include <chrono>
#include <ctime>

namespace reml {

using nlohmann::json;

namespace {

json timestamp_block(double elapsed_ms) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return json{{"written_at", buf}, {"elapsed_ms", elapsed_ms}};
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

json iteration_record_to_json(const IterationRecord& record) {
  return json{{"iteration", record.iteration},
              {"theta", vector_to_json(record.theta)},
              {"loglik", record.loglik},
              {"score_norm", record.score_norm},
              {"step_scale", record.step_scale},
              {"halvings", record.halvings},
              {"levenberg", record.levenberg}};
}

json fit_report_to_json(const FitReport& report, const LikelihoodValue& components,
                        const std::vector<std::string>& fixed_names, const Vector& tau_hat,
                        double elapsed_ms) {
  json parameters = json::array();
  const Vector flat = report.theta_hat.flat();
  for (int i = 0; i < flat.size(); ++i) {
    json entry{{"name", report.parameter_names[i]}, {"estimate", flat[i]}};
    if (report.std_errors.size() == flat.size()) entry["std_error"] = report.std_errors[i];
    parameters.push_back(entry);
  }

  json fixed = json::array();
  for (std::size_t i = 0; i < fixed_names.size(); ++i)
    fixed.push_back(json{{"name", fixed_names[i]}, {"estimate", tau_hat[i]}});

  json trace = json::array();
  for (const IterationRecord& rec : report.trace) trace.push_back(iteration_record_to_json(rec));

  return json{{"schema_version", kReportSchemaVersion},
              {"kind", "fit"},
              {"timestamp", timestamp_block(elapsed_ms)},
              {"algorithm", report.algorithm},
              {"converged", report.converged},
              {"reason", report.reason},
              {"iterations", report.iterations},
              {"loglik", report.loglik},
              {"components",
               json{{"constant", components.constant},
                    {"logdet", components.logdet},
                    {"quadratic", components.quadratic}}},
              {"parameters", parameters},
              {"fixed_effects", fixed},
              {"score", vector_to_json(report.score)},
              {"fixed_at_boundary", report.fixed_at_boundary},
              {"trace", trace}};
}

json verification_report_to_json(const std::vector<IdentityCheck>& checks, int n, int p, int b,
                                 double elapsed_ms) {
  json items = json::array();
  for (const IdentityCheck& c : checks)
    items.push_back(json{{"name", c.name},
                         {"residual", c.residual},
                         {"tolerance", c.tolerance},
                         {"pass", c.pass}});
  return json{{"schema_version", kReportSchemaVersion},
              {"kind", "verify"},
              {"timestamp", timestamp_block(elapsed_ms)},
              {"n", n},
              {"p", p},
              {"b", b},
              {"all_passed", all_passed(checks)},
              {"checks", items}};
}

namespace {

json number_schema() { return json{{"type", "number"}}; }
json string_schema() { return json{{"type", "string"}}; }

json object_schema(json properties, std::vector<std::string> required) {
  return json{{"type", "object"},
              {"additionalProperties", false},
              {"required", required},
              {"properties", std::move(properties)}};
}

json array_schema(json items) { return json{{"type", "array"}, {"items", std::move(items)}}; }

json timestamp_schema() {
  return object_schema(json{{"written_at", string_schema()}, {"elapsed_ms", number_schema()}},
                       {"written_at", "elapsed_ms"});
}

json fit_report_schema() {
  const json parameter = object_schema(
      json{{"name", string_schema()}, {"estimate", number_schema()},
           {"std_error", number_schema()}},
      {"name", "estimate"});
  const json fixed_effect = object_schema(
      json{{"name", string_schema()}, {"estimate", number_schema()}}, {"name", "estimate"});
  const json trace_record = object_schema(
      json{{"iteration", json{{"type", "integer"}}},
           {"theta", array_schema(number_schema())},
           {"loglik", number_schema()},
           {"score_norm", number_schema()},
           {"step_scale", number_schema()},
           {"halvings", json{{"type", "integer"}}},
           {"levenberg", number_schema()}},
      {"iteration", "theta", "loglik", "score_norm", "step_scale", "halvings", "levenberg"});
  const json components = object_schema(json{{"constant", number_schema()},
                                             {"logdet", number_schema()},
                                             {"quadratic", number_schema()}},
                                        {"constant", "logdet", "quadratic"});
  return object_schema(
      json{{"schema_version", string_schema()},
           {"kind", json{{"enum", json::array({"fit"})}}},
           {"timestamp", timestamp_schema()},
           {"algorithm", json{{"enum", json::array({"newton", "fisher", "ai"})}}},
           {"converged", json{{"type", "boolean"}}},
           {"reason", string_schema()},
           {"iterations", json{{"type", "integer"}}},
           {"loglik", number_schema()},
           {"components", components},
           {"parameters", array_schema(parameter)},
           {"fixed_effects", array_schema(fixed_effect)},
           {"score", array_schema(number_schema())},
           {"fixed_at_boundary", array_schema(json{{"type", "integer"}})},
           {"trace", array_schema(trace_record)}},
      {"schema_version", "kind", "timestamp", "algorithm", "converged", "reason", "iterations",
       "loglik", "components", "parameters", "fixed_effects", "score", "fixed_at_boundary",
       "trace"});
}

json verification_report_schema() {
  const json check = object_schema(json{{"name", string_schema()},
                                        {"residual", number_schema()},
                                        {"tolerance", number_schema()},
                                        {"pass", json{{"type", "boolean"}}}},
                                   {"name", "residual", "tolerance", "pass"});
  return object_schema(json{{"schema_version", string_schema()},
                            {"kind", json{{"enum", json::array({"verify"})}}},
                            {"timestamp", timestamp_schema()},
                            {"n", json{{"type", "integer"}}},
                            {"p", json{{"type", "integer"}}},
                            {"b", json{{"type", "integer"}}},
                            {"all_passed", json{{"type", "boolean"}}},
                            {"checks", array_schema(check)}},
                       {"schema_version", "kind", "timestamp", "n", "p", "b", "all_passed",
                        "checks"});
}

bool type_matches(const json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "boolean") return doc.is_boolean();
  if (type == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
  if (type == "number") return doc.is_number();
  if (type == "null") return doc.is_null();
  return false;
}

void validate_node(const json& doc, const json& schema, const std::string& path,
                   std::vector<std::string>& violations) {
  if (schema.contains("enum")) {
    bool found = false;
    for (const json& allowed : schema["enum"])
      if (doc == allowed) found = true;
    if (!found) violations.push_back(path + ": value not in enum");
    return;
  }
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    if (!type_matches(doc, type)) {
      violations.push_back(path + ": expected " + type);
      return;
    }
    if (type == "object") {
      const json props = schema.value("properties", json::object());
      if (schema.contains("required"))
        for (const json& key : schema["required"])
          if (!doc.contains(key.get<std::string>()))
            violations.push_back(path + ": missing required key '" + key.get<std::string>() +
                                 "'");
      const bool allow_extra = schema.value("additionalProperties", true);
      for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (props.contains(it.key()))
          validate_node(it.value(), props[it.key()], path + "." + it.key(), violations);
        else if (!allow_extra)
          violations.push_back(path + ": unknown key '" + it.key() + "'");
      }
    } else if (type == "array" && schema.contains("items")) {
      int index = 0;
      for (const json& item : doc)
        validate_node(item, schema["items"], path + "[" + std::to_string(index++) + "]",
                      violations);
    }
  }
}

}  // namespace

json report_schema() {
  return json{{"schema_version", kReportSchemaVersion},
              {"fit_report", fit_report_schema()},
              {"verification_report", verification_report_schema()}};
}

std::vector<std::string> validate_against_schema(const json& doc, const json& schema) {
  std::vector<std::string> violations;
  validate_node(doc, schema, "$", violations);
  return violations;
}

}  // namespace reml
