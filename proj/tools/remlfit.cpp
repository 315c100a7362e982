// remlfit: REML variance-component estimation for linear mixed models.
//
// Subcommands: fit, loglik, info, simulate, verify, schema. Data comes in
// as headered CSV, the model as a key-value config file; reports leave as
// JSON. Exit codes: 0 success, 1 input error, 2 non-convergence,
// 3 numerical failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"

#include "reml/dense_io.hpp"
#include "reml/errors.hpp"
#include "reml/infomat.hpp"
#include "reml/ingest.hpp"
#include "reml/likelihood.hpp"
#include "reml/mme.hpp"
#include "reml/optimizer.hpp"
#include "reml/report.hpp"
#include "reml/simulate.hpp"
#include "reml/verify.hpp"

namespace {

using nlohmann::json;
using namespace reml;

double elapsed_ms_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  require(out.good(), ErrorCode::ParseError, "cannot open output file '" + out_path + "'");
  out << doc.dump(2) << "\n";
}

ThetaVector parse_theta(const std::string& text, const ModelSpec& spec) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "--theta entries must be numbers, got '" + item + "'");
    }
  }
  require(static_cast<int>(values.size()) == spec.n_parameters(), ErrorCode::ParseError,
          "--theta needs " + std::to_string(spec.n_parameters()) + " values, got " +
              std::to_string(values.size()));
  Vector flat(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) flat[i] = values[i];
  return ThetaVector::from_flat(flat, spec.g_structure.n_par());
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json loglik_to_json(const LikelihoodValue& lv) {
  return json{{"route", lv.route},
              {"value", lv.value},
              {"constant", lv.constant},
              {"logdet", lv.logdet},
              {"quadratic", lv.quadratic}};
}

void dump_c_matrix(const ModelSpec& spec, const ThetaVector& theta, const std::string& path) {
  const MMESystem sys = assemble(spec, theta);
  write_matrix_market(sys.C, path);
}

struct CommonArgs {
  std::string data_path;
  std::string model_path;
  std::string theta_text;
  std::string out_path;
  std::string dump_c_path;
};

void add_io_options(CLI::App* cmd, CommonArgs& args, bool need_theta) {
  cmd->add_option("--data", args.data_path, "input data CSV (headered)")->required();
  cmd->add_option("--model", args.model_path, "model config file")->required();
  auto* theta = cmd->add_option("--theta", args.theta_text,
                                "comma-separated theta = (sigma2; kappa)");
  if (need_theta) theta->required();
  cmd->add_option("--out", args.out_path, "write the JSON report here (default: stdout)");
  cmd->add_option("--dump-c", args.dump_c_path,
                  "dump the MME coefficient matrix in Matrix Market form");
}

int run(int argc, char** argv) {
  CLI::App app{"REML variance-component estimation for linear mixed models"};
  app.require_subcommand(1);

  CommonArgs fit_args;
  std::string algorithm = "ai";
  int max_iterations = 100;
  double gradient_tol = 1e-6, loglik_tol = 1e-8;
  bool trace = false;
  std::uint64_t seed = 1;

  CLI::App* fit = app.add_subcommand("fit", "estimate variance components");
  add_io_options(fit, fit_args, false);
  fit->add_option("--algorithm", algorithm, "newton | fisher | ai")
      ->check(CLI::IsMember({"newton", "fisher", "ai"}));
  fit->add_option("--maxit", max_iterations, "iteration cap");
  fit->add_option("--gtol", gradient_tol, "score tolerance");
  fit->add_option("--ltol", loglik_tol, "likelihood-change tolerance");
  fit->add_flag("--trace", trace, "stream per-iteration JSON lines to stderr");
  fit->add_option("--seed", seed, "accepted for interface symmetry; fitting is deterministic");

  CommonArgs loglik_args;
  CLI::App* loglik = app.add_subcommand("loglik", "evaluate the restricted log-likelihood");
  add_io_options(loglik, loglik_args, true);

  CommonArgs info_args;
  CLI::App* info = app.add_subcommand("info", "score and information matrices at theta");
  add_io_options(info, info_args, true);

  CommonArgs sim_args;
  int replicates = 1;
  std::uint64_t sim_seed = 1;
  std::string tau_text;
  CLI::App* simulate = app.add_subcommand("simulate", "draw responses from the fitted design");
  add_io_options(simulate, sim_args, true);
  simulate->get_option("--out")->required();
  simulate->add_option("--replicates", replicates, "number of datasets")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "RNG seed; replicate r uses substream (seed, r)");
  simulate->add_option("--tau", tau_text, "comma-separated fixed effects (default: OLS fit)");

  CommonArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "run the closed-form identity suite");
  add_io_options(verify, verify_args, false);

  std::string schema_out;
  CLI::App* schema = app.add_subcommand("schema", "print the JSON report schema");
  schema->add_option("--out", schema_out, "write the schema here (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are input errors
  }

  const char* threads_env = std::getenv("REMLFIT_THREADS");
  if (threads_env != nullptr) Eigen::setNbThreads(std::max(1, std::atoi(threads_env)));

  const auto start = std::chrono::steady_clock::now();

  if (fit->parsed()) {
    IngestResult ing = ingest(fit_args.data_path, fit_args.model_path);
    FitOptions options;
    options.algorithm = algorithm_from_name(algorithm);
    options.max_iterations = max_iterations;
    options.gradient_tol = gradient_tol;
    options.loglik_tol = loglik_tol;
    if (!fit_args.theta_text.empty()) options.theta0 = parse_theta(fit_args.theta_text, ing.spec);
    if (trace)
      options.on_iteration = [](const IterationRecord& rec) {
        std::cerr << iteration_record_to_json(rec).dump() << "\n";
      };

    FitReport report = fit_model(ing.spec, options);
    const MMESystem sys = assemble(ing.spec, report.theta_hat);
    const MMESolution sol = solve_mme(sys);
    if (!fit_args.dump_c_path.empty()) write_matrix_market(sys.C, fit_args.dump_c_path);

    const json doc = fit_report_to_json(report, loglik_via_C(sys), ing.fixed_names, sol.tau_hat,
                                        elapsed_ms_since(start));
    emit(doc, fit_args.out_path);
    return report.converged ? 0 : 2;
  }

  if (loglik->parsed()) {
    IngestResult ing = ingest(loglik_args.data_path, loglik_args.model_path);
    const ThetaVector theta = parse_theta(loglik_args.theta_text, ing.spec);
    if (!loglik_args.dump_c_path.empty()) dump_c_matrix(ing.spec, theta, loglik_args.dump_c_path);
    json routes = json::array();
    routes.push_back(loglik_to_json(loglik_via_contrast(ing.spec, theta)));
    routes.push_back(loglik_to_json(loglik_via_V(ing.spec, theta)));
    routes.push_back(loglik_to_json(loglik_via_C(ing.spec, theta)));
    emit(json{{"schema_version", kReportSchemaVersion},
              {"kind", "loglik"},
              {"theta", vector_to_json(theta.flat())},
              {"routes", routes}},
         loglik_args.out_path);
    return 0;
  }

  if (info->parsed()) {
    IngestResult ing = ingest(info_args.data_path, info_args.model_path);
    const ThetaVector theta = parse_theta(info_args.theta_text, ing.spec);
    if (!info_args.dump_c_path.empty()) dump_c_matrix(ing.spec, theta, info_args.dump_c_path);
    const DerivativeBundle bundle = derivative_bundle(ing.spec, theta);
    emit(json{{"schema_version", kReportSchemaVersion},
              {"kind", "info"},
              {"theta", vector_to_json(theta.flat())},
              {"parameter_names", ing.spec.parameter_names()},
              {"score", vector_to_json(bundle.score)},
              {"observed", matrix_to_json(bundle.observed)},
              {"fisher", matrix_to_json(bundle.fisher)},
              {"average", matrix_to_json(bundle.average)},
              {"splitting", matrix_to_json(bundle.splitting)}},
         info_args.out_path);
    return 0;
  }

  if (simulate->parsed()) {
    const DataTable table = DataTable::read_csv_file(sim_args.data_path);
    const ModelConfig config = ModelConfig::parse_file(sim_args.model_path);
    IngestResult ing = build_design(table, config);

    SimulationPlan plan;
    plan.spec = ing.spec;
    plan.theta_true = parse_theta(sim_args.theta_text, ing.spec);
    plan.replicates = replicates;
    plan.seed = sim_seed;
    if (tau_text.empty()) {
      // Default tau: OLS fit of the observed response on X.
      plan.tau = (ing.spec.X.transpose() * ing.spec.X)
                     .ldlt()
                     .solve(ing.spec.X.transpose() * ing.spec.y);
    } else {
      std::vector<double> values;
      std::stringstream ss(tau_text);
      std::string item;
      while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
      require(static_cast<int>(values.size()) == ing.spec.p(), ErrorCode::ParseError,
              "--tau needs p = " + std::to_string(ing.spec.p()) + " values");
      plan.tau.resize(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) plan.tau[i] = values[i];
    }

    const int response_col = table.column_index(config.response);
    for (int r = 0; r < replicates; ++r) {
      const Vector y = draw_response(plan, r);
      std::ofstream out(sim_args.out_path + "_r" + std::to_string(r) + ".csv");
      require(out.good(), ErrorCode::ParseError, "cannot write simulated dataset");
      out.precision(17);
      for (int c = 0; c < table.n_columns(); ++c)
        out << (c ? "," : "") << table.columns[c].name;
      out << "\n";
      for (int row = 0; row < table.rows; ++row) {
        for (int c = 0; c < table.n_columns(); ++c) {
          if (c) out << ",";
          if (c == response_col)
            out << y[row];
          else
            out << table.columns[c].raw[row];
        }
        out << "\n";
      }
    }

    emit(json{{"schema_version", kReportSchemaVersion},
              {"kind", "simulate-truth"},
              {"seed", sim_seed},
              {"replicates", replicates},
              {"parameter_names", ing.spec.parameter_names()},
              {"theta_true", vector_to_json(plan.theta_true.flat())},
              {"tau", vector_to_json(plan.tau)}},
         sim_args.out_path + "_truth.json");
    return 0;
  }

  if (verify->parsed()) {
    IngestResult ing = ingest(verify_args.data_path, verify_args.model_path);
    const ThetaVector theta = verify_args.theta_text.empty()
                                  ? default_start(ing.spec)
                                  : parse_theta(verify_args.theta_text, ing.spec);
    const std::vector<IdentityCheck> checks = run_identity_suite(ing.spec, theta);
    const json doc = verification_report_to_json(checks, ing.spec.n(), ing.spec.p(),
                                                 ing.spec.b(), elapsed_ms_since(start));
    emit(doc, verify_args.out_path);
    return all_passed(checks) ? 0 : 3;
  }

  emit(report_schema(), schema_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error [" << e.code_name() << "]: " << e.what() << "\n";
    return error_exit_class(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
