#ifndef REML_OPTIMIZER_HPP
#define REML_OPTIMIZER_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reml/model.hpp"

namespace reml {

enum class Algorithm { Newton, Fisher, AI };

Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm a);

/// Knobs of the iterative fits. Convergence requires both a small score,
/// ||s||_inf <= gradient_tol * (1 + |loglik|), and a small likelihood change,
/// |delta loglik| <= loglik_tol (waived on the first iterate).
struct IterationRecord;

struct FitOptions {
  Algorithm algorithm = Algorithm::AI;
  int max_iterations = 100;
  double gradient_tol = 1e-6;
  double loglik_tol = 1e-8;
  int max_step_halvings = 20;
  double boundary_eps = 1e-8;
  std::optional<ThetaVector> theta0;  // default policy when absent
  std::function<void(const IterationRecord&)> on_iteration;  // trace streaming
};

struct IterationRecord {
  int iteration = 0;
  Vector theta;
  double loglik = 0.0;
  double score_norm = 0.0;
  double step_scale = 1.0;   // accepted step fraction (1 = full step)
  int halvings = 0;
  double levenberg = 0.0;    // Newton shift applied this iteration
};

struct FitReport {
  ThetaVector theta_hat;
  double loglik = 0.0;
  Vector score;
  Matrix information;       // matrix the algorithm used, at the optimum
  Vector std_errors;        // sqrt(diag(I_A^-1)); empty if unavailable
  std::vector<IterationRecord> trace;
  std::vector<std::string> parameter_names;
  std::vector<int> fixed_at_boundary;  // flat indices pinned during the fit
  bool converged = false;
  std::string reason;
  int iterations = 0;       // number of (theta, loglik, score) evaluations
  std::string algorithm;
};

/// Default start: sigma2 = sample variance of the OLS residuals, each
/// G-side component an equal 1/r split (on its own scale), phi = 0.
ThetaVector default_start(const ModelSpec& spec);

/// Newton-Raphson on the observed information (Levenberg-shifted when
/// indefinite), Fisher scoring, and average-information REML. All share
/// step-halving, boundary clamping and the two-part convergence test.
FitReport fit_newton(const ModelSpec& spec, const FitOptions& options = {});
FitReport fit_fisher(const ModelSpec& spec, const FitOptions& options = {});
FitReport fit_ai(const ModelSpec& spec, const FitOptions& options = {});

/// Dispatch on options.algorithm.
FitReport fit_model(const ModelSpec& spec, const FitOptions& options = {});

}  // namespace reml

#endif  // REML_OPTIMIZER_HPP
