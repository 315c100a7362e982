#include "reml/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reml/errors.hpp"
#include "reml/infomat.hpp"
#include "reml/ldlt.hpp"
#include "reml/likelihood.hpp"
#include "reml/mme.hpp"
#include "reml/projector.hpp"

namespace reml {

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "newton") return Algorithm::Newton;
  if (name == "fisher") return Algorithm::Fisher;
  if (name == "ai") return Algorithm::AI;
  fail(ErrorCode::ParseError, "unknown algorithm '" + name + "' (newton|fisher|ai)");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Newton: return "newton";
    case Algorithm::Fisher: return "fisher";
    case Algorithm::AI: return "ai";
  }
  return "?";
}

ThetaVector default_start(const ModelSpec& spec) {
  spec.validate();
  // OLS residual variance sets the overall scale.
  const Vector e = spec.y - projector(spec.X) * spec.y;
  const double s2 = e.squaredNorm() / std::max(1, spec.n() - 1);

  const int ng = spec.g_structure.n_par();
  const int np = spec.r_structure.n_par();
  Vector kappa(ng + np);
  for (int i = 0; i < ng; ++i)
    kappa[i] = spec.variance_scale_g() ? s2 / ng : 1.0 / ng;
  for (int j = 0; j < np; ++j) kappa[ng + j] = 0.0;
  return ThetaVector(s2, kappa, ng);
}

namespace {

struct Bounds {
  Vector lo, hi;
};

// Effective optimization box: variance-type coordinates stay a boundary_eps
// above zero; the rest use the structures' admissible regions.
Bounds make_bounds(const ModelSpec& spec, double eps) {
  const int t = spec.n_parameters();
  Bounds bounds;
  bounds.lo.resize(t);
  bounds.hi.resize(t);
  bounds.lo[0] = eps;
  bounds.hi[0] = std::numeric_limits<double>::infinity();
  const int ng = spec.g_structure.n_par();
  for (int i = 0; i < ng; ++i) {
    bounds.lo[1 + i] = std::max(spec.g_structure.lower[i],
                                spec.variance_scale_g() ? eps : spec.g_structure.lower[i]);
    bounds.hi[1 + i] = spec.g_structure.upper[i];
  }
  for (int j = 0; j < spec.r_structure.n_par(); ++j) {
    bounds.lo[1 + ng + j] = spec.r_structure.lower[j];
    bounds.hi[1 + ng + j] = spec.r_structure.upper[j];
  }
  return bounds;
}

Vector clamp_into(const Vector& t, const Bounds& bounds) {
  Vector out = t;
  for (int i = 0; i < t.size(); ++i) out[i] = std::clamp(out[i], bounds.lo[i], bounds.hi[i]);
  return out;
}

struct Evaluation {
  double loglik = 0.0;
  Vector score;
  Matrix info;
};

Evaluation evaluate(const ModelSpec& spec, const ThetaVector& theta, const MMESystem& sys,
                    Algorithm alg) {
  Evaluation ev;
  if (alg == Algorithm::AI) {
    FastDerivatives fd = fast_derivatives(spec, theta, sys);
    ev.loglik = fd.loglik;
    ev.score = fd.score;
    ev.info = fd.average;
  } else {
    ev.loglik = loglik_via_C(sys).value;
    const DerivativeBundle bundle = derivative_bundle(spec, theta);
    ev.score = bundle.score;
    ev.info = alg == Algorithm::Newton ? bundle.observed : bundle.fisher;
  }
  return ev;
}

Matrix submatrix(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

// Solve M d = s on the free coordinates. Newton gets a doubling Levenberg
// shift when M is not positive definite; the other algorithms must come
// with a usable matrix.
Vector solve_direction(const Matrix& m, const Vector& s, Algorithm alg, double& shift_used) {
  shift_used = 0.0;
  const int k = static_cast<int>(s.size());
  double shift = 0.0;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  for (int attempt = 0; attempt < 80; ++attempt) {
    try {
      SymmetricFactorization f = ldlt_factor(Matrix(m + shift * Matrix::Identity(k, k)));
      if (f.positive_definite()) {
        shift_used = shift;
        return f.solve(s);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroPivot) throw;
    }
    if (alg != Algorithm::Newton)
      fail(ErrorCode::SingularInformation, "information matrix not positive definite");
    shift = (shift == 0.0) ? 1e-6 * scale : 2.0 * shift;
    if (shift > 1e12 * scale) break;
  }
  fail(ErrorCode::SingularInformation, "information matrix unusable even after shifting");
}

FitReport run_fit(const ModelSpec& spec, FitOptions options, Algorithm alg) {
  spec.validate();
  options.algorithm = alg;
  require(options.max_iterations >= 1 && options.gradient_tol > 0 && options.loglik_tol > 0,
          ErrorCode::InadmissibleParameter, "invalid fit options");

  const int t = spec.n_parameters();
  const Bounds bounds = make_bounds(spec, options.boundary_eps);

  ThetaVector theta = options.theta0 ? *options.theta0 : default_start(spec);
  require(theta.size() == t, ErrorCode::DimensionMismatch, "theta0 has wrong length");
  theta = ThetaVector::from_flat(clamp_into(theta.flat(), bounds), theta.n_gamma);

  FitReport report;
  report.parameter_names = spec.parameter_names();
  report.algorithm = algorithm_name(alg);

  std::vector<bool> fixed(t, false);
  std::vector<int> outward(t, 0);

  MMESystem sys = assemble(spec, theta);
  Evaluation ev = evaluate(spec, theta, sys, alg);
  double prev_loglik = std::numeric_limits<double>::quiet_NaN();
  double step_scale = 1.0, levenberg = 0.0;
  int halvings = 0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Vector flat = theta.flat();

    // Boundary bookkeeping: a coordinate pressed into its bound by the
    // score for three consecutive iterations gets pinned there.  Coordinates
    // pressing right now are also held out of this iteration's direction
    // solve, so the remaining coordinates get an uncontaminated step.
    std::vector<int> free_idx, active_idx;
    for (int i = 0; i < t; ++i) {
      if (fixed[i]) continue;
      const bool at_lo = flat[i] <= bounds.lo[i];
      const bool at_hi = flat[i] >= bounds.hi[i];
      const bool pressing = (at_lo && ev.score[i] < 0) || (at_hi && ev.score[i] > 0);
      outward[i] = pressing ? outward[i] + 1 : 0;
      if (outward[i] >= 3) {
        fixed[i] = true;
        report.fixed_at_boundary.push_back(i);
        continue;
      }
      free_idx.push_back(i);
      if (!pressing) active_idx.push_back(i);
    }

    double score_norm = 0.0;
    for (int i : free_idx) score_norm = std::max(score_norm, std::abs(ev.score[i]));

    IterationRecord rec;
    rec.iteration = iter;
    rec.theta = flat;
    rec.loglik = ev.loglik;
    rec.score_norm = score_norm;
    rec.step_scale = step_scale;
    rec.halvings = halvings;
    rec.levenberg = levenberg;
    report.trace.push_back(rec);
    if (options.on_iteration) options.on_iteration(rec);

    const bool grad_ok = score_norm <= options.gradient_tol * (1.0 + std::abs(ev.loglik));
    const bool dl_ok =
        std::isnan(prev_loglik) || std::abs(ev.loglik - prev_loglik) <= options.loglik_tol;
    if (grad_ok && dl_ok) {
      report.converged = true;
      report.reason = "score and likelihood-change tolerances met";
      break;
    }
    if (free_idx.empty())
      fail(ErrorCode::BoundaryStall, "every parameter pinned at a boundary without convergence");
    if (iter + 1 == options.max_iterations) {
      report.reason = "maximum iterations reached";
      break;
    }

    Vector delta;
    if (!active_idx.empty()) {
      Vector s_active(active_idx.size());
      for (std::size_t i = 0; i < active_idx.size(); ++i) s_active[i] = ev.score[active_idx[i]];
      delta = solve_direction(submatrix(ev.info, active_idx), s_active, alg, levenberg);
    }

    // Step-halving: shrink until the likelihood stops decreasing.
    bool accepted = false;
    double alpha = 1.0;
    for (halvings = 0; halvings <= options.max_step_halvings; ++halvings, alpha *= 0.5) {
      Vector candidate = flat;
      for (std::size_t i = 0; i < active_idx.size(); ++i)
        candidate[active_idx[i]] += alpha * delta[i];
      candidate = clamp_into(candidate, bounds);
      ThetaVector trial = ThetaVector::from_flat(candidate, theta.n_gamma);
      try {
        MMESystem trial_sys = assemble(spec, trial);
        const double trial_loglik = loglik_via_C(trial_sys).value;
        if (trial_loglik >= ev.loglik - 1e-12) {
          prev_loglik = ev.loglik;
          theta = trial;
          sys = std::move(trial_sys);
          ev = evaluate(spec, theta, sys, alg);
          step_scale = alpha;
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotPositiveDefinite && e.code() != ErrorCode::ZeroPivot)
          throw;  // inadmissible trial: treat like a failed step and halve
      }
    }
    if (!accepted) {
      report.reason = "step halving exhausted without improving the likelihood";
      break;
    }
  }

  if (report.reason.empty()) report.reason = "maximum iterations reached";
  report.iterations = static_cast<int>(report.trace.size());
  report.theta_hat = theta;
  report.loglik = ev.loglik;
  report.score = ev.score;
  report.information = ev.info;

  // Standard errors from the average information at the optimum.
  try {
    const Matrix ia = alg == Algorithm::AI ? ev.info : average_information_fast(spec, theta);
    SymmetricFactorization f = ldlt_factor(ia);
    if (f.positive_definite()) {
      const Matrix cov = f.solve(Matrix(Matrix::Identity(t, t)));
      report.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    }
  } catch (const Error&) {
    // leave std_errors empty when the information matrix is unusable
  }
  return report;
}

}  // namespace

FitReport fit_newton(const ModelSpec& spec, const FitOptions& options) {
  return run_fit(spec, options, Algorithm::Newton);
}

FitReport fit_fisher(const ModelSpec& spec, const FitOptions& options) {
  return run_fit(spec, options, Algorithm::Fisher);
}

FitReport fit_ai(const ModelSpec& spec, const FitOptions& options) {
  return run_fit(spec, options, Algorithm::AI);
}

FitReport fit_model(const ModelSpec& spec, const FitOptions& options) {
  return run_fit(spec, options, options.algorithm);
}

}  // namespace reml
