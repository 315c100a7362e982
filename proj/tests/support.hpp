#ifndef REML_TESTS_SUPPORT_HPP
#define REML_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "reml/errors.hpp"
#include "reml/likelihood.hpp"
#include "reml/model.hpp"
#include "reml/simulate.hpp"

namespace testsup {

using reml::Matrix;
using reml::ModelSpec;
using reml::ThetaVector;
using reml::Vector;

/// Deterministic helper RNG for building fixtures (separate from the
/// library's NormalSampler so tests do not depend on what they test).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  double normal() {
    // Box-Muller on two fresh uniforms; no cached spare needed for tests.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  int integer(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

inline Vector normal_vector(Rng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Matrix random_spd(Rng& rng, int n) {
  const Matrix a = random_matrix(rng, n, n);
  return a * a.transpose() + n * Matrix::Identity(n, n);
}

/// Design matrix with an intercept column followed by unit-normal columns.
inline Matrix design_matrix(Rng& rng, int n, int p) {
  Matrix x(n, p);
  x.col(0).setOnes();
  for (int j = 1; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = rng.normal();
  return x;
}

/// Indicator matrix for a random grouping of n rows into q levels.
inline Matrix indicator_block(Rng& rng, int n, int q) {
  Matrix z = Matrix::Zero(n, q);
  for (int i = 0; i < n; ++i) z(i, rng.integer(0, q - 1)) = 1.0;
  return z;
}

/// A random instance over the supported structure families. blocks = 0
/// yields a fixed-effects-only model; ar1 switches the residual family.
/// theta is drawn strictly inside the admissible region and y is a real
/// draw from the model at that theta.
struct Instance {
  ModelSpec spec;
  ThetaVector theta;
};

inline Instance random_instance(std::uint64_t seed, int n, int p, int blocks, bool ar1) {
  Rng rng(seed);
  ModelSpec spec;
  spec.X = design_matrix(rng, n, p);

  std::vector<int> sizes;
  int b = 0;
  for (int k = 0; k < blocks; ++k) {
    sizes.push_back(rng.integer(2, std::min(6, std::max(2, n / 3))));
    b += sizes.back();
  }
  Matrix z(n, b);
  int at = 0;
  for (int size : sizes) {
    z.middleCols(at, size) = indicator_block(rng, n, size);
    at += size;
  }
  spec.Z = z;
  spec.g_structure = reml::VarianceStructure::iid_blocks(sizes);
  spec.r_structure = ar1 ? reml::VarianceStructure::ar1(n) : reml::VarianceStructure::identity(n);

  Vector kappa(blocks + (ar1 ? 1 : 0));
  for (int k = 0; k < blocks; ++k) kappa[k] = rng.uniform(0.2, 1.5);
  if (ar1) kappa[blocks] = rng.uniform(-0.7, 0.7);
  ThetaVector theta(rng.uniform(0.5, 2.0), kappa, blocks);

  reml::SimulationPlan plan;
  plan.spec = spec;
  plan.spec.y = Vector::Zero(n);
  plan.theta_true = theta;
  plan.tau = Vector(p);
  for (int j = 0; j < p; ++j) plan.tau[j] = rng.uniform(-1.0, 1.0);
  plan.seed = seed ^ 0x9e3779b97f4a7c15ull;
  spec.y = reml::draw_response(plan, 0);

  return {std::move(spec), std::move(theta)};
}

/// Runs fn and reports the reml::ErrorCode it threw, if any.
template <typename F>
inline std::optional<reml::ErrorCode> thrown_code(F&& fn) {
  try {
    fn();
  } catch (const reml::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double rel_gap(double a, double ref) { return std::abs(a - ref) / (1.0 + std::abs(ref)); }

inline double rel_gap(const Matrix& a, const Matrix& ref) {
  return max_abs(a - ref) / (1.0 + max_abs(ref));
}

/// Central-difference step for coordinate i that keeps both sample points
/// strictly admissible (variance coordinates stay positive, phi inside its
/// box).
inline double fd_step(const ModelSpec& spec, const ThetaVector& theta, int i) {
  const double v = theta.coord(i);
  double h = 1e-5 * (1.0 + std::abs(v));
  const int ng = spec.g_structure.n_par();
  const bool variance_type = i == 0 || (i <= ng && spec.variance_scale_g());
  if (variance_type) h = std::min(h, 0.45 * v);
  if (i > ng || (i > 0 && i <= ng && !spec.variance_scale_g())) {
    // structure-owned coordinate: respect its declared box
    const auto& st = i <= ng ? spec.g_structure : spec.r_structure;
    const int k = i <= ng ? i - 1 : i - 1 - ng;
    if (std::isfinite(st.lower[k])) h = std::min(h, 0.45 * (v - st.lower[k]));
    if (std::isfinite(st.upper[k])) h = std::min(h, 0.45 * (st.upper[k] - v));
  }
  return h;
}

/// Finite-difference score: central differences of the production
/// likelihood route, one coordinate at a time.
inline Vector fd_score(const ModelSpec& spec, const ThetaVector& theta) {
  const int t = spec.n_parameters();
  Vector g(t);
  for (int i = 0; i < t; ++i) {
    const double h = fd_step(spec, theta, i);
    ThetaVector up = theta, dn = theta;
    up.set_coord(i, theta.coord(i) + h);
    dn.set_coord(i, theta.coord(i) - h);
    g[i] = (reml::loglik_via_C(spec, up).value - reml::loglik_via_C(spec, dn).value) / (2.0 * h);
  }
  return g;
}

/// Finite-difference Jacobian of a vector-valued function of theta.
template <typename F>
inline Matrix fd_jacobian(const ModelSpec& spec, const ThetaVector& theta, F&& func) {
  const int t = spec.n_parameters();
  Matrix j(t, t);
  for (int i = 0; i < t; ++i) {
    const double h = fd_step(spec, theta, i);
    ThetaVector up = theta, dn = theta;
    up.set_coord(i, theta.coord(i) + h);
    dn.set_coord(i, theta.coord(i) - h);
    const Vector d = (func(up) - func(dn)) / (2.0 * h);
    j.row(i) = d.transpose();
  }
  return j;
}

}  // namespace testsup

#endif  // REML_TESTS_SUPPORT_HPP
