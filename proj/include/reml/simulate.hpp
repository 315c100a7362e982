#ifndef REML_SIMULATE_HPP
#define REML_SIMULATE_HPP

#include <cstdint>
#include <random>

#include "reml/model.hpp"

namespace reml {

/// Deterministic standard-normal stream. The uniforms are built from raw
/// mt19937_64 output and fed through Box-Muller, so a (seed, stream) pair
/// yields the same values on every platform; std::normal_distribution is
/// avoided because its algorithm is implementation-defined.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed, std::uint64_t stream = 0);
  double next();
  Vector draw(int n);

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// A Monte-Carlo plan: fixed design and true parameters, replicated draws.
/// Replicate r uses substream (seed, r), so replicates are independent and
/// may be generated in any order or in parallel.
struct SimulationPlan {
  ModelSpec spec;          // template; spec.y is ignored for generation
  ThetaVector theta_true;
  Vector tau;              // fixed effects, length p
  int replicates = 1;
  std::uint64_t seed = 1;
};

/// y = X tau + A z with A A' = V(theta_true) from the permuted LDL^T square
/// root A = P L D^{1/2} and z standard normal.
Vector draw_response(const SimulationPlan& plan, int replicate);

/// Balanced one-way random-effects model: X = 1, Z = group indicators,
/// y_ij = mu + u_j + e_ij. Carries the ANOVA closed-form REML targets
/// sigma_e2 = MSE, sigma_u2 = max(0, (MSA - MSE) / k), which equal the
/// constrained REML estimates whenever the latter is interior.
struct OnewayFixture {
  ModelSpec spec;
  double mu = 0.0;
  double msa = 0.0;
  double mse = 0.0;
  double sigma_e2_hat = 0.0;
  double sigma_u2_hat = 0.0;
  bool interior = false;  // (MSA - MSE)/k clear of the boundary
};

OnewayFixture balanced_oneway_fixture(int groups, int per_group, double sigma_u2,
                                      double sigma_e2, std::uint64_t seed);

}  // namespace reml

#endif  // REML_SIMULATE_HPP
