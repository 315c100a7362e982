#include "reml/simulate.hpp"

#include <cmath>
#include <numbers>

#include "reml/errors.hpp"
#include "reml/ldlt.hpp"

namespace reml {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

NormalSampler::NormalSampler(std::uint64_t seed, std::uint64_t stream)
    : rng_(seeded_engine(seed, stream)) {}

double NormalSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 53-bit uniforms; u1 shifted into (0, 1] so the log is finite.
  const double scale = 0x1.0p-53;
  const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * scale;
  const double u2 = static_cast<double>(rng_() >> 11) * scale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vector NormalSampler::draw(int n) {
  Vector z(n);
  for (int i = 0; i < n; ++i) z[i] = next();
  return z;
}

Vector draw_response(const SimulationPlan& plan, int replicate) {
  require(replicate >= 0, ErrorCode::IndexOutOfRange, "replicate index must be nonnegative");
  require(plan.tau.size() == plan.spec.p(), ErrorCode::DimensionMismatch,
          "tau length != p");
  const Matrix v = variance_value(plan.spec, plan.theta_true);
  SymmetricFactorization f = ldlt_factor(v);
  require(f.positive_definite(), ErrorCode::NotPositiveDefinite,
          "V(theta_true) not positive definite");

  const int n = plan.spec.n();
  NormalSampler sampler(plan.seed, static_cast<std::uint64_t>(replicate));
  const Vector z = sampler.draw(n);

  // A z with A = P L D^{1/2}: scale, apply the unit lower factor, unpermute.
  Vector w = f.pivots().cwiseSqrt().cwiseProduct(z);
  w = f.unit_lower() * w;
  Vector az(n);
  const std::vector<int>& perm = f.permutation();
  for (int k = 0; k < n; ++k) az[perm[k]] = w[k];
  return plan.spec.X * plan.tau + az;
}

OnewayFixture balanced_oneway_fixture(int groups, int per_group, double sigma_u2,
                                      double sigma_e2, std::uint64_t seed) {
  require(groups >= 2, ErrorCode::DimensionMismatch, "need at least two groups");
  require(per_group >= 2, ErrorCode::DimensionMismatch,
          "need at least two observations per group");
  require(sigma_u2 >= 0 && sigma_e2 > 0, ErrorCode::InadmissibleParameter,
          "variance components must be nonnegative, residual positive");

  const int m = groups, k = per_group, n = m * k;
  OnewayFixture fx;
  fx.mu = 10.0;

  NormalSampler sampler(seed);
  Vector u = std::sqrt(sigma_u2) * sampler.draw(m);
  Vector y(n);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < k; ++i) y[j * k + i] = fx.mu + u[j] + std::sqrt(sigma_e2) * sampler.next();

  Matrix z = Matrix::Zero(n, m);
  for (int j = 0; j < m; ++j) z.block(j * k, j, k, 1).setOnes();

  fx.spec.y = y;
  fx.spec.X = Matrix::Ones(n, 1);
  fx.spec.Z = z;
  fx.spec.g_structure = VarianceStructure::iid_blocks({m});
  fx.spec.r_structure = VarianceStructure::identity(n);
  fx.spec.theta_names = {"sigma2", "sigma2_u"};
  fx.spec.validate();

  // ANOVA decomposition: MSA between groups, MSE within.
  const double grand = y.mean();
  double ssa = 0.0, sse = 0.0;
  for (int j = 0; j < m; ++j) {
    const double gmean = y.segment(j * k, k).mean();
    ssa += k * (gmean - grand) * (gmean - grand);
    for (int i = 0; i < k; ++i) {
      const double d = y[j * k + i] - gmean;
      sse += d * d;
    }
  }
  fx.msa = ssa / (m - 1);
  fx.mse = sse / (m * (k - 1.0));
  fx.sigma_e2_hat = fx.mse;
  fx.sigma_u2_hat = std::max(0.0, (fx.msa - fx.mse) / k);
  fx.interior = (fx.msa - fx.mse) / k > 10.0 * 1e-8;
  return fx;
}

}  // namespace reml
