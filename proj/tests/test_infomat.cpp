#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "reml/infomat.hpp"
#include "reml/likelihood.hpp"
#include "reml/projector.hpp"
#include "reml/simulate.hpp"
#include "support.hpp"

using namespace reml;
using testsup::max_abs;
using testsup::rel_gap;
using testsup::Rng;

namespace {

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("fixed-effects-only model has closed-form derivatives") {
  Rng rng(901);
  const int n = 18, p = 3;
  ModelSpec spec;
  spec.X = testsup::design_matrix(rng, n, p);
  spec.Z = Matrix(n, 0);
  spec.g_structure = VarianceStructure::iid_blocks({});
  spec.r_structure = VarianceStructure::identity(n);
  spec.y = testsup::normal_vector(rng, n) * 1.4;

  const Matrix q = Matrix::Identity(n, n) - projector(spec.X);
  const double rss = spec.y.dot(q * spec.y);

  const double sigma2 = 0.9;
  const DerivativeBundle d = derivative_bundle(spec, ThetaVector(sigma2, Vector(0), 0));
  REQUIRE(d.score.size() == 1);

  // score = -1/2 {(n - p)/sigma2 - RSS/sigma2^2}, zero at RSS/(n - p)
  const double expected_score =
      -0.5 * ((n - p) / sigma2 - rss / (sigma2 * sigma2));
  CHECK(d.score[0] == doctest::Approx(expected_score).epsilon(1e-10));
  const double sigma2_hat = rss / (n - p);
  CHECK(score(spec, ThetaVector(sigma2_hat, Vector(0), 0))[0] ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-10));

  // fisher = (n - p)/(2 sigma2^2); observed = RSS/sigma2^3 - (n - p)/(2 sigma2^2)
  const double s4 = sigma2 * sigma2;
  CHECK(d.fisher(0, 0) == doctest::Approx((n - p) / (2.0 * s4)).epsilon(1e-10));
  CHECK(d.observed(0, 0) ==
        doctest::Approx(rss / (s4 * sigma2) - (n - p) / (2.0 * s4)).epsilon(1e-10));
  // linear family: I_A is exactly the midpoint of I_O and I_F
  CHECK(d.average(0, 0) ==
        doctest::Approx(0.5 * (d.observed(0, 0) + d.fisher(0, 0))).epsilon(1e-12));
}

TEST_CASE("score matches central differences of the likelihood") {
  for (std::uint64_t seed : {910ull, 911ull, 912ull, 913ull}) {
    const bool ar1 = seed % 2 == 1;
    const testsup::Instance inst =
        testsup::random_instance(seed, 16 + static_cast<int>(seed % 12), 2,
                                 static_cast<int>(seed % 2) + 1, ar1);
    const Vector analytic = score(inst.spec, inst.theta);
    const Vector numeric = testsup::fd_score(inst.spec, inst.theta);
    for (int i = 0; i < analytic.size(); ++i)
      CHECK(rel_gap(analytic[i], numeric[i]) <= 1e-5);
  }
}

TEST_CASE("observed information matches the differenced score") {
  for (std::uint64_t seed : {920ull, 921ull}) {
    const testsup::Instance inst =
        testsup::random_instance(seed, 14, 2, 1, seed == 921);
    const Matrix analytic = observed_information(inst.spec, inst.theta);
    const Matrix numeric = -testsup::fd_jacobian(
        inst.spec, inst.theta,
        [&](const ThetaVector& t) { return score(inst.spec, t); });
    CHECK(max_abs(analytic - numeric) / (1.0 + max_abs(analytic)) <= 1e-4);
  }
}

TEST_CASE("information matrices are symmetric and appropriately signed") {
  const testsup::Instance inst = testsup::random_instance(930, 22, 3, 2, true);
  const DerivativeBundle d = derivative_bundle(inst.spec, inst.theta);
  CHECK(max_abs(d.observed - d.observed.transpose()) <= 1e-10);
  CHECK(max_abs(d.fisher - d.fisher.transpose()) <= 1e-10);
  CHECK(max_abs(d.average - d.average.transpose()) <= 1e-10);
  CHECK(max_abs(d.splitting - d.splitting.transpose()) <= 1e-10);
  // Fisher is an expectation of a Gram matrix and I_A is itself one
  CHECK(min_eigenvalue(d.fisher) >= -1e-10);
  CHECK(min_eigenvalue(d.average) >= -1e-10);
}

TEST_CASE("splitting residual vanishes exactly for linear families") {
  const testsup::Instance inst = testsup::random_instance(940, 20, 2, 2, false);
  const DerivativeBundle d = derivative_bundle(inst.spec, inst.theta);
  CHECK(max_abs(d.splitting) <= 1e-9);
  CHECK(max_abs(d.average - 0.5 * (d.observed + d.fisher)) <= 1e-9);
}

TEST_CASE("splitting residual carries the curvature for AR(1) families") {
  const testsup::Instance inst = testsup::random_instance(941, 24, 2, 1, true);
  const DerivativeBundle d = derivative_bundle(inst.spec, inst.theta);
  // identity: (I_O + I_F)/2 - I_A equals the quarter-V-double-dot term
  CHECK(max_abs(0.5 * (d.observed + d.fisher) - d.average - d.splitting) <= 1e-9);
  CHECK(max_abs(d.splitting) > 1e-4);  // genuinely nonlinear in phi

  // recompute the splitting term from the dense projector directly
  const Matrix p = dense_projector(inst.spec, inst.theta);
  const int q = 2 + inst.theta.n_gamma;  // sigma2, one block, phi
  Matrix direct = Matrix::Zero(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const Matrix vddot =
          variance_second_derivative(inst.spec, inst.theta, i, j);
      const Vector py = p * inst.spec.y;
      direct(i, j) = 0.25 * ((p * vddot).trace() - py.dot(vddot * py));
    }
  CHECK(max_abs(d.splitting - direct) <= 1e-9);
}

TEST_CASE("factorized path reproduces the dense evaluations") {
  for (std::uint64_t seed : {950ull, 951ull, 952ull}) {
    const int blocks = seed == 952 ? 0 : 2;
    const bool ar1 = seed == 951;
    const testsup::Instance inst = testsup::random_instance(seed, 26, 3, blocks, ar1);

    const FastDerivatives fast = fast_derivatives(inst.spec, inst.theta);
    const DerivativeBundle dense = derivative_bundle(inst.spec, inst.theta);
    const double lb = loglik_via_V(inst.spec, inst.theta).value;

    CHECK(rel_gap(fast.loglik, lb) <= 1e-8);
    CHECK(max_abs(fast.score - dense.score) / (1.0 + max_abs(dense.score)) <= 1e-8);
    CHECK(max_abs(fast.average - dense.average) / (1.0 + max_abs(dense.average)) <= 1e-8);
    CHECK(max_abs(average_information_fast(inst.spec, inst.theta) - dense.average) /
              (1.0 + max_abs(dense.average)) <=
          1e-8);
    CHECK(max_abs(score_fast(inst.spec, inst.theta) - dense.score) /
              (1.0 + max_abs(dense.score)) <=
          1e-8);
  }
}

TEST_CASE("fast derivatives factor C exactly once per call") {
  const testsup::Instance inst = testsup::random_instance(960, 30, 2, 2, false);
  std::uint64_t before = mme_factorization_count();
  fast_derivatives(inst.spec, inst.theta);
  CHECK(mme_factorization_count() - before == 1);

  before = mme_factorization_count();
  average_information_fast(inst.spec, inst.theta);
  CHECK(mme_factorization_count() - before == 1);

  // reusing an assembled system adds no further factorizations
  const MMESystem sys = assemble(inst.spec, inst.theta);
  before = mme_factorization_count();
  fast_derivatives(inst.spec, inst.theta, sys);
  CHECK(mme_factorization_count() - before == 0);
}

TEST_CASE("quadratic form y'Py has expectation tr(PV) under the model") {
  const testsup::Instance base = testsup::random_instance(970, 12, 2, 1, false);
  const Matrix p = dense_projector(base.spec, base.theta);
  const Matrix v = variance_value(base.spec, base.theta);
  const double target = (p * v).trace();  // equals n - p by the projector identities
  CHECK(target == doctest::Approx(12.0 - 2.0).epsilon(1e-9));

  SimulationPlan plan;
  plan.spec = base.spec;
  plan.theta_true = base.theta;
  plan.tau = Vector::Zero(2);
  plan.replicates = 600;
  plan.seed = 971;

  double mean = 0.0, sq = 0.0;
  for (int r = 0; r < plan.replicates; ++r) {
    const Vector y = draw_response(plan, r);
    const double q = y.dot(p * y);
    mean += q;
    sq += q * q;
  }
  mean /= plan.replicates;
  sq = sq / plan.replicates - mean * mean;
  const double se = std::sqrt(sq / plan.replicates);
  CHECK(std::abs(mean - target) <= 3.5 * se);
}
