#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "reml/errors.hpp"
#include "reml/model.hpp"
#include "support.hpp"

using namespace reml;
using testsup::max_abs;
using testsup::rel_gap;
using testsup::Rng;
using testsup::thrown_code;

namespace {

/// Fixed-effects-only model with R = I: y, X random, no random effects.
ModelSpec plain_model(Rng& rng, int n, int p) {
  ModelSpec spec;
  spec.X = testsup::design_matrix(rng, n, p);
  spec.Z = Matrix(n, 0);
  spec.g_structure = VarianceStructure::iid_blocks({});
  spec.r_structure = VarianceStructure::identity(n);
  spec.y = testsup::random_matrix(rng, n, 1).col(0);
  return spec;
}

/// One-block random-effects model with an explicit (user-supplied) G family
/// G(gamma) = gamma_1 B_1, B_1 = I_b, so V = sigma2 (R + gamma Z Z').
ModelSpec explicit_model(Rng& rng, int n, int p, int b) {
  ModelSpec spec;
  spec.X = testsup::design_matrix(rng, n, p);
  spec.Z = testsup::indicator_block(rng, n, b);
  spec.g_structure = VarianceStructure::explicit_linear(
      Matrix::Zero(b, b), {Matrix(Matrix::Identity(b, b))});
  spec.g_structure.lower = {1e-10};
  spec.r_structure = VarianceStructure::identity(n);
  spec.y = testsup::random_matrix(rng, n, 1).col(0);
  return spec;
}

}  // namespace

TEST_CASE("theta coordinates round trip and bounds-check") {
  ThetaVector theta(2.0, (Vector(3) << 0.5, 1.5, 0.2).finished(), 2);
  CHECK(theta.size() == 4);
  CHECK(theta.n_phi() == 1);
  CHECK(theta.coord(0) == 2.0);
  CHECK(theta.coord(2) == 1.5);
  CHECK(theta.gamma().size() == 2);
  CHECK(theta.phi()[0] == 0.2);

  const Vector flat = theta.flat();
  const ThetaVector back = ThetaVector::from_flat(flat, 2);
  CHECK(back.sigma2 == theta.sigma2);
  CHECK(max_abs(back.kappa - theta.kappa) == 0.0);

  theta.set_coord(3, -0.3);
  CHECK(theta.phi()[0] == -0.3);
  CHECK(thrown_code([&] { theta.coord(4); }) == ErrorCode::IndexOutOfRange);
  CHECK(thrown_code([&] { theta.set_coord(-1, 0.0); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("variance value closed forms") {
  Rng rng(501);

  // no random effects, R = I, sigma2 = 2
  ModelSpec plain = plain_model(rng, 6, 2);
  const Matrix v0 = variance_value(plain, ThetaVector(2.0, Vector(0), 0));
  CHECK(max_abs(v0 - 2.0 * Matrix::Identity(6, 6)) == 0.0);

  // one iid block: V = sigma2 I + s Z Z'
  const testsup::Instance inst = testsup::random_instance(502, 12, 2, 1, false);
  const Matrix v = variance_value(inst.spec, inst.theta);
  const Matrix expected = inst.theta.sigma2 * Matrix::Identity(12, 12) +
                          inst.theta.gamma()[0] * inst.spec.Z * inst.spec.Z.transpose();
  CHECK(max_abs(v - expected) <= 1e-14 * max_abs(expected));
  CHECK(max_abs(v - v.transpose()) == 0.0);

  // AR(1) with phi = 0 collapses to the identity
  const VarianceStructure ar = VarianceStructure::ar1(4);
  CHECK(max_abs(ar.value((Vector(1) << 0.0).finished()) - Matrix::Identity(4, 4)) == 0.0);

  // AR(1) entries are phi^|i-j|
  const Matrix r = ar.value((Vector(1) << 0.5).finished());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(r(i, j) == doctest::Approx(std::pow(0.5, std::abs(i - j))).epsilon(1e-14));
}

TEST_CASE("inadmissible parameters are rejected") {
  const testsup::Instance inst = testsup::random_instance(503, 10, 2, 1, true);

  ThetaVector bad_sigma = inst.theta;
  bad_sigma.sigma2 = 0.0;
  CHECK(thrown_code([&] { variance_value(inst.spec, bad_sigma); }) ==
        ErrorCode::InadmissibleParameter);

  ThetaVector bad_phi = inst.theta;
  bad_phi.set_coord(bad_phi.size() - 1, 1.5);
  CHECK(thrown_code([&] { variance_value(inst.spec, bad_phi); }) ==
        ErrorCode::InadmissibleParameter);

  ThetaVector bad_gamma = inst.theta;
  bad_gamma.set_coord(1, -0.2);
  CHECK(thrown_code([&] { variance_value(inst.spec, bad_gamma); }) ==
        ErrorCode::InadmissibleParameter);
}

TEST_CASE("first derivatives: linear family slopes") {
  // iid blocks with R = I: V = sigma2 I + sum_i s_i Z_i Z_i', so the
  // derivative set is {I, Z_1 Z_1', ..., Z_r Z_r'}
  const testsup::Instance inst = testsup::random_instance(504, 15, 2, 2, false);
  const ModelSpec& spec = inst.spec;
  CHECK(spec.linear_in_theta());

  CHECK(max_abs(variance_first_derivative(spec, inst.theta, 0) -
                Matrix::Identity(15, 15)) == 0.0);
  for (int k = 0; k < 2; ++k) {
    const Matrix zk = spec.z_block(k);
    CHECK(max_abs(variance_first_derivative(spec, inst.theta, 1 + k) -
                  zk * zk.transpose()) <= 1e-14);
  }
  CHECK(thrown_code([&] { variance_first_derivative(spec, inst.theta, 3); }) ==
        ErrorCode::IndexOutOfRange);

  // Euler identity: V equals the theta-weighted sum of its slopes
  Matrix sum = Matrix::Zero(15, 15);
  for (int i = 0; i < spec.n_parameters(); ++i)
    sum += inst.theta.coord(i) * variance_first_derivative(spec, inst.theta, i);
  CHECK(max_abs(sum - variance_value(spec, inst.theta)) <= 1e-12 * max_abs(sum));
}

TEST_CASE("first derivatives: scaled family d/dsigma2 is H") {
  Rng rng(505);
  ModelSpec spec = explicit_model(rng, 14, 2, 4);
  CHECK_FALSE(spec.linear_in_theta());
  CHECK_FALSE(spec.variance_scale_g());

  const ThetaVector theta(1.7, (Vector(1) << 0.6).finished(), 1);
  const StandardBlocks blocks = standard_blocks(spec, theta);
  CHECK(max_abs(variance_first_derivative(spec, theta, 0) - blocks.H) <= 1e-12);

  // d/dgamma = sigma2 * Z B Z'
  const Matrix slope = variance_first_derivative(spec, theta, 1);
  CHECK(max_abs(slope - 1.7 * spec.Z * spec.Z.transpose()) <= 1e-12);
}

TEST_CASE("ar1 derivatives match finite differences") {
  const VarianceStructure ar = VarianceStructure::ar1(3);
  const Vector phi = (Vector(1) << 0.5).finished();
  const double h = 1e-6;

  const Matrix fd1 = (ar.value((Vector(1) << 0.5 + h).finished()) -
                      ar.value((Vector(1) << 0.5 - h).finished())) /
                     (2.0 * h);
  CHECK(rel_gap(ar.d1(phi, 0), fd1) <= 1e-7);

  const double h2 = 1e-4;
  const Matrix fd2 = (ar.value((Vector(1) << 0.5 + h2).finished()) -
                      2.0 * ar.value(phi) +
                      ar.value((Vector(1) << 0.5 - h2).finished())) /
                     (h2 * h2);
  CHECK(rel_gap(ar.d2(phi, 0, 0), fd2) <= 1e-5);
}

TEST_CASE("second derivatives: zero for linear, cross term for scaled") {
  const testsup::Instance lin = testsup::random_instance(506, 12, 2, 1, false);
  for (int i = 0; i < lin.spec.n_parameters(); ++i)
    for (int j = 0; j < lin.spec.n_parameters(); ++j)
      CHECK(max_abs(variance_second_derivative(lin.spec, lin.theta, i, j)) == 0.0);

  // explicit G: d2V/(dsigma2 dgamma) = dH/dgamma = Z B Z'
  Rng rng(507);
  ModelSpec spec = explicit_model(rng, 12, 2, 3);
  const ThetaVector theta(1.5, (Vector(1) << 0.8).finished(), 1);
  const Matrix cross = variance_second_derivative(spec, theta, 0, 1);
  CHECK(max_abs(cross - spec.Z * spec.Z.transpose()) <= 1e-12);
  CHECK(max_abs(variance_second_derivative(spec, theta, 1, 0) - cross) == 0.0);
  CHECK(max_abs(variance_second_derivative(spec, theta, 0, 0)) == 0.0);

  // AR(1) residual: the (sigma2, phi) cross term is dR/dphi
  const testsup::Instance ar = testsup::random_instance(508, 10, 2, 0, true);
  const int pidx = ar.spec.n_parameters() - 1;
  const Matrix dphi = ar.spec.r_structure.d1(ar.theta.phi(), 0);
  CHECK(max_abs(variance_second_derivative(ar.spec, ar.theta, 0, pidx) - dphi) <= 1e-14);
}

TEST_CASE("first derivatives match finite differences at random points") {
  int checked = 0;
  for (std::uint64_t seed = 510; seed < 520; ++seed) {
    const bool ar1 = seed % 2 == 0;
    const testsup::Instance inst = testsup::random_instance(seed, 14, 2, ar1 ? 1 : 2, ar1);
    for (int i = 0; i < inst.spec.n_parameters(); ++i) {
      const double h = testsup::fd_step(inst.spec, inst.theta, i);
      ThetaVector up = inst.theta, dn = inst.theta;
      up.set_coord(i, inst.theta.coord(i) + h);
      dn.set_coord(i, inst.theta.coord(i) - h);
      const Matrix fd =
          (variance_value(inst.spec, up) - variance_value(inst.spec, dn)) / (2.0 * h);
      CHECK(rel_gap(variance_first_derivative(inst.spec, inst.theta, i), fd) <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked >= 10);
}

TEST_CASE("standard blocks and the Woodbury inverse") {
  // ratio G = I_b when s = sigma2: H = I + ZZ'
  testsup::Instance inst = testsup::random_instance(521, 20, 2, 1, false);
  const int b = inst.spec.b();
  inst.theta.kappa[0] = inst.theta.sigma2;  // ratio 1
  const StandardBlocks blocks = standard_blocks(inst.spec, inst.theta);
  CHECK(max_abs(blocks.G - Matrix::Identity(b, b)) <= 1e-14);
  CHECK(max_abs(blocks.H - (Matrix::Identity(20, 20) +
                            inst.spec.Z * inst.spec.Z.transpose())) <= 1e-12);
  CHECK(max_abs(blocks.H * blocks.H_inv - Matrix::Identity(20, 20)) <= 1e-10);
  CHECK(blocks.logdet_R == doctest::Approx(0.0));

  // b = 0: H collapses to R
  Rng rng(522);
  ModelSpec plain = plain_model(rng, 8, 2);
  const StandardBlocks pb = standard_blocks(plain, ThetaVector(1.3, Vector(0), 0));
  CHECK(max_abs(pb.H - Matrix::Identity(8, 8)) == 0.0);
  CHECK(pb.G.rows() == 0);

  // diagonal G, Z = I: H^-1 has entries 1/(1+gamma_i)
  ModelSpec diag;
  const int n = 5;
  Rng rng2(523);
  diag.X = Matrix::Ones(n, 1);
  diag.Z = Matrix::Identity(n, n);
  diag.g_structure = VarianceStructure::iid_blocks(std::vector<int>(n, 1));
  diag.r_structure = VarianceStructure::identity(n);
  diag.y = testsup::random_matrix(rng2, n, 1).col(0);
  Vector s(n);
  for (int i = 0; i < n; ++i) s[i] = 0.3 + 0.2 * i;
  const double sigma2 = 1.4;
  const StandardBlocks db = standard_blocks(diag, ThetaVector(sigma2, s, n));
  for (int i = 0; i < n; ++i)
    CHECK(db.H_inv(i, i) == doctest::Approx(1.0 / (1.0 + s[i] / sigma2)).epsilon(1e-12));

  // Woodbury equals the direct dense inverse on a mixed AR(1) instance
  const testsup::Instance mixed = testsup::random_instance(524, 30, 3, 2, true);
  const StandardBlocks mb = standard_blocks(mixed.spec, mixed.theta);
  CHECK(max_abs(mb.H_inv - mb.H.inverse()) <= 1e-10);
  CHECK(max_abs(mb.R - mixed.spec.r_structure.value(mixed.theta.phi())) == 0.0);
}

TEST_CASE("ratio-scale G matrix and its log-determinant") {
  const testsup::Instance inst = testsup::random_instance(525, 18, 2, 2, false);
  const Matrix g = g_ratio_matrix(inst.spec, inst.theta);
  const auto& sizes = inst.spec.g_structure.block_sizes;
  int at = 0;
  double expected_logdet = 0.0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const double ratio = inst.theta.gamma()[k] / inst.theta.sigma2;
    for (int i = 0; i < sizes[k]; ++i) CHECK(g(at + i, at + i) == doctest::Approx(ratio));
    expected_logdet += sizes[k] * std::log(ratio);
    at += sizes[k];
  }
  CHECK(g_ratio_logdet(inst.spec, inst.theta) == doctest::Approx(expected_logdet));

  // explicit structures pass gamma through unchanged
  Rng rng(526);
  ModelSpec spec = explicit_model(rng, 12, 2, 3);
  const ThetaVector theta(2.2, (Vector(1) << 0.7).finished(), 1);
  CHECK(max_abs(g_ratio_matrix(spec, theta) - 0.7 * Matrix::Identity(3, 3)) <= 1e-14);
  CHECK(g_ratio_logdet(spec, theta) == doctest::Approx(3.0 * std::log(0.7)));
}

TEST_CASE("ar1 closed-form inverse and log-determinant") {
  for (double phi : {-0.8, -0.3, 0.0, 0.45, 0.9}) {
    const VarianceStructure ar = VarianceStructure::ar1(7);
    const Vector par = (Vector(1) << phi).finished();
    const Matrix r = ar.value(par);
    CHECK(max_abs(ar.inverse(par) - r.inverse()) <= 1e-10);
    CHECK(ar.log_determinant(par) ==
          doctest::Approx(6.0 * std::log(1.0 - phi * phi)).epsilon(1e-12));
  }
  // single observation: R = [1] for every phi
  const VarianceStructure one = VarianceStructure::ar1(1);
  CHECK(one.log_determinant((Vector(1) << 0.7).finished()) == 0.0);
  CHECK(one.inverse((Vector(1) << 0.7).finished())(0, 0) == 1.0);
}

TEST_CASE("model validation catches shape mismatches") {
  Rng rng(527);
  ModelSpec spec = plain_model(rng, 8, 2);
  spec.validate();

  ModelSpec bad = spec;
  bad.X = testsup::design_matrix(rng, 7, 2);
  CHECK(thrown_code([&] { bad.validate(); }) == ErrorCode::DimensionMismatch);

  ModelSpec names = spec;
  names.theta_names = {"sigma2", "extra"};
  CHECK(thrown_code([&] { names.validate(); }) == ErrorCode::DimensionMismatch);

  CHECK(spec.parameter_names() == std::vector<std::string>{"sigma2"});
  const testsup::Instance inst = testsup::random_instance(528, 10, 2, 2, true);
  CHECK(inst.spec.parameter_names() ==
        std::vector<std::string>{"sigma2", "sigma2_u1", "sigma2_u2", "phi"});
}
