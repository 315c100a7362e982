#ifndef REML_LIKELIHOOD_HPP
#define REML_LIKELIHOOD_HPP

#include <cstdint>
#include <string>

#include "reml/mme.hpp"
#include "reml/model.hpp"

namespace reml {

/// Restricted log-likelihood value with its component breakdown. The value
/// is -(constant + logdet + quadratic) / 2, where the three pieces are the
/// terms inside the braces of whichever closed form produced it.
struct LikelihoodValue {
  double value = 0.0;
  std::string route;      // "L2-oracle" | "V-dense" | "C-factorized"
  double constant = 0.0;  // (n - nu) log(2 pi) resp. log(2 pi sigma2)
  double logdet = 0.0;    // log-determinant terms of the route
  double quadratic = 0.0; // y'Py on the V scale
};

/// Number of observations above which the dense oracle routes refuse to run.
inline constexpr int kDenseOracleCap = 2000;

/// Route (a): through an error contrast L2,
/// -1/2 { (n-nu) log 2pi + log|L2'VL2| + y'L2 (L2'VL2)^-1 L2'y }.
/// The default overload builds L2 itself; the explicit overload lets the
/// caller pick any valid L2 (the value must not depend on the choice).
LikelihoodValue loglik_via_contrast(const ModelSpec& spec, const ThetaVector& theta);
LikelihoodValue loglik_via_contrast(const ModelSpec& spec, const ThetaVector& theta,
                                    const Matrix& l2);

/// Route (b): dense evaluation
/// -1/2 { (n-nu) log 2pi + log|V| + log|X'V^-1X| + y'Py }.
LikelihoodValue loglik_via_V(const ModelSpec& spec, const ThetaVector& theta);

/// Route (c), the production path:
/// -1/2 { (n-nu) log(2 pi sigma2) + log|R| + log|G| + log|C| + y'Py }
/// with log|C| read off the LDL^T diagonal and y'Py = y'R^-1 e / sigma2.
LikelihoodValue loglik_via_C(const ModelSpec& spec, const ThetaVector& theta);

/// Same, reusing an already-assembled system (one factorization per theta).
LikelihoodValue loglik_via_C(const MMESystem& sys);

/// Monte-Carlo check of the ML variance bias in the fixed-effects-only
/// model: ML divides the residual sum of squares by n, REML by n - nu.
struct BiasProbeResult {
  double ml_mean = 0.0;
  double reml_mean = 0.0;
};
BiasProbeResult reml_vs_ml_bias_probe(int n, int p, double sigma2_true, int replicates,
                                      std::uint64_t seed = 20240901);

}  // namespace reml

#endif  // REML_LIKELIHOOD_HPP
