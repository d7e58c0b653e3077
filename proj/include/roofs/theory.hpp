#pragma once

// Numerical checks of the recovery guarantees on concrete instances:
// prefix monotonicity of the sorted objective, the bound of the estimated
// uncorrupted set's objective against the true set's, an empirical subset
// restricted strong convexity constant, and the final error bound.

#include <cstddef>
#include <span>

#include "roofs/core.hpp"
#include "roofs/datagen.hpp"
#include "roofs/rng.hpp"
#include "roofs/solver.hpp"

namespace roofs {

/// Sum of the tau1 smallest r_i^2 <= sum of the tau2 smallest. Requires
/// 1 <= tau1 < tau2 <= n.
bool check_lemma1(std::span<const double> r, std::size_t tau1, std::size_t tau2);

/// 1 + 128 (1 - gamma) / (2 gamma - 1); DomainError for gamma <= 1/2.
double lambda_of_gamma(double gamma);

struct BoundCheck {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
};

struct Lemma2Check : BoundCheck {
  bool within_truth = false;  ///< |S_t| <= tau*
  double lambda = 1.0;        ///< multiplier applied to f_{S*}(beta)
};

/// For a snapshot (beta^t, S_t): f_{S_t}(beta^t) <= f_{S*}(beta^t) when
/// |S_t| <= tau*, else f_{S_t}(beta^t) <= lambda(gamma) f_{S*}(beta^t).
/// The store must hold every feature in supp(beta).
Lemma2Check check_lemma2(const SparseCoefficients& beta, const SampleIndexSet& s_t,
                         const GroundTruth& truth, const FeatureStore& store,
                         std::span<const double> y);

/// min over `trials` random (psi of size mu, S of size round(gamma n)) of
/// 2 lambda_min(X_{psi,S} X_{psi,S}^T), lambda_min from 100 inverse power
/// iterations. A singular block contributes 0.
double estimate_srsc_constant(const FeatureStore& store, std::size_t mu, double gamma,
                              std::size_t trials, Rng& rng);

struct Theorem1Check : BoundCheck {
  double alpha = 0.0;
  double lambda = 1.0;
};

/// f_{S^}(beta^) - f_{S*}(beta*) <= alpha lambda / (1 + alpha) f_{S*}(0)
///                                  + (lambda / (1 + alpha) - 1) f_{S*}(beta*)
/// with alpha = (1 / (eta phi))^2. lambda is 1 when |S^| <= tau*.
Theorem1Check check_theorem1(const SolveResult& result, const GroundTruth& truth,
                             const FeatureStore& store, std::span<const double> y, double eta,
                             double phi_mu_hat);

struct TheoryReport {
  double gamma = 0.0;
  double lambda = 0.0;
  double phi_mu_hat = 0.0;
  double alpha_hat = 0.0;
  bool lemma1_holds = false;
  bool lemma2_holds = false;
  bool theorem1_holds = false;
  double lemma2_slack = 0.0;
  double theorem1_slack = 0.0;
};

/// Runs every check on a finished solve. `store` must hold supp(beta^) and
/// psi*, and should hold the whole design for the convexity estimate.
TheoryReport run_theory_checks(const SolveResult& result, const GroundTruth& truth,
                               const FeatureStore& store, std::span<const double> y,
                               std::size_t mu, std::size_t srsc_trials, std::uint64_t seed);

}  // namespace roofs
