#include "roofs/baselines.hpp"

#include <chrono>
#include <string>

#include <Eigen/QR>

#include "roofs/errors.hpp"

namespace roofs {

SparseCoefficients ols_full(const FeatureStore& store, std::span<const double> y, std::size_t mu,
                            const BaselineOptions& options) {
  return fixed_ratio_thresholding(store, y, mu, 1.0, options).beta_hat;
}

SolveResult fixed_ratio_thresholding(const FeatureStore& store, std::span<const double> y,
                                     std::size_t mu, double gamma,
                                     const BaselineOptions& options) {
  if (!(gamma > 0.5 && gamma <= 1.0)) {
    throw ConfigError("fixed-ratio thresholding needs gamma in (0.5, 1], got " +
                      std::to_string(gamma));
  }
  if (store.size() == 0) {
    throw ConfigError("baseline needs at least one retained feature");
  }
  if (y.size() != store.n()) {
    throw InstanceMismatchError("response length does not match the feature store");
  }
  const auto start = std::chrono::steady_clock::now();

  SolverConfig cfg;
  cfg.mu = mu;
  cfg.eta = AutoStep{};
  cfg.epsilon = options.epsilon;
  cfg.tau_mode = FixedTau{gamma};
  cfg.max_inner_iters = options.max_inner_iters;
  cfg.seed = options.seed;
  cfg.release_pruned = false;

  SolverState state = SolverState::initial(y);
  state = ingest_batch(std::move(state), FeatureBatch(0, store.ids(), store.rows()));
  state = inner_loop(std::move(state), y, cfg);

  SolveResult result;
  result.beta_hat = state.coefficients();
  result.s_hat = state.s_t;
  result.psi_hat = result.beta_hat.support();
  result.objective_trace = std::move(state.objective_trace);
  result.inner_iterations_total = state.inner_iter;
  result.converged_per_batch = {state.converged};
  result.final_eta = state.last_eta;
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SparseCoefficients oracle_ols(const FeatureStore& store, std::span<const double> y,
                              const GroundTruth& truth) {
  if (y.size() != store.n() || truth.s_star.bound() != store.n()) {
    throw InstanceMismatchError("oracle inputs disagree on the sample count");
  }
  const auto& psi = truth.psi_star;
  const auto& s = truth.s_star;
  if (psi.empty() || s.empty()) {
    return {};
  }
  // Rows of the least-squares system are samples: A = X_{psi*,S*}^T.
  Eigen::MatrixXd a(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(psi.size()));
  Vector b(static_cast<Eigen::Index>(s.size()));
  for (std::size_t c = 0; c < psi.size(); ++c) {
    auto row = store.row(psi[c]);
    for (std::size_t r = 0; r < s.size(); ++r) {
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          row[static_cast<Eigen::Index>(s[r])];
    }
  }
  for (std::size_t r = 0; r < s.size(); ++r) {
    b[static_cast<Eigen::Index>(r)] = y[s[r]];
  }
  const Vector coef = a.colPivHouseholderQr().solve(b);
  return SparseCoefficients::from_dense(psi, coef);
}

}  // namespace roofs
