#pragma once

// Robust online feature substitution.
//
// Features arrive in batches. After each batch the solver alternates, until
// the residual profile settles:
//   1. a gradient step on the retained features over the working sample set,
//   2. truncation of the retained features to the mu largest weights,
//   3. a residual refresh over all samples,
//   4. re-selection of the working sample set by hard thresholding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "roofs/core.hpp"
#include "roofs/feature_stream.hpp"
#include "roofs/thresholding.hpp"

namespace roofs {

/// Step size chosen from the spectrum of the restricted design.
struct AutoStep {};
using StepSize = std::variant<AutoStep, double>;

struct SolverConfig {
  std::size_t mu = 1;
  StepSize eta = AutoStep{};
  double epsilon = 1e-6;
  TauMode tau_mode = AdaptiveTau{};
  std::size_t max_inner_iters = 500;
  /// Seeds the power-iteration start vector of the automatic step.
  std::uint64_t seed = 0;
  /// true: truncated features leave the store for good (streaming).
  /// false: their weights are zeroed but the rows stay available, so a
  /// feature can re-enter the support later (full feature access).
  bool release_pruned = true;

  void validate() const;
};

struct SolverState {
  /// beta^0 = 0, psi = {}, S_0 = [n], r^0 = |y|.
  static SolverState initial(std::span<const double> y);

  FeatureStore store;       ///< retained rows; store.ids() is psi
  Vector beta;              ///< aligned with store.ids()
  SampleIndexSet s_t;
  Vector r_t;
  std::size_t inner_iter = 0;  ///< t, counted across batches
  std::size_t batch_iter = 0;  ///< k, batches ingested so far

  // Bookkeeping for the most recent inner loop.
  std::size_t batch_inner_iters = 0;
  bool converged = false;
  double last_eta = 0.0;
  std::size_t tau_fallbacks = 0;
  std::vector<double> objective_trace;

  const FeatureIdSet& psi() const { return store.ids(); }
  std::size_t n() const { return store.n(); }
  SparseCoefficients coefficients() const { return SparseCoefficients::from_dense(psi(), beta); }
};

struct SolveResult {
  SparseCoefficients beta_hat;
  SampleIndexSet s_hat;
  FeatureIdSet psi_hat;
  std::vector<double> objective_trace;
  std::size_t inner_iterations_total = 0;
  std::vector<bool> converged_per_batch;
  std::size_t tau_fallbacks = 0;
  double final_eta = 0.0;
  double wall_time_seconds = 0.0;

  bool all_converged() const;
};

/// psi <- psi U batch ids; new features start at weight 0.
SolverState ingest_batch(SolverState state, const FeatureBatch& batch);

/// beta_psi <- beta_psi - eta * X_{psi,S} (X_{psi,S}^T beta_psi - y_S).
SolverState gradient_step(SolverState state, std::span<const double> y, double eta);

/// 1 / sigma_max(X_{psi,S})^2 with sigma_max from 20 power iterations.
double auto_step(const SolverState& state, std::uint64_t seed = 0);

/// Drops the |psi| - mu smallest-magnitude features and releases their rows.
SolverState prune_features(SolverState state, std::size_t mu);

/// Runs the substitution loop on the current psi until
/// ||embed(r^{t+1}, S_{t+1}) - embed(r^t, S_t)||_2 < epsilon * n
/// or max_inner_iters iterations have run.
SolverState inner_loop(SolverState state, std::span<const double> y, const SolverConfig& cfg);

/// Full pass over the stream: ingest each batch, then run the inner loop.
SolveResult solve(FeatureStream& stream, std::span<const double> y, const SolverConfig& cfg);

}  // namespace roofs
