#include "roofs/solver.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "roofs/errors.hpp"
#include "roofs/rng.hpp"

namespace roofs {

namespace {

constexpr int kPowerIterations = 20;
constexpr double kMinStep = 1e-6;

// e_j = v_j for j in S, 0 elsewhere.
Vector embed(const Vector& v, const SampleIndexSet& s) {
  Vector out = Vector::Zero(v.size());
  for (std::size_t j : s) {
    const auto jj = static_cast<Eigen::Index>(j);
    out[jj] = v[jj];
  }
  return out;
}

// X_{psi,S}^T v written into an n-vector with zeros off S.
Vector restricted_transpose_product(const SolverState& state, const Vector& v) {
  const Vector full = state.store.rows().transpose() * v;
  return embed(full, state.s_t);
}

// Gradient step given fitted = X_psi^T beta for the current beta.
SolverState gradient_step_from_fit(SolverState state, std::span<const double> y, double eta,
                                   const Vector& fitted) {
  if (state.s_t.empty()) {
    throw InconsistentStateError("gradient step with an empty working sample set");
  }
  if (!(eta >= 0.0)) {
    throw ConfigError("step size must be >= 0");
  }
  if (y.size() != state.n()) {
    throw InstanceMismatchError("response length does not match the solver's sample count");
  }
  if (state.store.size() == 0 || eta == 0.0) {
    return state;
  }
  Vector err = Vector::Zero(fitted.size());
  for (std::size_t j : state.s_t) {
    const auto jj = static_cast<Eigen::Index>(j);
    err[jj] = fitted[jj] - y[j];
  }
  state.beta.noalias() -= eta * (state.store.rows() * err);
  return state;
}

// Zeroes every weight outside the mu largest magnitudes; rows are kept.
void zero_truncated(SolverState& state, std::size_t mu) {
  if (state.store.size() <= mu) {
    return;
  }
  const auto ids = state.store.ids().ids();
  const std::span<const double> weights(state.beta.data(), state.store.size());
  const std::vector<std::size_t> kept = top_magnitude_positions(ids, weights, mu);
  Vector beta = Vector::Zero(state.beta.size());
  for (std::size_t pos : kept) {
    beta[static_cast<Eigen::Index>(pos)] = state.beta[static_cast<Eigen::Index>(pos)];
  }
  state.beta = std::move(beta);
}

}  // namespace

void SolverConfig::validate() const {
  if (mu < 1) {
    throw ConfigError("mu must be >= 1");
  }
  if (!(epsilon > 0.0)) {
    throw ConfigError("epsilon must be > 0");
  }
  if (max_inner_iters < 1) {
    throw ConfigError("max_inner_iters must be >= 1");
  }
  if (const double* step = std::get_if<double>(&eta); step && !(*step >= 0.0)) {
    throw ConfigError("step size must be >= 0");
  }
  if (const auto* fixed = std::get_if<FixedTau>(&tau_mode);
      fixed && !(fixed->gamma > 0.0 && fixed->gamma <= 1.0)) {
    throw ConfigError("fixed uncorrupted ratio must lie in (0, 1]");
  }
}

bool SolveResult::all_converged() const {
  for (bool c : converged_per_batch) {
    if (!c) {
      return false;
    }
  }
  return true;
}

SolverState SolverState::initial(std::span<const double> y) {
  SolverState state;
  const std::size_t n = y.size();
  state.store = FeatureStore(n);
  state.beta = Vector::Zero(0);
  state.s_t = SampleIndexSet::full(n);
  state.r_t.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    state.r_t[static_cast<Eigen::Index>(j)] = std::abs(y[j]);
  }
  return state;
}

SolverState ingest_batch(SolverState state, const FeatureBatch& batch) {
  const FeatureIdSet old_ids = state.store.ids();
  state.store.insert(batch);
  if (state.store.size() == old_ids.size()) {
    return state;
  }
  Vector beta = Vector::Zero(static_cast<Eigen::Index>(state.store.size()));
  std::size_t old_pos = 0;
  for (std::size_t i = 0; i < state.store.size() && old_pos < old_ids.size(); ++i) {
    if (state.store.ids()[i] == old_ids[old_pos]) {
      beta[static_cast<Eigen::Index>(i)] = state.beta[static_cast<Eigen::Index>(old_pos++)];
    }
  }
  state.beta = std::move(beta);
  return state;
}

SolverState gradient_step(SolverState state, std::span<const double> y, double eta) {
  if (state.store.size() == 0) {
    if (state.s_t.empty()) {
      throw InconsistentStateError("gradient step with an empty working sample set");
    }
    return state;
  }
  const Vector fitted = fitted_values(state.store, state.beta);
  return gradient_step_from_fit(std::move(state), y, eta, fitted);
}

double auto_step(const SolverState& state, std::uint64_t seed) {
  if (state.store.size() == 0 || state.s_t.empty()) {
    throw InconsistentStateError("automatic step needs retained features and samples");
  }
  Rng rng = substream(seed, 0xA5u);
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(state.store.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = normal(rng);
  }
  v.normalize();

  // Power iteration on X_{psi,S} X_{psi,S}^T.
  for (int it = 0; it < kPowerIterations; ++it) {
    const Vector w = restricted_transpose_product(state, v);
    v = state.store.rows() * w;
    const double norm = v.norm();
    if (norm == 0.0) {
      return kMinStep;
    }
    v /= norm;
  }
  const double sigma_sq = restricted_transpose_product(state, v).squaredNorm();
  if (!(sigma_sq > 0.0)) {
    return kMinStep;
  }
  return 1.0 / sigma_sq;
}

SolverState prune_features(SolverState state, std::size_t mu) {
  if (state.store.size() <= mu) {
    return state;
  }
  const auto ids = state.store.ids().ids();
  const std::span<const double> weights(state.beta.data(), state.store.size());
  const std::vector<std::size_t> kept = top_magnitude_positions(ids, weights, mu);

  std::vector<FeatureId> keep_ids;
  keep_ids.reserve(kept.size());
  Vector beta(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    keep_ids.push_back(ids[kept[i]]);
    beta[static_cast<Eigen::Index>(i)] = state.beta[static_cast<Eigen::Index>(kept[i])];
  }
  state.store.retain(FeatureIdSet(std::move(keep_ids)));
  state.beta = std::move(beta);
  return state;
}

SolverState inner_loop(SolverState state, std::span<const double> y, const SolverConfig& cfg) {
  cfg.validate();
  if (state.store.size() == 0) {
    throw InconsistentStateError("inner loop started before any feature batch was ingested");
  }
  if (y.size() != state.n()) {
    throw InstanceMismatchError("response length does not match the solver's sample count");
  }
  const double n = static_cast<double>(state.n());

  // The automatic step is sized once per batch on the freshly merged psi.
  // psi only shrinks inside the loop, so the step stays valid for it.
  const double eta = std::holds_alternative<AutoStep>(cfg.eta) ? auto_step(state, cfg.seed)
                                                               : std::get<double>(cfg.eta);
  state.last_eta = eta;
  state.batch_inner_iters = 0;
  state.converged = false;

  // X_psi^T beta carried between iterations; each iteration then costs one
  // product with X and one with X^T.
  Vector fitted = fitted_values(state.store, state.beta);
  while (state.batch_inner_iters < cfg.max_inner_iters) {
    const Vector previous = embed(state.r_t, state.s_t);

    state = gradient_step_from_fit(std::move(state), y, eta, fitted);
    if (cfg.release_pruned) {
      state = prune_features(std::move(state), cfg.mu);
    } else {
      zero_truncated(state, cfg.mu);
    }

    fitted = fitted_values(state.store, state.beta);
    Vector r(fitted.size());
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      r[j] = std::abs(y[static_cast<std::size_t>(j)] - fitted[j]);
    }
    bool fallback = false;
    state.s_t = update_uncorrupted_set(as_span(r), cfg.tau_mode, fallback);
    state.r_t = std::move(r);
    if (fallback) {
      ++state.tau_fallbacks;
    }

    const Vector current = embed(state.r_t, state.s_t);
    state.objective_trace.push_back(current.squaredNorm());
    ++state.inner_iter;
    ++state.batch_inner_iters;

    if ((current - previous).norm() < cfg.epsilon * n) {
      state.converged = true;
      break;
    }
  }
  return state;
}

SolveResult solve(FeatureStream& stream, std::span<const double> y, const SolverConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  std::optional<FeatureBatch> batch = stream.next();
  if (!batch) {
    throw ConfigError("feature stream is empty");
  }
  if (batch->n() != y.size()) {
    throw ConfigError("batch has " + std::to_string(batch->n()) + " samples but the response has " +
                      std::to_string(y.size()));
  }

  SolveResult result;
  SolverState state = SolverState::initial(y);
  while (batch) {
    state = ingest_batch(std::move(state), *batch);
    state = inner_loop(std::move(state), y, cfg);
    result.converged_per_batch.push_back(state.converged);
    ++state.batch_iter;
    batch = stream.next();
  }

  result.beta_hat = state.coefficients();
  result.s_hat = state.s_t;
  result.psi_hat = state.psi();
  result.objective_trace = std::move(state.objective_trace);
  result.inner_iterations_total = state.inner_iter;
  result.tau_fallbacks = state.tau_fallbacks;
  result.final_eta = state.last_eta;
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace roofs
