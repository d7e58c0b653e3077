#include "roofs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "roofs/errors.hpp"

namespace roofs {

namespace {

template <typename T>
double f1_sorted(std::span<const T> est, std::span<const T> truth) {
  if (est.empty() && truth.empty()) {
    return 1.0;
  }
  std::size_t common = 0;
  auto a = est.begin();
  auto b = truth.begin();
  while (a != est.end() && b != truth.end()) {
    if (*a == *b) {
      ++common;
      ++a;
      ++b;
    } else if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  if (common == 0) {
    return 0.0;
  }
  const double precision = static_cast<double>(common) / static_cast<double>(est.size());
  const double recall = static_cast<double>(common) / static_cast<double>(truth.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double l2_error(const SparseCoefficients& beta_hat, const SparseCoefficients& beta_star) {
  std::set<FeatureId> ids;
  for (const auto& [id, w] : beta_hat.entries()) {
    ids.insert(id);
  }
  for (const auto& [id, w] : beta_star.entries()) {
    ids.insert(id);
  }
  double sq = 0.0;
  for (FeatureId id : ids) {
    const double d = beta_hat.get(id) - beta_star.get(id);
    sq += d * d;
  }
  return std::sqrt(sq);
}

double f1_set(std::span<const std::size_t> estimated, std::span<const std::size_t> truth) {
  std::vector<std::size_t> est(estimated.begin(), estimated.end());
  std::vector<std::size_t> tru(truth.begin(), truth.end());
  std::sort(est.begin(), est.end());
  est.erase(std::unique(est.begin(), est.end()), est.end());
  std::sort(tru.begin(), tru.end());
  tru.erase(std::unique(tru.begin(), tru.end()), tru.end());
  return f1_sorted<std::size_t>(est, tru);
}

double f1_set(const SampleIndexSet& estimated, const SampleIndexSet& truth) {
  return f1_sorted(estimated.indices(), truth.indices());
}

double f1_set(const FeatureIdSet& estimated, const FeatureIdSet& truth) {
  return f1_sorted(estimated.ids(), truth.ids());
}

RunMetrics score_run(const SolveResult& result, const GroundTruth& truth, double wall_time_seconds,
                     std::map<std::string, std::string> config_echo) {
  if (result.s_hat.bound() != truth.s_star.bound()) {
    throw InstanceMismatchError("result has n = " + std::to_string(result.s_hat.bound()) +
                                " but ground truth has n = " +
                                std::to_string(truth.s_star.bound()));
  }
  RunMetrics m;
  m.l2_error = l2_error(result.beta_hat, truth.beta_star);
  m.f1_uncorrupted = f1_set(result.s_hat, truth.s_star);
  m.f1_features = f1_set(result.psi_hat, truth.psi_star);
  m.wall_time_seconds = wall_time_seconds;
  m.config_echo = std::move(config_echo);
  return m;
}

}  // namespace roofs
