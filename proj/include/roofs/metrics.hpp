#pragma once

#include <map>
#include <string>

#include "roofs/core.hpp"
#include "roofs/datagen.hpp"
#include "roofs/solver.hpp"

namespace roofs {

struct RunMetrics {
  double l2_error = 0.0;
  double f1_uncorrupted = 0.0;
  double f1_features = 0.0;
  double wall_time_seconds = 0.0;
  std::map<std::string, std::string> config_echo;
};

/// ||beta_hat - beta_star||_2 over the union of supports.
double l2_error(const SparseCoefficients& beta_hat, const SparseCoefficients& beta_star);

/// 2PR / (P + R) with P = |est & truth| / |est| and R = |est & truth| / |truth|.
/// 1 when both sets are empty, 0 when they do not intersect.
double f1_set(std::span<const std::size_t> estimated, std::span<const std::size_t> truth);
double f1_set(const SampleIndexSet& estimated, const SampleIndexSet& truth);
double f1_set(const FeatureIdSet& estimated, const FeatureIdSet& truth);

RunMetrics score_run(const SolveResult& result, const GroundTruth& truth, double wall_time_seconds,
                     std::map<std::string, std::string> config_echo = {});

}  // namespace roofs
