#pragma once

// Synthetic corrupted-regression instances:
//   y = X^T beta* + u + eps
// with a mu-sparse unit-norm beta*, i.i.d. N(0, 1) design entries, a uniformly
// random corrupted subset carrying u ~ U[-c ||y*||_inf, c ||y*||_inf] and
// dense noise eps ~ N(0, sigma^2).

#include <cstddef>
#include <cstdint>
#include <optional>

#include "roofs/core.hpp"
#include "roofs/feature_stream.hpp"
#include "roofs/rng.hpp"

namespace roofs {

struct GenConfig {
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t mu = 0;
  double corruption_ratio = 0.0;  ///< 1 - gamma
  double sigma = 0.1;
  double corruption_scale = 5.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError on an unusable configuration.
  void validate() const;
  /// The theory checks need gamma > 1/2; larger ratios are stress runs only.
  bool stress_run() const { return corruption_ratio >= 0.5; }
  std::size_t corrupted_count() const;
};

struct GroundTruth {
  SparseCoefficients beta_star;
  Vector u;
  Vector epsilon;
  SampleIndexSet s_star;
  FeatureIdSet psi_star;

  double gamma() const {
    return static_cast<double>(s_star.size()) / static_cast<double>(s_star.bound());
  }
};

/// Design with N(0, 1) entries whose rows are produced on demand. Each row
/// has its own substream, so row(id) is the same whenever and in whatever
/// order it is requested.
class GaussianDesign {
 public:
  GaussianDesign(std::size_t p, std::size_t n, std::uint64_t seed) : p_(p), n_(n), seed_(seed) {}

  std::size_t p() const { return p_; }
  std::size_t n() const { return n_; }
  std::uint64_t seed() const { return seed_; }

  Eigen::RowVectorXd row(FeatureId id) const;
  FeatureBatch batch(std::size_t batch_index, const FeatureIdSet& ids) const;
  /// Every row at once; intended for baselines and small instances.
  FeatureStore full_store() const;

 private:
  std::size_t p_;
  std::size_t n_;
  std::uint64_t seed_;
};

/// Delivers the design in consecutive id blocks of `batch_size`.
class DesignStream : public FeatureStream {
 public:
  DesignStream(const GaussianDesign& design, std::size_t batch_size);
  std::optional<FeatureBatch> next() override;

 private:
  const GaussianDesign* design_;
  std::size_t batch_size_;
  std::size_t next_batch_ = 0;
};

SparseCoefficients gen_coefficients(const GenConfig& cfg, Rng& rng);
GaussianDesign gen_design(const GenConfig& cfg, Rng& rng);

struct ResponseSample {
  Vector y;
  GroundTruth truth;
};

ResponseSample gen_response(const GaussianDesign& design, const SparseCoefficients& beta_star,
                            const GenConfig& cfg, Rng& rng);

struct Dataset {
  GenConfig config;
  GaussianDesign design;
  Vector y;
  GroundTruth truth;
};

/// Runs the three generators in a fixed order from cfg.seed.
Dataset generate_dataset(const GenConfig& cfg);

}  // namespace roofs
