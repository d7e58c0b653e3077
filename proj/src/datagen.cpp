#include "roofs/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "roofs/errors.hpp"

namespace roofs {

namespace {

// Substream ids for the pieces drawn from one dataset seed.
constexpr std::uint64_t kStreamCoefficients = 1;
constexpr std::uint64_t kStreamDesign = 2;
constexpr std::uint64_t kStreamResponse = 3;

}  // namespace

void GenConfig::validate() const {
  if (p == 0 || n == 0) {
    throw ConfigError("p and n must be positive");
  }
  if (mu == 0 || mu > p) {
    throw ConfigError("support size mu = " + std::to_string(mu) + " must lie in [1, p = " +
                      std::to_string(p) + "]");
  }
  if (!(corruption_ratio >= 0.0 && corruption_ratio < 1.0)) {
    throw ConfigError("corruption ratio must lie in [0, 1), got " +
                      std::to_string(corruption_ratio));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("noise sigma must be finite and >= 0");
  }
  if (!(corruption_scale >= 0.0) || !std::isfinite(corruption_scale)) {
    throw ConfigError("corruption scale must be finite and >= 0");
  }
}

std::size_t GenConfig::corrupted_count() const {
  return static_cast<std::size_t>(std::llround(corruption_ratio * static_cast<double>(n)));
}

Eigen::RowVectorXd GaussianDesign::row(FeatureId id) const {
  Rng rng = substream(seed_, id);
  std::normal_distribution<double> normal;
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(n_));
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out[j] = normal(rng);
  }
  return out;
}

FeatureBatch GaussianDesign::batch(std::size_t batch_index, const FeatureIdSet& ids) const {
  RowMatrix values(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= p_) {
      throw BoundsError("feature id " + std::to_string(ids[i]) + " outside design with p = " +
                        std::to_string(p_));
    }
    values.row(static_cast<Eigen::Index>(i)) = row(ids[i]);
  }
  return FeatureBatch(batch_index, ids, std::move(values));
}

FeatureStore GaussianDesign::full_store() const {
  FeatureStore store(n_);
  store.insert(batch(0, FeatureIdSet::range(0, p_)));
  return store;
}

DesignStream::DesignStream(const GaussianDesign& design, std::size_t batch_size)
    : design_(&design), batch_size_(batch_size) {
  if (batch_size_ == 0) {
    throw ConfigError("batch size must be >= 1");
  }
}

std::optional<FeatureBatch> DesignStream::next() {
  const std::size_t first = next_batch_ * batch_size_;
  if (first >= design_->p()) {
    return std::nullopt;
  }
  const std::size_t last = std::min(first + batch_size_, design_->p());
  return design_->batch(next_batch_++, FeatureIdSet::range(first, last));
}

SparseCoefficients gen_coefficients(const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<FeatureId> all(cfg.p);
  std::iota(all.begin(), all.end(), FeatureId{0});
  std::vector<FeatureId> support;
  support.reserve(cfg.mu);
  std::sample(all.begin(), all.end(), std::back_inserter(support), cfg.mu, rng);

  std::normal_distribution<double> normal;
  std::vector<double> weights(cfg.mu);
  double norm_sq = 0.0;
  while (norm_sq == 0.0) {
    norm_sq = 0.0;
    for (double& w : weights) {
      w = normal(rng);
      norm_sq += w * w;
    }
  }
  const double norm = std::sqrt(norm_sq);

  SparseCoefficients beta;
  for (std::size_t i = 0; i < cfg.mu; ++i) {
    beta.set(support[i], weights[i] / norm);
  }
  // A weight can only vanish by underflow; keep the support size exact anyway.
  if (beta.size() != cfg.mu) {
    return gen_coefficients(cfg, rng);
  }
  return beta;
}

GaussianDesign gen_design(const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  return GaussianDesign(cfg.p, cfg.n, rng());
}

ResponseSample gen_response(const GaussianDesign& design, const SparseCoefficients& beta_star,
                            const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(design.n());

  Vector clean = Vector::Zero(n);
  for (const auto& [id, w] : beta_star.entries()) {
    clean += w * design.row(id).transpose();
  }
  const double y_inf = clean.size() > 0 ? clean.cwiseAbs().maxCoeff() : 0.0;

  std::vector<std::size_t> all(design.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> corrupted;
  std::sample(all.begin(), all.end(), std::back_inserter(corrupted), cfg.corrupted_count(), rng);

  Vector u = Vector::Zero(n);
  const double bound = cfg.corruption_scale * y_inf;
  std::uniform_real_distribution<double> attack(-bound, bound);
  for (std::size_t j : corrupted) {
    u[static_cast<Eigen::Index>(j)] = bound > 0.0 ? attack(rng) : 0.0;
  }

  Vector eps = Vector::Zero(n);
  if (cfg.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.sigma);
    for (Eigen::Index j = 0; j < n; ++j) {
      eps[j] = noise(rng);
    }
  }

  ResponseSample out;
  out.y = clean + u + eps;
  out.truth.beta_star = beta_star;
  out.truth.u = std::move(u);
  out.truth.epsilon = std::move(eps);
  out.truth.s_star = SampleIndexSet::from_unsorted(std::move(corrupted), design.n()).complement();
  out.truth.psi_star = beta_star.support();
  return out;
}

Dataset generate_dataset(const GenConfig& cfg) {
  cfg.validate();
  Rng coeff_rng = substream(cfg.seed, kStreamCoefficients);
  Rng design_rng = substream(cfg.seed, kStreamDesign);
  Rng response_rng = substream(cfg.seed, kStreamResponse);

  SparseCoefficients beta_star = gen_coefficients(cfg, coeff_rng);
  GaussianDesign design = gen_design(cfg, design_rng);
  ResponseSample response = gen_response(design, beta_star, cfg, response_rng);
  return Dataset{cfg, design, std::move(response.y), std::move(response.truth)};
}

}  // namespace roofs
