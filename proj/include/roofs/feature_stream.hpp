#pragma once

#include <optional>
#include <vector>

#include "roofs/core.hpp"

namespace roofs {

/// Source of feature batches. The solver pulls batches one at a time, so an
/// implementation never needs to hold more than one batch in memory.
class FeatureStream {
 public:
  virtual ~FeatureStream() = default;
  /// Next batch, or nullopt when the pool is exhausted.
  virtual std::optional<FeatureBatch> next() = 0;
};

/// Stream over batches already in memory.
class VectorFeatureStream : public FeatureStream {
 public:
  explicit VectorFeatureStream(std::vector<FeatureBatch> batches) : batches_(std::move(batches)) {}

  std::optional<FeatureBatch> next() override {
    if (pos_ >= batches_.size()) {
      return std::nullopt;
    }
    return batches_[pos_++];
  }

 private:
  std::vector<FeatureBatch> batches_;
  std::size_t pos_ = 0;
};

}  // namespace roofs
