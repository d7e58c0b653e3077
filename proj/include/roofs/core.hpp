#pragma once

// Domain types shared by every module: index sets over samples and features,
// feature batches, the retained-row feature store and sparse coefficients.
//
// Orientation: features are rows and samples are columns, so the design
// restricted to retained features is a |psi| x n row-major block.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace roofs {

using FeatureId = std::uint64_t;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Strictly ascending subset of [0, bound).
class SampleIndexSet {
 public:
  SampleIndexSet() = default;
  /// Throws BoundsError unless `indices` is strictly ascending and below `bound`.
  SampleIndexSet(std::vector<std::size_t> indices, std::size_t bound);

  static SampleIndexSet full(std::size_t n);
  /// Sorts and deduplicates before validating.
  static SampleIndexSet from_unsorted(std::vector<std::size_t> indices, std::size_t bound);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  std::size_t bound() const { return bound_; }
  bool contains(std::size_t i) const;
  std::span<const std::size_t> indices() const { return indices_; }
  std::size_t operator[](std::size_t pos) const { return indices_[pos]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  SampleIndexSet complement() const;

  friend bool operator==(const SampleIndexSet&, const SampleIndexSet&) = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t bound_ = 0;
};

/// Strictly ascending set of global feature ids.
class FeatureIdSet {
 public:
  FeatureIdSet() = default;
  explicit FeatureIdSet(std::vector<FeatureId> ids);
  FeatureIdSet(std::initializer_list<FeatureId> ids);

  static FeatureIdSet from_unsorted(std::vector<FeatureId> ids);
  /// Contiguous range [first, last).
  static FeatureIdSet range(FeatureId first, FeatureId last);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(FeatureId id) const;
  std::span<const FeatureId> ids() const { return ids_; }
  FeatureId operator[](std::size_t pos) const { return ids_[pos]; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  friend bool operator==(const FeatureIdSet&, const FeatureIdSet&) = default;

 private:
  std::vector<FeatureId> ids_;
};

FeatureIdSet set_union(const FeatureIdSet& a, const FeatureIdSet& b);
FeatureIdSet set_difference(const FeatureIdSet& a, const FeatureIdSet& b);

/// Rows of the design for one batch of incoming features. Row i holds
/// feature ids()[i] across all n samples.
class FeatureBatch {
 public:
  FeatureBatch(std::size_t batch_index, FeatureIdSet ids, RowMatrix values);

  std::size_t batch_index() const { return batch_index_; }
  const FeatureIdSet& ids() const { return ids_; }
  const RowMatrix& values() const { return values_; }
  std::size_t n() const { return static_cast<std::size_t>(values_.cols()); }

 private:
  std::size_t batch_index_;
  FeatureIdSet ids_;
  RowMatrix values_;
};

/// Design rows for the retained features. Rows are kept in ascending id
/// order, aligned with ids().
class FeatureStore {
 public:
  FeatureStore() = default;
  explicit FeatureStore(std::size_t n) : n_(n), rows_(0, static_cast<Eigen::Index>(n)) {}

  std::size_t n() const { return n_; }
  std::size_t size() const { return ids_.size(); }
  const FeatureIdSet& ids() const { return ids_; }
  bool contains(FeatureId id) const { return ids_.contains(id); }
  /// Row position of `id`; throws InconsistentStateError if absent.
  std::size_t position(FeatureId id) const;
  auto row(FeatureId id) const { return rows_.row(static_cast<Eigen::Index>(position(id))); }
  const RowMatrix& rows() const { return rows_; }

  /// Adds the batch rows. A re-delivered id must carry identical values.
  void insert(const FeatureBatch& batch);
  /// Releases every row whose id is not in `keep`.
  void retain(const FeatureIdSet& keep);

 private:
  std::size_t n_ = 0;
  FeatureIdSet ids_;
  RowMatrix rows_;
};

/// Coefficient vector keyed by feature id. Zero weights are never stored.
class SparseCoefficients {
 public:
  SparseCoefficients() = default;
  SparseCoefficients(std::initializer_list<std::pair<const FeatureId, double>> init);

  /// Builds from a dense vector aligned with `ids`.
  static SparseCoefficients from_dense(const FeatureIdSet& ids, const Vector& weights);

  void set(FeatureId id, double weight);
  double get(FeatureId id) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<FeatureId, double>& entries() const { return entries_; }
  FeatureIdSet support() const;
  double norm() const;

  /// Dense weights aligned with `ids`; ids absent from the map read as 0.
  Vector dense(const FeatureIdSet& ids) const;

  /// Keeps the `mu` largest magnitudes (ties keep the smaller id).
  void truncate(std::size_t mu);

  friend bool operator==(const SparseCoefficients&, const SparseCoefficients&) = default;

 private:
  std::map<FeatureId, double> entries_;
};

/// Positions (ascending) of the `keep` entries with the largest |weight|.
/// Ordering is by magnitude descending, then by id ascending, so among equal
/// magnitudes the larger id is dropped first.
std::vector<std::size_t> top_magnitude_positions(std::span<const FeatureId> ids,
                                                 std::span<const double> weights,
                                                 std::size_t keep);

/// X_{psi,samples}^T beta.
Vector predict(const FeatureStore& store, const SparseCoefficients& beta,
               const SampleIndexSet& samples);

/// |y - X^T beta| over all n samples.
Vector residual(const FeatureStore& store, const SparseCoefficients& beta,
                std::span<const double> y);

/// f_S(beta) = ||y_S - X_S^T beta||^2.
double restricted_objective(const FeatureStore& store, const SparseCoefficients& beta,
                            std::span<const double> y, const SampleIndexSet& samples);

// Dense-coefficient variants used on the solver's hot path. `beta` is aligned
// with store.ids().
Vector fitted_values(const FeatureStore& store, const Vector& beta);
double restricted_objective(const FeatureStore& store, const Vector& beta,
                            std::span<const double> y, const SampleIndexSet& samples);

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace roofs
