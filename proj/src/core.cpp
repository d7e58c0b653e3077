#include "roofs/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "roofs/errors.hpp"

namespace roofs {

namespace {

template <typename T>
bool strictly_ascending(const std::vector<T>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](T a, T b) { return a >= b; }) == v.end();
}

}  // namespace

// ---------------------------------------------------------------------------
// SampleIndexSet

SampleIndexSet::SampleIndexSet(std::vector<std::size_t> indices, std::size_t bound)
    : indices_(std::move(indices)), bound_(bound) {
  if (!strictly_ascending(indices_)) {
    throw BoundsError("sample index set must be strictly ascending");
  }
  if (!indices_.empty() && indices_.back() >= bound_) {
    throw BoundsError("sample index " + std::to_string(indices_.back()) +
                      " out of range for n = " + std::to_string(bound_));
  }
}

SampleIndexSet SampleIndexSet::full(std::size_t n) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return SampleIndexSet(std::move(all), n);
}

SampleIndexSet SampleIndexSet::from_unsorted(std::vector<std::size_t> indices, std::size_t bound) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return SampleIndexSet(std::move(indices), bound);
}

bool SampleIndexSet::contains(std::size_t i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

SampleIndexSet SampleIndexSet::complement() const {
  std::vector<std::size_t> out;
  out.reserve(bound_ - indices_.size());
  auto it = indices_.begin();
  for (std::size_t i = 0; i < bound_; ++i) {
    if (it != indices_.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return SampleIndexSet(std::move(out), bound_);
}

// ---------------------------------------------------------------------------
// FeatureIdSet

FeatureIdSet::FeatureIdSet(std::vector<FeatureId> ids) : ids_(std::move(ids)) {
  if (!strictly_ascending(ids_)) {
    throw BoundsError("feature id set must be strictly ascending");
  }
}

FeatureIdSet::FeatureIdSet(std::initializer_list<FeatureId> ids)
    : FeatureIdSet(std::vector<FeatureId>(ids)) {}

FeatureIdSet FeatureIdSet::from_unsorted(std::vector<FeatureId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return FeatureIdSet(std::move(ids));
}

FeatureIdSet FeatureIdSet::range(FeatureId first, FeatureId last) {
  std::vector<FeatureId> ids;
  if (last > first) {
    ids.resize(last - first);
    std::iota(ids.begin(), ids.end(), first);
  }
  return FeatureIdSet(std::move(ids));
}

bool FeatureIdSet::contains(FeatureId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

FeatureIdSet set_union(const FeatureIdSet& a, const FeatureIdSet& b) {
  std::vector<FeatureId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FeatureIdSet(std::move(out));
}

FeatureIdSet set_difference(const FeatureIdSet& a, const FeatureIdSet& b) {
  std::vector<FeatureId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FeatureIdSet(std::move(out));
}

// ---------------------------------------------------------------------------
// FeatureBatch

FeatureBatch::FeatureBatch(std::size_t batch_index, FeatureIdSet ids, RowMatrix values)
    : batch_index_(batch_index), ids_(std::move(ids)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != ids_.size()) {
    throw InconsistentStateError("feature batch " + std::to_string(batch_index_) + " has " +
                                 std::to_string(values_.rows()) + " rows for " +
                                 std::to_string(ids_.size()) + " ids");
  }
  if (!values_.allFinite()) {
    throw InconsistentStateError("feature batch " + std::to_string(batch_index_) +
                                 " contains non-finite values");
  }
}

// ---------------------------------------------------------------------------
// FeatureStore

std::size_t FeatureStore::position(FeatureId id) const {
  auto ids = ids_.ids();
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) {
    throw InconsistentStateError("feature " + std::to_string(id) + " is not in the store");
  }
  return static_cast<std::size_t>(it - ids.begin());
}

void FeatureStore::insert(const FeatureBatch& batch) {
  if (batch.n() != n_) {
    throw InconsistentStateError("feature batch " + std::to_string(batch.batch_index()) +
                                 " has " + std::to_string(batch.n()) +
                                 " columns, store expects " + std::to_string(n_));
  }
  std::vector<FeatureId> fresh;
  std::vector<Eigen::Index> fresh_rows;
  for (std::size_t i = 0; i < batch.ids().size(); ++i) {
    const FeatureId id = batch.ids()[i];
    const auto bi = static_cast<Eigen::Index>(i);
    if (ids_.contains(id)) {
      if (row(id) != batch.values().row(bi)) {
        throw InconsistentStateError("feature " + std::to_string(id) +
                                     " re-delivered with different values");
      }
    } else {
      fresh.push_back(id);
      fresh_rows.push_back(bi);
    }
  }
  if (fresh.empty()) {
    return;
  }

  FeatureIdSet merged = set_union(ids_, FeatureIdSet(fresh));
  RowMatrix rows(static_cast<Eigen::Index>(merged.size()), static_cast<Eigen::Index>(n_));
  std::size_t old_pos = 0;
  std::size_t new_pos = 0;
  for (std::size_t out = 0; out < merged.size(); ++out) {
    const auto dst = static_cast<Eigen::Index>(out);
    if (old_pos < ids_.size() && ids_[old_pos] == merged[out]) {
      rows.row(dst) = rows_.row(static_cast<Eigen::Index>(old_pos++));
    } else {
      rows.row(dst) = batch.values().row(fresh_rows[new_pos++]);
    }
  }
  ids_ = std::move(merged);
  rows_ = std::move(rows);
}

void FeatureStore::retain(const FeatureIdSet& keep) {
  std::vector<FeatureId> kept;
  std::vector<Eigen::Index> positions;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (keep.contains(ids_[i])) {
      kept.push_back(ids_[i]);
      positions.push_back(static_cast<Eigen::Index>(i));
    }
  }
  if (kept.size() == ids_.size()) {
    return;
  }
  RowMatrix rows(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = rows_.row(positions[i]);
  }
  ids_ = FeatureIdSet(std::move(kept));
  rows_ = std::move(rows);
}

// ---------------------------------------------------------------------------
// SparseCoefficients

SparseCoefficients::SparseCoefficients(
    std::initializer_list<std::pair<const FeatureId, double>> init) {
  for (const auto& [id, w] : init) {
    set(id, w);
  }
}

SparseCoefficients SparseCoefficients::from_dense(const FeatureIdSet& ids, const Vector& weights) {
  SparseCoefficients out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.set(ids[i], weights[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

void SparseCoefficients::set(FeatureId id, double weight) {
  if (weight == 0.0) {
    entries_.erase(id);
  } else {
    entries_[id] = weight;
  }
}

double SparseCoefficients::get(FeatureId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0.0 : it->second;
}

FeatureIdSet SparseCoefficients::support() const {
  std::vector<FeatureId> ids;
  ids.reserve(entries_.size());
  for (const auto& [id, w] : entries_) {
    ids.push_back(id);
  }
  return FeatureIdSet(std::move(ids));
}

double SparseCoefficients::norm() const {
  double sq = 0.0;
  for (const auto& [id, w] : entries_) {
    sq += w * w;
  }
  return std::sqrt(sq);
}

Vector SparseCoefficients::dense(const FeatureIdSet& ids) const {
  Vector out(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = get(ids[i]);
  }
  return out;
}

void SparseCoefficients::truncate(std::size_t mu) {
  if (entries_.size() <= mu) {
    return;
  }
  std::vector<FeatureId> ids;
  std::vector<double> weights;
  for (const auto& [id, w] : entries_) {
    ids.push_back(id);
    weights.push_back(w);
  }
  std::map<FeatureId, double> kept;
  for (std::size_t pos : top_magnitude_positions(ids, weights, mu)) {
    kept.emplace(ids[pos], weights[pos]);
  }
  entries_ = std::move(kept);
}

std::vector<std::size_t> top_magnitude_positions(std::span<const FeatureId> ids,
                                                 std::span<const double> weights,
                                                 std::size_t keep) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (keep >= order.size()) {
    return order;
  }
  auto before = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(weights[a]);
    const double mb = std::abs(weights[b]);
    if (ma != mb) {
      return ma > mb;
    }
    return ids[a] < ids[b];
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                   before);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

// ---------------------------------------------------------------------------
// Restricted linear operations

Vector predict(const FeatureStore& store, const SparseCoefficients& beta,
               const SampleIndexSet& samples) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(samples.size()));
  for (const auto& [id, w] : beta.entries()) {
    auto row = store.row(id);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      out[static_cast<Eigen::Index>(j)] += w * row[static_cast<Eigen::Index>(samples[j])];
    }
  }
  return out;
}

Vector residual(const FeatureStore& store, const SparseCoefficients& beta,
                std::span<const double> y) {
  if (y.size() != store.n()) {
    throw InstanceMismatchError("response has " + std::to_string(y.size()) +
                                " entries, store has n = " + std::to_string(store.n()));
  }
  Vector fitted = predict(store, beta, SampleIndexSet::full(store.n()));
  Vector r(fitted.size());
  for (Eigen::Index j = 0; j < fitted.size(); ++j) {
    r[j] = std::abs(y[static_cast<std::size_t>(j)] - fitted[j]);
  }
  return r;
}

double restricted_objective(const FeatureStore& store, const SparseCoefficients& beta,
                            std::span<const double> y, const SampleIndexSet& samples) {
  Vector fitted = predict(store, beta, samples);
  double sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double d = y[samples[j]] - fitted[static_cast<Eigen::Index>(j)];
    sum += d * d;
  }
  return sum;
}

Vector fitted_values(const FeatureStore& store, const Vector& beta) {
  if (static_cast<std::size_t>(beta.size()) != store.size()) {
    throw InconsistentStateError("coefficient vector not aligned with the feature store");
  }
  if (store.size() == 0) {
    return Vector::Zero(static_cast<Eigen::Index>(store.n()));
  }
  return store.rows().transpose() * beta;
}

double restricted_objective(const FeatureStore& store, const Vector& beta,
                            std::span<const double> y, const SampleIndexSet& samples) {
  const Vector fitted = fitted_values(store, beta);
  double sum = 0.0;
  for (std::size_t j : samples) {
    const double d = y[j] - fitted[static_cast<Eigen::Index>(j)];
    sum += d * d;
  }
  return sum;
}

}  // namespace roofs
