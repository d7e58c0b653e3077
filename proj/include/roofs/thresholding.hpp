#pragma once

// Sample-side hard thresholding: pick the tau samples with the smallest
// residual magnitude, and estimate tau itself from the residual profile.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "roofs/core.hpp"

namespace roofs {

/// order[i] is the sample holding the (i+1)-th smallest residual magnitude.
/// Equal magnitudes are ordered by ascending sample index.
struct SortPermutation {
  std::vector<std::size_t> order;
};

SortPermutation sort_by_magnitude(std::span<const double> r);

/// The tau smallest-magnitude samples, returned in index order.
SampleIndexSet hard_threshold_select(std::span<const double> r, std::size_t tau);

struct TauEstimate {
  std::size_t tau_hat = 0;
  std::size_t tau_o = 0;      ///< 1-based sorted position used in the accepted constraint
  std::size_t tau_prime = 0;  ///< tau_hat - ceil(n/2)
  bool fallback_used = false;
};

/// Largest tau in (ceil(n/2), n] whose sorted residual r_(tau) satisfies
///   r_(tau) <= 2 * tau * r_(tau_o) / tau_o,
/// where tau_o is the sorted position whose squared residual is closest to the
/// mean of the tau - ceil(n/2) smallest squared residuals (ties: smallest
/// position). Scans downward from n. When no tau qualifies, returns
/// ceil(n/2) + 1 with fallback_used set.
TauEstimate estimate_tau(std::span<const double> r);

struct AdaptiveTau {};
struct FixedTau {
  double gamma = 1.0;
};
using TauMode = std::variant<AdaptiveTau, FixedTau>;

/// S = H_tau(r) with tau from estimate_tau (adaptive) or round(gamma * n).
SampleIndexSet update_uncorrupted_set(std::span<const double> r, const TauMode& mode);

/// Same as above, also reporting whether the adaptive fallback fired.
SampleIndexSet update_uncorrupted_set(std::span<const double> r, const TauMode& mode,
                                      bool& fallback_used);

}  // namespace roofs
