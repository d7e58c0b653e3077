#include "roofs/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "roofs/errors.hpp"

namespace roofs {

SortPermutation sort_by_magnitude(std::span<const double> r) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::isnan(r[i])) {
      throw InvalidResidualError("residual " + std::to_string(i) + " is NaN");
    }
  }
  SortPermutation perm;
  perm.order.resize(r.size());
  std::iota(perm.order.begin(), perm.order.end(), std::size_t{0});
  std::sort(perm.order.begin(), perm.order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(r[a]);
    const double mb = std::abs(r[b]);
    return ma < mb || (ma == mb && a < b);
  });
  return perm;
}

SampleIndexSet hard_threshold_select(std::span<const double> r, std::size_t tau) {
  if (tau > r.size()) {
    throw BoundsError("tau = " + std::to_string(tau) + " exceeds n = " + std::to_string(r.size()));
  }
  SortPermutation perm = sort_by_magnitude(r);
  perm.order.resize(tau);
  std::sort(perm.order.begin(), perm.order.end());
  return SampleIndexSet(std::move(perm.order), r.size());
}

TauEstimate estimate_tau(std::span<const double> r) {
  const std::size_t n = r.size();
  if (n < 2) {
    throw InstanceTooSmallError("tau estimation needs at least 2 samples, got " + std::to_string(n));
  }
  const SortPermutation perm = sort_by_magnitude(r);

  // sorted[k - 1] = r_(k) and sq[k - 1] = r_(k)^2; prefix[k] = sum of the k
  // smallest squares accumulated in ascending order.
  std::vector<double> sorted(n);
  std::vector<double> sq(n);
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = std::abs(r[perm.order[k]]);
    sq[k] = sorted[k] * sorted[k];
    prefix[k + 1] = prefix[k] + sq[k];
  }

  const std::size_t half = (n + 1) / 2;
  for (std::size_t tau = n; tau > half; --tau) {
    const std::size_t tau_prime = tau - half;
    const double mean_sq = prefix[tau_prime] / static_cast<double>(tau_prime);

    // sq is non-decreasing: the closest value sits next to lower_bound(mean).
    auto it = std::lower_bound(sq.begin(), sq.end(), mean_sq);
    std::size_t best = it == sq.end() ? n - 1 : static_cast<std::size_t>(it - sq.begin());
    if (best > 0 && std::abs(sq[best - 1] - mean_sq) <= std::abs(sq[best] - mean_sq)) {
      best -= 1;
    }
    // First occurrence of that value gives the smallest position.
    best = static_cast<std::size_t>(std::lower_bound(sq.begin(), sq.end(), sq[best]) - sq.begin());
    const std::size_t tau_o = best + 1;

    const double bound = 2.0 * static_cast<double>(tau) * sorted[tau_o - 1] /
                         static_cast<double>(tau_o);
    if (sorted[tau - 1] <= bound) {
      return TauEstimate{tau, tau_o, tau_prime, false};
    }
  }

  // Nothing satisfied the constraint; report tau_o for the fallback tau.
  const std::size_t tau = half + 1;
  const std::size_t tau_prime = tau - half;
  const double mean_sq = prefix[tau_prime] / static_cast<double>(tau_prime);
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(sq[k] - mean_sq) < std::abs(sq[best] - mean_sq)) {
      best = k;
    }
  }
  return TauEstimate{tau, best + 1, tau_prime, true};
}

SampleIndexSet update_uncorrupted_set(std::span<const double> r, const TauMode& mode,
                                      bool& fallback_used) {
  fallback_used = false;
  if (const auto* fixed = std::get_if<FixedTau>(&mode)) {
    if (!(fixed->gamma > 0.0 && fixed->gamma <= 1.0)) {
      throw ConfigError("fixed uncorrupted ratio must lie in (0, 1], got " +
                        std::to_string(fixed->gamma));
    }
    const auto tau = static_cast<std::size_t>(std::llround(fixed->gamma * static_cast<double>(r.size())));
    return hard_threshold_select(r, std::min(tau, r.size()));
  }
  const TauEstimate est = estimate_tau(r);
  fallback_used = est.fallback_used;
  return hard_threshold_select(r, est.tau_hat);
}

SampleIndexSet update_uncorrupted_set(std::span<const double> r, const TauMode& mode) {
  bool ignored = false;
  return update_uncorrupted_set(r, mode, ignored);
}

}  // namespace roofs
