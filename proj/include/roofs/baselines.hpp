#pragma once

// Comparison solvers: a non-robust least-squares control, a least-squares fit
// on the true uncorrupted samples and true support, and fixed-ratio hard
// thresholding with full (non-streamed) access to every feature.

#include <cstddef>
#include <span>
#include <variant>

#include "roofs/core.hpp"
#include "roofs/datagen.hpp"
#include "roofs/solver.hpp"

namespace roofs {

struct OlsFull {};
struct OracleOls {};
struct FixedRatioThresholding {
  double gamma = 1.0;  ///< in (0.5, 1]
};
using BaselineKind = std::variant<OlsFull, OracleOls, FixedRatioThresholding>;

struct BaselineOptions {
  double epsilon = 1e-6;
  std::size_t max_inner_iters = 500;
  std::uint64_t seed = 0;
};

/// Gradient least squares over all n samples with top-mu truncation. This is
/// fixed_ratio_thresholding with gamma = 1.
SparseCoefficients ols_full(const FeatureStore& store, std::span<const double> y, std::size_t mu,
                            const BaselineOptions& options = {});

/// Alternates a gradient update on S with S <- the round(gamma n) smallest
/// residuals, every feature in the store available at every step: truncation
/// zeroes weights but never discards rows.
SolveResult fixed_ratio_thresholding(const FeatureStore& store, std::span<const double> y,
                                     std::size_t mu, double gamma,
                                     const BaselineOptions& options = {});

/// Least squares restricted to the true uncorrupted samples and the true
/// support. The store must hold every row of truth.psi_star.
SparseCoefficients oracle_ols(const FeatureStore& store, std::span<const double> y,
                              const GroundTruth& truth);

}  // namespace roofs
