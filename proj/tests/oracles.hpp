#pragma once

// Reference implementations used only by the tests. Each one takes the
// slowest obvious route so it shares no code or shortcuts with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Minimal-norm tau-subset by enumerating every subset of [n]. Among subsets
// of equal norm the lexicographically smallest index list wins, which is the
// same set the ascending-index tie rule picks.
inline std::vector<std::size_t> min_norm_subset(const std::vector<double>& r, std::size_t tau) {
  const std::size_t n = r.size();
  std::vector<std::size_t> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != tau) {
      continue;
    }
    std::vector<std::size_t> idx;
    std::vector<double> sq;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        idx.push_back(i);
        sq.push_back(r[i] * r[i]);
      }
    }
    // Summing in value order makes equal multisets give identical sums.
    std::sort(sq.begin(), sq.end());
    double cost = 0.0;
    for (double v : sq) cost += v;
    if (cost < best_cost || (cost == best_cost && idx < best)) {
      best_cost = cost;
      best = idx;
    }
  }
  return best;
}

struct Tau {
  std::size_t tau_hat;
  std::size_t tau_o;
  bool fallback;
};

// Direct scan of the size-estimation constraint: for tau = n down to
// ceil(n/2)+1, m = mean of the tau - ceil(n/2) smallest squared residuals,
// tau_o = position (1-based, sorted) whose squared residual is nearest m
// (smallest position on ties), accept when r_(tau) <= 2 tau r_(tau_o) / tau_o.
inline Tau scan_tau(const std::vector<double>& r) {
  const std::size_t n = r.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::fabs(r[i]);
  std::sort(s.begin(), s.end());
  const std::size_t half = n / 2 + n % 2;

  auto nearest = [&](std::size_t tau) {
    const std::size_t tp = tau - half;
    double sum = 0.0;
    for (std::size_t k = 0; k < tp; ++k) sum += s[k] * s[k];
    const double m = sum / static_cast<double>(tp);
    std::size_t best = 1;
    double best_d = std::fabs(s[0] * s[0] - m);
    for (std::size_t k = 2; k <= n; ++k) {
      const double d = std::fabs(s[k - 1] * s[k - 1] - m);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  };

  for (std::size_t tau = n; tau >= half + 1; --tau) {
    const std::size_t to = nearest(tau);
    if (s[tau - 1] <= 2.0 * static_cast<double>(tau) * s[to - 1] / static_cast<double>(to)) {
      return {tau, to, false};
    }
  }
  return {half + 1, nearest(half + 1), true};
}

// argmin ||y - A^T b|| via the normal equations (A is features x samples).
inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd gram = a * a.transpose();
  return gram.ldlt().solve(a * y);
}

inline double top_singular_value(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

inline double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return es.eigenvalues()(0);
}

// Sum of the k smallest squares, by full sort.
inline double smallest_squares(std::vector<double> r, std::size_t k) {
  for (double& v : r) v = v * v;
  std::sort(r.begin(), r.end());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += r[i];
  return s;
}

// Residual vectors with plenty of ties, zeros, outliers and sign changes.
inline std::vector<double> random_residuals(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<int> small(0, 4);
  std::normal_distribution<double> normal;
  std::vector<double> r(n);
  const int k = kind(rng);
  for (double& v : r) {
    switch (k) {
      case 0: v = normal(rng); break;
      case 1: v = static_cast<double>(small(rng)); break;                 // heavy ties
      case 2: v = small(rng) == 0 ? 100.0 * normal(rng) : normal(rng); break;  // outliers
      case 3: v = small(rng) < 2 ? 0.0 : std::exp(3.0 * normal(rng)); break;   // zeros, wide range
      default: v = 0.5 * static_cast<double>(small(rng)) - 1.0; break;         // signed ties
    }
  }
  return r;
}

}  // namespace oracle
