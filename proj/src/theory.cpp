#include "roofs/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "roofs/errors.hpp"

namespace roofs {

namespace {

constexpr int kInverseIterations = 100;

double sum_smallest_squares(std::span<const double> r, std::size_t count) {
  std::vector<double> sq(r.size());
  std::transform(r.begin(), r.end(), sq.begin(), [](double v) { return v * v; });
  std::sort(sq.begin(), sq.end());
  return std::accumulate(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(count), 0.0);
}

// Smallest eigenvalue of a symmetric positive semi-definite matrix by inverse
// iteration; 0 when the matrix is numerically singular.
double smallest_eigenvalue(const Eigen::MatrixXd& gram, Rng& rng) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Vector d = ldlt.vectorD();
  const double d_max = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || d_max == 0.0 ||
      d.minCoeff() <= d_max * 1e-13) {
    return 0.0;
  }
  std::normal_distribution<double> normal;
  Vector v(gram.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = normal(rng);
  }
  v.normalize();
  for (int it = 0; it < kInverseIterations; ++it) {
    v = ldlt.solve(v);
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      return 0.0;
    }
    v /= norm;
  }
  return std::max(0.0, v.dot(gram * v));
}

}  // namespace

bool check_lemma1(std::span<const double> r, std::size_t tau1, std::size_t tau2) {
  if (!(tau1 >= 1 && tau1 < tau2 && tau2 <= r.size())) {
    throw ConfigError("lemma 1 check needs 1 <= tau1 < tau2 <= n");
  }
  return sum_smallest_squares(r, tau1) <= sum_smallest_squares(r, tau2);
}

double lambda_of_gamma(double gamma) {
  if (!(gamma > 0.5) || gamma > 1.0) {
    throw DomainError("lambda(gamma) needs gamma in (0.5, 1], got " + std::to_string(gamma));
  }
  return 1.0 + 128.0 * (1.0 - gamma) / (2.0 * gamma - 1.0);
}

Lemma2Check check_lemma2(const SparseCoefficients& beta, const SampleIndexSet& s_t,
                         const GroundTruth& truth, const FeatureStore& store,
                         std::span<const double> y) {
  if (s_t.bound() != truth.s_star.bound()) {
    throw InstanceMismatchError("snapshot and ground truth disagree on n");
  }
  const double lambda = lambda_of_gamma(truth.gamma());
  Lemma2Check check;
  check.within_truth = s_t.size() <= truth.s_star.size();
  check.lambda = check.within_truth ? 1.0 : lambda;
  check.lhs = restricted_objective(store, beta, y, s_t);
  check.rhs = check.lambda * restricted_objective(store, beta, y, truth.s_star);
  check.slack = check.rhs - check.lhs;
  check.holds = check.lhs <= check.rhs;
  return check;
}

double estimate_srsc_constant(const FeatureStore& store, std::size_t mu, double gamma,
                              std::size_t trials, Rng& rng) {
  if (trials < 1) {
    throw ConfigError("convexity estimate needs at least one trial");
  }
  if (mu < 1 || mu > store.size()) {
    throw ConfigError("convexity estimate needs 1 <= mu <= retained features");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("convexity estimate needs gamma in (0, 1]");
  }
  const std::size_t n = store.n();
  const auto s_size = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(n)));

  std::vector<std::size_t> feature_pos(store.size());
  std::iota(feature_pos.begin(), feature_pos.end(), std::size_t{0});
  std::vector<std::size_t> sample_pos(n);
  std::iota(sample_pos.begin(), sample_pos.end(), std::size_t{0});

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::vector<std::size_t> psi;
    std::vector<std::size_t> s;
    std::sample(feature_pos.begin(), feature_pos.end(), std::back_inserter(psi), mu, rng);
    std::sample(sample_pos.begin(), sample_pos.end(), std::back_inserter(s), s_size, rng);

    Eigen::MatrixXd block(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(s_size));
    for (std::size_t i = 0; i < mu; ++i) {
      const auto row = store.rows().row(static_cast<Eigen::Index>(psi[i]));
      for (std::size_t j = 0; j < s_size; ++j) {
        block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            row[static_cast<Eigen::Index>(s[j])];
      }
    }
    const Eigen::MatrixXd gram = block * block.transpose();
    // Hessian of ||y_S - X_S^T beta||^2 is 2 X_S X_S^T.
    best = std::min(best, 2.0 * smallest_eigenvalue(gram, rng));
  }
  return best;
}

Theorem1Check check_theorem1(const SolveResult& result, const GroundTruth& truth,
                             const FeatureStore& store, std::span<const double> y, double eta,
                             double phi_mu_hat) {
  if (!(phi_mu_hat > 0.0)) {
    throw DomainError("theorem check needs a positive convexity constant");
  }
  if (!(eta > 0.0)) {
    throw DomainError("theorem check needs a positive step size");
  }
  if (result.s_hat.bound() != truth.s_star.bound()) {
    throw InstanceMismatchError("result and ground truth disagree on n");
  }
  const double lambda = lambda_of_gamma(truth.gamma());
  Theorem1Check check;
  const double inv = 1.0 / (eta * phi_mu_hat);
  check.alpha = inv * inv;
  check.lambda = result.s_hat.size() <= truth.s_star.size() ? 1.0 : lambda;

  const double f_hat = restricted_objective(store, result.beta_hat, y, result.s_hat);
  const double f_star = restricted_objective(store, truth.beta_star, y, truth.s_star);
  const double f_zero = restricted_objective(store, SparseCoefficients{}, y, truth.s_star);

  const double a = check.alpha;
  const double l = check.lambda;
  check.lhs = f_hat - f_star;
  check.rhs = a * l / (1.0 + a) * f_zero + (l / (1.0 + a) - 1.0) * f_star;
  check.slack = check.rhs - check.lhs;
  check.holds = check.lhs <= check.rhs;
  return check;
}

TheoryReport run_theory_checks(const SolveResult& result, const GroundTruth& truth,
                               const FeatureStore& store, std::span<const double> y,
                               std::size_t mu, std::size_t srsc_trials, std::uint64_t seed) {
  TheoryReport report;
  report.gamma = truth.gamma();
  report.lambda = lambda_of_gamma(report.gamma);

  const Vector r = residual(store, result.beta_hat, y);
  // Prefix pairs around the working-set size: (1, n) and (ceil(n/2), |S^|).
  const std::span<const double> rs(r.data(), static_cast<std::size_t>(r.size()));
  const std::size_t n = rs.size();
  report.lemma1_holds = n < 2 || check_lemma1(rs, 1, n);
  const std::size_t half = (n + 1) / 2;
  if (half >= 1 && result.s_hat.size() > half) {
    report.lemma1_holds = report.lemma1_holds && check_lemma1(rs, half, result.s_hat.size());
  }

  const Lemma2Check lemma2 = check_lemma2(result.beta_hat, result.s_hat, truth, store, y);
  report.lemma2_holds = lemma2.holds;
  report.lemma2_slack = lemma2.slack;

  Rng rng = substream(seed, 0x5C5Cu);
  report.phi_mu_hat =
      estimate_srsc_constant(store, std::min(mu, store.size()), report.gamma, srsc_trials, rng);
  if (report.phi_mu_hat > 0.0 && result.final_eta > 0.0) {
    const Theorem1Check thm =
        check_theorem1(result, truth, store, y, result.final_eta, report.phi_mu_hat);
    report.alpha_hat = thm.alpha;
    report.theorem1_holds = thm.holds;
    report.theorem1_slack = thm.slack;
  } else {
    report.theorem1_holds = false;
    report.theorem1_slack = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace roofs
