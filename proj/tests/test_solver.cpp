#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "roofs/datagen.hpp"
#include "roofs/errors.hpp"
#include "roofs/solver.hpp"

using namespace roofs;

namespace {

FeatureBatch identity_batch(std::size_t n, double scale = 1.0) {
  std::vector<FeatureId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  RowMatrix m = scale * RowMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  return FeatureBatch(0, FeatureIdSet(ids), m);
}

SolverState state_with(const FeatureBatch& batch, std::span<const double> y) {
  return ingest_batch(SolverState::initial(y), batch);
}

Dataset dataset(std::size_t p, std::size_t n, std::size_t mu, double cr, double sigma,
                std::uint64_t seed) {
  GenConfig c;
  c.p = p;
  c.n = n;
  c.mu = mu;
  c.corruption_ratio = cr;
  c.sigma = sigma;
  c.seed = seed;
  return generate_dataset(c);
}

Eigen::MatrixXd dense(const FeatureStore& store) { return store.rows(); }

}  // namespace

TEST_CASE("initial state") {
  const std::vector<double> y{1.0, -2.0, 0.5};
  const SolverState s = SolverState::initial(y);
  CHECK(s.psi().empty());
  CHECK(s.s_t == SampleIndexSet::full(3));
  CHECK(s.r_t[1] == 2.0);
  CHECK(s.inner_iter == 0);
  CHECK(s.batch_iter == 0);
}

TEST_CASE("ingest batch") {
  const std::vector<double> y(4, 1.0);
  const GaussianDesign design(200, 4, 1);
  std::vector<FeatureId> ids(100);
  for (FeatureId i = 0; i < 100; ++i) ids[i] = i;
  const FeatureBatch first = design.batch(0, FeatureIdSet(ids));

  SolverState s = ingest_batch(SolverState::initial(y), first);
  CHECK(s.psi() == FeatureIdSet::range(0, 100));
  CHECK(s.beta.isZero());

  s.beta[3] = 0.7;
  const SolverState again = ingest_batch(s, first);
  CHECK(again.psi() == s.psi());
  CHECK(again.beta == s.beta);

  SolverState small = ingest_batch(SolverState::initial(y), design.batch(0, {0, 1}));
  small.beta << 0.25, -0.5;
  small = ingest_batch(small, design.batch(1, {1, 2}));
  CHECK(small.psi() == FeatureIdSet{0, 1, 2});
  CHECK(small.beta[0] == 0.25);
  CHECK(small.beta[1] == -0.5);
  CHECK(small.beta[2] == 0.0);
}

TEST_CASE("gradient step") {
  const std::vector<double> y{1.0, 2.0};
  SolverState s = state_with(identity_batch(2), y);
  const SolverState stepped = gradient_step(s, y, 0.5);
  CHECK(stepped.beta[0] == doctest::Approx(0.5));
  CHECK(stepped.beta[1] == doctest::Approx(1.0));

  CHECK(gradient_step(s, y, 0.0).beta == s.beta);

  s.beta << 1.0, 2.0;
  CHECK(gradient_step(s, y, 0.7).beta == s.beta);

  s.s_t = SampleIndexSet({}, 2);
  CHECK_THROWS_AS(gradient_step(s, y, 0.5), InconsistentStateError);
}

TEST_CASE("gradient step only uses the working samples") {
  const std::vector<double> y{1.0, 2.0};
  SolverState s = state_with(identity_batch(2), y);
  s.s_t = SampleIndexSet({1}, 2);
  const SolverState stepped = gradient_step(s, y, 1.0);
  CHECK(stepped.beta[0] == 0.0);
  CHECK(stepped.beta[1] == doctest::Approx(2.0));
}

TEST_CASE("automatic step size") {
  const std::vector<double> y(6, 1.0);
  CHECK(auto_step(state_with(identity_batch(6), y)) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(auto_step(state_with(identity_batch(6, 2.0), y)) == doctest::Approx(0.25).epsilon(0.05));

  const FeatureBatch zeros(0, {0, 1}, RowMatrix::Zero(2, 6));
  CHECK(auto_step(state_with(zeros, y)) == 1e-6);

  const std::vector<double> y50(50, 0.0);
  const GaussianDesign design(20, 50, 8);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SolverState s = state_with(design.batch(0, FeatureIdSet::range(0, 20)), y50);
    const double sigma = oracle::top_singular_value(dense(s.store));
    CHECK(auto_step(s, seed) == doctest::Approx(1.0 / (sigma * sigma)).epsilon(0.05));
  }
}

TEST_CASE("automatic step respects the working sample set") {
  const std::vector<double> y(50, 0.0);
  const GaussianDesign design(20, 50, 9);
  SolverState s = state_with(design.batch(0, FeatureIdSet::range(0, 20)), y);
  s.s_t = SampleIndexSet::from_unsorted({0, 3, 4, 10, 11, 12, 30, 31, 40, 41, 42, 43, 49}, 50);
  Eigen::MatrixXd block(20, static_cast<Eigen::Index>(s.s_t.size()));
  for (std::size_t k = 0; k < s.s_t.size(); ++k) {
    block.col(static_cast<Eigen::Index>(k)) = s.store.rows().col(static_cast<Eigen::Index>(s.s_t[k]));
  }
  const double sigma = oracle::top_singular_value(block);
  CHECK(auto_step(s) == doctest::Approx(1.0 / (sigma * sigma)).epsilon(0.05));
}

TEST_CASE("prune features") {
  const std::vector<double> y(3, 0.0);
  SolverState s = state_with(identity_batch(3), y);
  s.beta << 0.9, -0.5, 0.1;
  const SolverState pruned = prune_features(s, 2);
  CHECK(pruned.psi() == FeatureIdSet{0, 1});
  CHECK(pruned.store.rows().rows() == 2);
  CHECK(pruned.beta[1] == -0.5);

  CHECK(prune_features(s, 3).psi() == s.psi());

  SolverState tie = ingest_batch(SolverState::initial(y),
                                 FeatureBatch(0, {1, 2, 3}, RowMatrix::Identity(3, 3)));
  tie.beta << 0.5, 0.5, 0.9;
  CHECK(prune_features(tie, 2).psi() == FeatureIdSet{1, 3});
}

TEST_CASE("inner loop: clean single batch reaches the least-squares solution") {
  const Dataset d = dataset(20, 100, 20, 0.0, 0.0, 5);
  const FeatureStore full = d.design.full_store();
  const Eigen::VectorXd ls = oracle::least_squares(dense(full), d.y);

  SolverConfig cfg;
  cfg.mu = 20;
  DesignStream stream(d.design, 20);
  const SolveResult r = solve(stream, as_span(d.y), cfg);
  CHECK(r.all_converged());
  CHECK((r.beta_hat.dense(full.ids()) - ls).norm() <= 1e-3);
}

TEST_CASE("inner loop: noisy single batch with every sample kept matches least squares") {
  const Dataset d = dataset(20, 100, 20, 0.0, 0.1, 6);
  const FeatureStore full = d.design.full_store();
  const Eigen::VectorXd ls = oracle::least_squares(dense(full), d.y);

  SolverConfig cfg;
  cfg.mu = 20;
  cfg.tau_mode = FixedTau{1.0};
  DesignStream stream(d.design, 20);
  const SolveResult r = solve(stream, as_span(d.y), cfg);
  CHECK((r.beta_hat.dense(full.ids()) - ls).norm() <= 1e-3);
}

TEST_CASE("inner loop stopping rules") {
  const Dataset d = dataset(30, 60, 5, 0.1, 0.1, 7);
  const std::span<const double> y = as_span(d.y);
  const SolverState start = state_with(d.design.batch(0, FeatureIdSet::range(0, 30)), y);

  SolverConfig loose;
  loose.mu = 5;
  loose.epsilon = 1e6;
  const SolverState one = inner_loop(start, y, loose);
  CHECK(one.batch_inner_iters == 1);
  CHECK(one.converged);

  SolverConfig capped;
  capped.mu = 5;
  capped.max_inner_iters = 1;
  const SolverState cap = inner_loop(start, y, capped);
  CHECK(cap.batch_inner_iters == 1);
  CHECK_FALSE(cap.converged);
  CHECK(cap.inner_iter == 1);
}

TEST_CASE("solve") {
  SUBCASE("empty stream") {
    VectorFeatureStream empty({});
    const std::vector<double> y(3, 0.0);
    SolverConfig cfg;
    CHECK_THROWS_AS(solve(empty, y, cfg), ConfigError);
  }
  SUBCASE("sample count mismatch") {
    VectorFeatureStream stream({identity_batch(3)});
    const std::vector<double> y(4, 0.0);
    SolverConfig cfg;
    CHECK_THROWS_AS(solve(stream, y, cfg), ConfigError);
  }
  SUBCASE("zero corruption, zero noise, p = mu = 5") {
    const Dataset d = dataset(5, 50, 5, 0.0, 0.0, 8);
    DesignStream stream(d.design, 5);
    SolverConfig cfg;
    cfg.mu = 5;
    const SolveResult r = solve(stream, as_span(d.y), cfg);
    CHECK((r.beta_hat.dense(FeatureIdSet::range(0, 5)) -
           d.truth.beta_star.dense(FeatureIdSet::range(0, 5)))
              .norm() <= 1e-3);
  }
  SUBCASE("all-zero response") {
    const GaussianDesign design(40, 30, 2);
    DesignStream stream(design, 10);
    const std::vector<double> y(30, 0.0);
    SolverConfig cfg;
    cfg.mu = 8;
    const SolveResult r = solve(stream, y, cfg);
    CHECK(r.beta_hat.empty());
    CHECK(r.converged_per_batch.size() == 4);
  }
  SUBCASE("bad configuration") {
    VectorFeatureStream stream({identity_batch(3)});
    const std::vector<double> y(3, 0.0);
    SolverConfig cfg;
    cfg.mu = 0;
    CHECK_THROWS_AS(solve(stream, y, cfg), ConfigError);
    cfg.mu = 1;
    cfg.eta = -1.0;
    CHECK_THROWS_AS(solve(stream, y, cfg), ConfigError);
  }
}

TEST_CASE("per-iteration invariants") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Dataset d = dataset(120, 80, 10, 0.2, 0.1, seed);
    const std::span<const double> y = as_span(d.y);
    const std::size_t n = 80;
    for (const TauMode mode : {TauMode{AdaptiveTau{}}, TauMode{FixedTau{0.75}}}) {
      SolverConfig step;
      step.mu = 10;
      step.max_inner_iters = 1;
      step.tau_mode = mode;
      SolverState s = SolverState::initial(y);
      DesignStream stream(d.design, 30);
      while (auto batch = stream.next()) {
        s = ingest_batch(std::move(s), *batch);
        for (int it = 0; it < 25; ++it) {
          const std::size_t fallbacks = s.tau_fallbacks;
          s = inner_loop(std::move(s), y, step);
          CHECK(s.psi().size() <= 10);
          CHECK(s.coefficients().support().size() <= s.psi().size());
          if (std::holds_alternative<FixedTau>(mode)) {
            CHECK(s.s_t.size() == 60);
          } else {
            CHECK((s.s_t.size() > (n + 1) / 2 || s.tau_fallbacks > fallbacks));
          }
        }
      }
    }
  }
}

TEST_CASE("automatic step gives descent with the sample set held fixed") {
  std::mt19937_64 rng(31);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dataset d = dataset(40, 60, 8, 0.2, 0.1, seed);
    const std::span<const double> y = as_span(d.y);
    SolverState s = state_with(d.design.batch(0, FeatureIdSet::range(0, 40)), y);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < s.beta.size(); ++i) s.beta[i] = normal(rng);
    s.s_t = hard_threshold_select(oracle::random_residuals(rng, 60), 30 + seed % 30);
    const double eta = auto_step(s, seed);
    for (int it = 0; it < 10; ++it) {
      const double before = restricted_objective(s.store, s.beta, y, s.s_t);
      s = gradient_step(std::move(s), y, eta);
      const double after = restricted_objective(s.store, s.beta, y, s.s_t);
      CHECK(after <= before * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("solve is deterministic") {
  const Dataset d = dataset(150, 70, 15, 0.2, 0.1, 3);
  SolverConfig cfg;
  cfg.mu = 15;
  cfg.seed = 3;
  DesignStream a(d.design, 40);
  DesignStream b(d.design, 40);
  const SolveResult ra = solve(a, as_span(d.y), cfg);
  const SolveResult rb = solve(b, as_span(d.y), cfg);
  CHECK(ra.beta_hat == rb.beta_hat);
  CHECK(ra.s_hat == rb.s_hat);
  CHECK(ra.psi_hat == rb.psi_hat);
  CHECK(ra.objective_trace == rb.objective_trace);
  CHECK(ra.inner_iterations_total == rb.inner_iterations_total);
}
