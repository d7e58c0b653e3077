#include "roofs/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include "roofs/baselines.hpp"
#include "roofs/errors.hpp"
#include "roofs/metrics.hpp"
#include "roofs/rng.hpp"
#include "roofs/solver.hpp"
#include "roofs/stream_io.hpp"
#include "roofs/theory.hpp"

namespace fs = std::filesystem;

namespace roofs {

namespace {

const std::vector<std::string> kColumns = {
    "p", "n", "mu", "mu_ratio", "corruption_ratio", "sigma", "corruption_scale", "seed", "rep",
    "data_seed", "solver", "gamma_param", "batch_size", "tau_mode", "epsilon", "max_inner_iters",
    "l2_error", "f1_uncorrupted", "f1_features", "wall_time", "converged", "batches",
    "inner_iterations", "tau_fallbacks", "final_eta", "lemma1", "lemma2", "theorem1",
    "lemma2_slack", "theorem1_slack", "phi_mu_hat", "alpha_hat"};

std::string str(double v) { return format_double(v); }
std::string str(std::size_t v) { return std::to_string(v); }
std::string str(bool v) { return v ? "true" : "false"; }

// Just above 1/2 is the smallest ratio the thresholding solver accepts.
double gamma_from_ratio(double corruption_ratio) {
  return std::clamp(1.0 - corruption_ratio, std::nextafter(0.5, 1.0), 1.0);
}

struct SolverRun {
  SolveResult result;
  double gamma_param = std::numeric_limits<double>::quiet_NaN();
  std::string batch_size = "full";
  std::string tau_mode = "na";
};

ResultRow make_row(const ExperimentSpec& spec, const DataCell& cell, const SolverChoice& solver,
                   const SolverRun& run, const RunMetrics& m,
                   const std::optional<TheoryReport>& theory) {
  ResultRow row;
  row.reserve(kColumns.size());
  row.push_back(str(cell.p));
  row.push_back(str(cell.n));
  row.push_back(str(cell.mu()));
  row.push_back(str(cell.mu_ratio));
  row.push_back(str(cell.corruption_ratio));
  row.push_back(str(cell.sigma));
  row.push_back(str(spec.corruption_scale));
  row.push_back(std::to_string(cell.seed));
  row.push_back(str(cell.rep));
  row.push_back(std::to_string(cell.data_seed()));
  row.push_back(solver.token);
  row.push_back(std::isnan(run.gamma_param) ? "" : str(run.gamma_param));
  row.push_back(run.batch_size);
  row.push_back(run.tau_mode);
  row.push_back(str(spec.epsilon));
  row.push_back(str(spec.max_inner_iters));
  row.push_back(str(m.l2_error));
  row.push_back(str(m.f1_uncorrupted));
  row.push_back(str(m.f1_features));
  row.push_back(str(m.wall_time_seconds));
  row.push_back(str(run.result.all_converged()));
  row.push_back(str(run.result.converged_per_batch.size()));
  row.push_back(str(run.result.inner_iterations_total));
  row.push_back(str(run.result.tau_fallbacks));
  row.push_back(str(run.result.final_eta));
  if (theory) {
    row.push_back(str(theory->lemma1_holds));
    row.push_back(str(theory->lemma2_holds));
    row.push_back(str(theory->theorem1_holds));
    row.push_back(str(theory->lemma2_slack));
    row.push_back(std::isnan(theory->theorem1_slack) ? "" : str(theory->theorem1_slack));
    row.push_back(str(theory->phi_mu_hat));
    row.push_back(str(theory->alpha_hat));
  } else {
    row.insert(row.end(), 7, "");
  }
  return row;
}

// Wraps a coefficient-only baseline in a result so it scores like the rest.
SolveResult wrap(SparseCoefficients beta, SampleIndexSet s) {
  SolveResult r;
  r.psi_hat = beta.support();
  r.beta_hat = std::move(beta);
  r.s_hat = std::move(s);
  r.converged_per_batch.push_back(true);
  return r;
}

template <class F>
SolveResult timed(F&& f, double& seconds) {
  const auto start = std::chrono::steady_clock::now();
  SolveResult r = f();
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

SolverChoice SolverChoice::parse(const std::string& token) {
  SolverChoice c;
  c.token = token;
  const auto at = token.find('@');
  const std::string head = token.substr(0, at);
  if (at == std::string::npos) {
    if (head == "roofs") {
      c.kind = SolverKind::Roofs;
    } else if (head == "ols") {
      c.kind = SolverKind::Ols;
    } else if (head == "oracle") {
      c.kind = SolverKind::Oracle;
    } else if (head == "torr_star") {
      c.kind = SolverKind::TorrStar;
    } else if (head == "torr25") {
      c.kind = SolverKind::Torr25;
    } else {
      throw ConfigError("unknown solver '" + token + "'");
    }
    return c;
  }
  c.parameter = parse_double(token.substr(at + 1), "solver " + token);
  if (head == "torr") {
    c.kind = SolverKind::TorrFixed;
    if (!(c.parameter > 0.5 && c.parameter <= 1.0)) {
      throw ConfigError("solver " + token + ": gamma must lie in (0.5, 1]");
    }
  } else if (head == "torr_shift") {
    c.kind = SolverKind::TorrShift;
  } else {
    throw ConfigError("unknown solver '" + token + "'");
  }
  return c;
}

TauMode parse_tau_mode(const std::string& token) {
  if (token == "adaptive") {
    return AdaptiveTau{};
  }
  const std::string prefix = "fixed:";
  if (token.rfind(prefix, 0) == 0) {
    const double g = parse_double(token.substr(prefix.size()), "tau_mode " + token);
    if (!(g > 0.0 && g <= 1.0)) {
      throw ConfigError("tau_mode " + token + ": gamma must lie in (0, 1]");
    }
    return FixedTau{g};
  }
  throw ConfigError("tau_mode must be 'adaptive' or 'fixed:<gamma>', got '" + token + "'");
}

std::string tau_mode_token(const TauMode& mode) {
  if (const auto* f = std::get_if<FixedTau>(&mode)) {
    return "fixed:" + format_double(f->gamma);
  }
  return "adaptive";
}

std::size_t DataCell::mu() const {
  const auto m = static_cast<std::size_t>(std::llround(mu_ratio * static_cast<double>(p)));
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(p, 1));
}

std::uint64_t DataCell::data_seed() const {
  if (rep == 0) {
    return seed;
  }
  return splitmix64(seed ^ splitmix64(0xD1B54A32D192ED03ULL * rep));
}

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& cfg) {
  cfg.require_known({"p", "n", "mu_ratio", "corruption_ratio", "sigma", "batch_size", "tau_mode",
                     "solver", "seeds", "repetitions", "corruption_scale", "epsilon",
                     "max_inner_iters", "theory_checks", "srsc_trials", "out"});
  ExperimentSpec s;
  s.p = cfg.counts("p");
  s.n = cfg.counts("n");
  if (cfg.has("mu_ratio")) s.mu_ratio = cfg.numbers("mu_ratio");
  if (cfg.has("corruption_ratio")) s.corruption_ratio = cfg.numbers("corruption_ratio");
  if (cfg.has("sigma")) s.sigma = cfg.numbers("sigma");
  if (cfg.has("batch_size")) s.batch_size = cfg.counts("batch_size");
  if (cfg.has("tau_mode")) s.tau_mode = cfg.all("tau_mode");
  if (cfg.has("solver")) {
    for (const std::string& t : cfg.all("solver")) {
      s.solvers.push_back(SolverChoice::parse(t));
    }
  } else {
    s.solvers.push_back(SolverChoice::parse("roofs"));
  }
  if (cfg.has("seeds")) {
    for (const std::string& t : cfg.all("seeds")) {
      s.seeds.push_back(parse_u64(t, "seeds"));
    }
  }
  s.repetitions = cfg.count_or("repetitions", s.repetitions);
  s.corruption_scale = cfg.number_or("corruption_scale", s.corruption_scale);
  s.epsilon = cfg.number_or("epsilon", s.epsilon);
  s.max_inner_iters = cfg.count_or("max_inner_iters", s.max_inner_iters);
  if (const auto v = cfg.maybe("theory_checks")) {
    if (*v != "true" && *v != "false") {
      throw ConfigError("theory_checks must be true or false");
    }
    s.theory_checks = *v == "true";
  }
  s.srsc_trials = cfg.count_or("srsc_trials", s.srsc_trials);
  if (const auto v = cfg.maybe("out")) {
    s.out = *v;
  }
  s.validate();
  return s;
}

void ExperimentSpec::validate() const {
  if (p.empty() || n.empty()) {
    throw ConfigError("experiment needs p and n");
  }
  if (seeds.empty()) {
    throw ConfigError("experiment needs at least one seed");
  }
  if (solvers.empty()) {
    throw ConfigError("experiment needs at least one solver");
  }
  if (repetitions < 1) {
    throw ConfigError("repetitions must be >= 1");
  }
  for (std::size_t b : batch_size) {
    if (b < 1) {
      throw ConfigError("batch_size must be >= 1");
    }
  }
  for (const std::string& t : tau_mode) {
    parse_tau_mode(t);
  }
  for (double r : mu_ratio) {
    if (!(r > 0.0 && r <= 1.0)) {
      throw ConfigError("mu_ratio must lie in (0, 1]");
    }
  }
  for (double cr : corruption_ratio) {
    if (!(cr >= 0.0 && cr < 1.0)) {
      throw ConfigError("corruption_ratio must lie in [0, 1)");
    }
  }
  for (double sg : sigma) {
    if (!(sg >= 0.0)) {
      throw ConfigError("sigma must be >= 0");
    }
  }
  if (!(epsilon > 0.0) || max_inner_iters < 1 || srsc_trials < 1) {
    throw ConfigError("epsilon, max_inner_iters and srsc_trials must be positive");
  }
}

std::vector<DataCell> ExperimentSpec::cells() const {
  std::vector<DataCell> out;
  for (std::size_t pp : p)
    for (std::size_t nn : n)
      for (double mr : mu_ratio)
        for (double cr : corruption_ratio)
          for (double sg : sigma)
            for (std::uint64_t sd : seeds)
              for (std::size_t rep = 0; rep < repetitions; ++rep) {
                out.push_back(DataCell{pp, nn, mr, cr, sg, sd, rep});
              }
  return out;
}

const std::vector<std::string>& result_columns() { return kColumns; }

std::vector<ResultRow> run_cell(const ExperimentSpec& spec, const DataCell& cell) {
  GenConfig gc;
  gc.p = cell.p;
  gc.n = cell.n;
  gc.mu = cell.mu();
  gc.corruption_ratio = cell.corruption_ratio;
  gc.sigma = cell.sigma;
  gc.corruption_scale = spec.corruption_scale;
  gc.seed = cell.data_seed();
  const Dataset data = generate_dataset(gc);
  const std::span<const double> y = as_span(data.y);
  const double true_gamma = data.truth.gamma();

  BaselineOptions bopt;
  bopt.epsilon = spec.epsilon;
  bopt.max_inner_iters = spec.max_inner_iters;
  bopt.seed = gc.seed;

  // Baselines get every row at once; built lazily since RoOFS-only grids
  // never need it unless theory checks run.
  std::optional<FeatureStore> full;
  auto full_store = [&]() -> const FeatureStore& {
    if (!full) {
      full = data.design.full_store();
    }
    return *full;
  };

  std::vector<ResultRow> rows;
  for (const SolverChoice& solver : spec.solvers) {
    if (solver.kind == SolverKind::Roofs) {
      for (std::size_t bs : spec.batch_size) {
        for (const std::string& tm : spec.tau_mode) {
          SolverConfig sc;
          sc.mu = gc.mu;
          sc.epsilon = spec.epsilon;
          sc.max_inner_iters = spec.max_inner_iters;
          sc.tau_mode = parse_tau_mode(tm);
          sc.seed = gc.seed;
          DesignStream stream(data.design, bs);
          SolverRun run;
          run.result = solve(stream, y, sc);
          run.batch_size = std::to_string(bs);
          run.tau_mode = tm;
          const RunMetrics m = score_run(run.result, data.truth, run.result.wall_time_seconds);
          std::optional<TheoryReport> theory;
          if (spec.theory_checks && true_gamma > 0.5) {
            theory = run_theory_checks(run.result, data.truth, full_store(), y, gc.mu,
                                       spec.srsc_trials, gc.seed);
          }
          rows.push_back(make_row(spec, cell, solver, run, m, theory));
        }
      }
      continue;
    }

    SolverRun run;
    double seconds = 0.0;
    const FeatureStore& store = full_store();
    switch (solver.kind) {
      case SolverKind::Ols:
        run.gamma_param = 1.0;
        run.result = timed(
            [&] { return wrap(ols_full(store, y, gc.mu, bopt), SampleIndexSet::full(gc.n)); },
            seconds);
        break;
      case SolverKind::Oracle:
        run.result =
            timed([&] { return wrap(oracle_ols(store, y, data.truth), data.truth.s_star); },
                  seconds);
        break;
      default: {
        double g = true_gamma;
        if (solver.kind == SolverKind::Torr25) {
          Rng rng = substream(gc.seed, 0x25u);
          std::uniform_real_distribution<double> off(-0.25, 0.25);
          g = gamma_from_ratio(cell.corruption_ratio * (1.0 + off(rng)));
        } else if (solver.kind == SolverKind::TorrFixed) {
          g = solver.parameter;
        } else if (solver.kind == SolverKind::TorrShift) {
          g = gamma_from_ratio(1.0 - (true_gamma + solver.parameter));
        } else {
          g = gamma_from_ratio(1.0 - true_gamma);
        }
        run.gamma_param = g;
        run.tau_mode = "fixed";
        run.result =
            timed([&] { return fixed_ratio_thresholding(store, y, gc.mu, g, bopt); }, seconds);
        break;
      }
    }
    run.result.wall_time_seconds = seconds;
    const RunMetrics m = score_run(run.result, data.truth, seconds);
    rows.push_back(make_row(spec, cell, solver, run, m, std::nullopt));
  }
  return rows;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::size_t threads,
                                 std::ostream& log) {
  spec.validate();
  threads = std::max<std::size_t>(threads, 1);
  std::error_code ec;
  fs::create_directories(spec.out, ec);
  if (ec) {
    throw IoError("cannot create " + spec.out.string() + ": " + ec.message());
  }

  {
    const fs::path meta_path = spec.out / kMetadataFile;
    std::ofstream meta(meta_path, std::ios::trunc);
    if (!meta) {
      throw IoError("cannot write " + meta_path.string());
    }
    meta << "version = " << kVersion << '\n'
         << "rng = " << kRngIdentity << '\n'
         << "sigma_default = 0.1\n"
         << "batch_size_default = 100\n"
         << "epsilon = " << format_double(spec.epsilon) << '\n'
         << "max_inner_iters = " << spec.max_inner_iters << '\n'
         << "corruption_scale = " << format_double(spec.corruption_scale) << '\n'
         << "step_rule = 1/sigma_max(X_psi,S)^2, 20 power iterations, once per batch\n"
         << "srsc_trials = " << spec.srsc_trials << '\n'
         << "theory_checks = " << (spec.theory_checks ? "true" : "false") << '\n';
  }

  const fs::path results_path = spec.out / kResultsFile;
  std::ofstream results(results_path, std::ios::trunc);
  if (!results) {
    throw IoError("cannot write " + results_path.string());
  }
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    results << (i ? "," : "") << kColumns[i];
  }
  results << '\n';

  const std::vector<DataCell> cells = spec.cells();
  ExperimentOutcome outcome;
  outcome.jobs = cells.size();

  // Finished jobs park here until every earlier job has been written.
  std::vector<std::optional<std::vector<ResultRow>>> done(cells.size());
  std::vector<bool> finished(cells.size(), false);
  std::size_t next_job = 0;
  std::size_t next_write = 0;
  std::mutex mu;
  std::ofstream errors;

  auto write_ready = [&]() {
    while (next_write < cells.size() && finished[next_write]) {
      if (done[next_write]) {
        for (const ResultRow& row : *done[next_write]) {
          for (std::size_t i = 0; i < row.size(); ++i) {
            results << (i ? "," : "") << row[i];
          }
          results << '\n';
          ++outcome.rows;
        }
        done[next_write].reset();
      }
      ++next_write;
    }
    results.flush();
  };

  auto worker = [&]() {
    while (true) {
      std::size_t job = 0;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next_job >= cells.size()) {
          return;
        }
        job = next_job++;
      }
      std::optional<std::vector<ResultRow>> rows;
      std::string failure;
      try {
        rows = run_cell(spec, cells[job]);
      } catch (const std::exception& e) {
        failure = e.what();
      }
      std::lock_guard<std::mutex> lock(mu);
      if (!rows) {
        const DataCell& c = cells[job];
        const std::string msg = "job " + std::to_string(job) + " (p=" + std::to_string(c.p) +
                                " n=" + std::to_string(c.n) + " cr=" +
                                format_double(c.corruption_ratio) + " seed=" +
                                std::to_string(c.seed) + " rep=" + std::to_string(c.rep) +
                                ") failed: " + failure;
        log << msg << '\n';
        if (!errors.is_open()) {
          errors.open(spec.out / kErrorsFile, std::ios::trunc);
        }
        errors << msg << '\n';
        ++outcome.failed;
      }
      done[job] = std::move(rows);
      finished[job] = true;
      write_ready();
    }
  };

  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(threads, cells.size()); ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (std::thread& t : pool) {
    t.join();
  }
  if (!results) {
    throw IoError("write failed for " + results_path.string());
  }
  return outcome;
}

}  // namespace roofs
