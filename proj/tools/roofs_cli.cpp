// roofs: dataset generation, experiment grids, summaries and theory checks.
//
//   roofs gen          --config data.cfg --out data/
//   roofs run          --config exp.cfg [--out dir] [--threads 4]
//   roofs summarize    --out dir            (reads dir/results.csv)
//   roofs check-theory --data data/ [--out dir]

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "roofs/config.hpp"
#include "roofs/datagen.hpp"
#include "roofs/errors.hpp"
#include "roofs/experiment.hpp"
#include "roofs/metrics.hpp"
#include "roofs/solver.hpp"
#include "roofs/stream_io.hpp"
#include "roofs/summarize.hpp"
#include "roofs/theory.hpp"

namespace fs = std::filesystem;
using namespace roofs;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

KeyValueConfig load_or_empty(const std::string& path) {
  return path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
}

int cmd_gen(const Globals& g, std::optional<std::size_t> p, std::optional<std::size_t> n,
            std::optional<double> mu_ratio, std::optional<double> cr, std::optional<double> sigma,
            std::optional<std::size_t> batch_size) {
  KeyValueConfig kv = load_or_empty(g.config);
  kv.require_known({"p", "n", "mu", "mu_ratio", "corruption_ratio", "sigma", "corruption_scale",
                    "seed", "batch_size", "out"});
  GenConfig c;
  c.p = p ? *p : kv.count("p");
  c.n = n ? *n : kv.count("n");
  if (mu_ratio) {
    c.mu = static_cast<std::size_t>(std::llround(*mu_ratio * static_cast<double>(c.p)));
  } else if (kv.has("mu")) {
    c.mu = kv.count("mu");
  } else {
    c.mu = static_cast<std::size_t>(
        std::llround(kv.number_or("mu_ratio", 0.2) * static_cast<double>(c.p)));
  }
  c.corruption_ratio = cr ? *cr : kv.number_or("corruption_ratio", 0.1);
  c.sigma = sigma ? *sigma : kv.number_or("sigma", 0.1);
  c.corruption_scale = kv.number_or("corruption_scale", c.corruption_scale);
  c.seed = g.seed ? *g.seed : (kv.has("seed") ? parse_u64(kv.one("seed"), "seed") : 0);
  const std::size_t bs = batch_size ? *batch_size : kv.count_or("batch_size", 100);
  std::string out = g.out;
  if (out.empty()) {
    out = kv.maybe("out").value_or("data");
  }
  c.validate();
  if (c.stress_run()) {
    std::cerr << "note: corruption ratio >= 0.5; theory checks do not apply to this instance\n";
  }
  const Dataset data = generate_dataset(c);
  const StreamManifest m = write_stream(data, bs, out);
  std::cout << "wrote " << m.batches.size() << " batch files for " << m.feature_count
            << " features x " << m.n << " samples to " << out << '\n';
  return 0;
}

int cmd_run(const Globals& g) {
  if (g.config.empty()) {
    throw ConfigError("run needs --config");
  }
  KeyValueConfig kv = KeyValueConfig::load(g.config);
  if (g.seed) {
    kv.set("seeds", {std::to_string(*g.seed)});
  }
  if (!g.out.empty()) {
    kv.set("out", {g.out});
  }
  const ExperimentSpec spec = ExperimentSpec::from_config(kv);
  const ExperimentOutcome o = run_experiment(spec, g.threads, std::cerr);
  std::cout << o.rows << " rows from " << o.jobs - o.failed << "/" << o.jobs << " jobs written to "
            << (spec.out / kResultsFile).string() << '\n';
  return o.failed == 0 ? 0 : 1;
}

int cmd_summarize(const Globals& g, const std::string& results_arg) {
  fs::path results = results_arg;
  fs::path out = g.out;
  if (results.empty()) {
    if (out.empty()) {
      throw ConfigError("summarize needs --out <dir> or --results <file>");
    }
    results = out / kResultsFile;
  }
  if (out.empty()) {
    out = results.parent_path().empty() ? fs::path(".") : results.parent_path();
  }
  const SummaryOutcome o = summarize(results, out, std::cerr);
  std::cout << o.groups << " groups from " << o.input_rows << " rows; wrote";
  for (const auto& p : o.written) {
    std::cout << ' ' << p.filename().string();
  }
  std::cout << '\n';
  return 0;
}

int cmd_check_theory(const Globals& g, const std::string& data_dir, std::optional<std::size_t> mu,
                     const std::string& tau_mode, std::size_t trials) {
  if (data_dir.empty()) {
    throw ConfigError("check-theory needs --data <dir> (output of 'gen')");
  }
  const GenConfig gen = read_dataset_config(data_dir);
  SolverConfig sc;
  sc.mu = mu ? *mu : gen.mu;
  sc.tau_mode = parse_tau_mode(tau_mode);
  sc.seed = g.seed ? *g.seed : gen.seed;

  // The solver sees only the batch files and the response.
  FileFeatureStream stream(data_dir);
  const Vector y = read_stream_response(data_dir, stream.manifest());
  const SolveResult result = solve(stream, as_span(y), sc);

  // Checks need the full design and the ground truth, read separately.
  const GroundTruth truth = read_ground_truth(fs::path(data_dir) / kGroundTruthFile);
  FeatureStore full(stream.manifest().n);
  FileFeatureStream again(data_dir);
  while (auto b = again.next()) {
    full.insert(*b);
  }
  const RunMetrics m = score_run(result, truth, result.wall_time_seconds);
  if (!(truth.gamma() > 0.5)) {
    throw DomainError("instance has gamma <= 1/2; the guarantees do not apply");
  }
  const TheoryReport r =
      run_theory_checks(result, truth, full, as_span(y), sc.mu, trials, sc.seed);

  const fs::path out = g.out.empty() ? fs::path(data_dir) : fs::path(g.out);
  fs::create_directories(out);
  const fs::path path = out / "theory.txt";
  std::ofstream f(path);
  f << "gamma = " << format_double(r.gamma) << '\n'
    << "lambda = " << format_double(r.lambda) << '\n'
    << "phi_mu_hat = " << format_double(r.phi_mu_hat) << '\n'
    << "alpha_hat = " << format_double(r.alpha_hat) << '\n'
    << "final_eta = " << format_double(result.final_eta) << '\n'
    << "converged = " << (result.all_converged() ? "true" : "false") << '\n'
    << "lemma1 = " << (r.lemma1_holds ? "true" : "false") << '\n'
    << "lemma2 = " << (r.lemma2_holds ? "true" : "false") << '\n'
    << "lemma2_slack = " << format_double(r.lemma2_slack) << '\n'
    << "theorem1 = " << (r.theorem1_holds ? "true" : "false") << '\n'
    << "theorem1_slack = " << format_double(r.theorem1_slack) << '\n'
    << "l2_error = " << format_double(m.l2_error) << '\n'
    << "f1_uncorrupted = " << format_double(m.f1_uncorrupted) << '\n'
    << "f1_features = " << format_double(m.f1_features) << '\n';
  if (!f) {
    throw IoError("cannot write " + path.string());
  }
  std::cout << "lemma1=" << r.lemma1_holds << " lemma2=" << r.lemma2_holds
            << " theorem1=" << r.theorem1_holds << "; report in " << path.string() << '\n';
  return r.lemma1_holds && r.lemma2_holds && r.theorem1_holds ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust regression with online feature selection"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the seed (gen) or seed list (run)");
  app.add_option("--config", g.config, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads for run")->check(CLI::PositiveNumber);
  app.fallthrough();

  auto* gen = app.add_subcommand("gen", "Generate a dataset and write it as a feature stream");
  std::optional<std::size_t> p, n, bs;
  std::optional<double> mu_ratio, cr, sigma;
  gen->add_option("--p", p, "Feature count");
  gen->add_option("--n", n, "Sample count");
  gen->add_option("--mu-ratio", mu_ratio, "Support size as a fraction of p");
  gen->add_option("--corruption-ratio", cr, "Fraction of corrupted responses");
  gen->add_option("--sigma", sigma, "Dense noise standard deviation");
  gen->add_option("--batch-size", bs, "Features per batch file");

  auto* run = app.add_subcommand("run", "Run an experiment grid");

  auto* sum = app.add_subcommand("summarize", "Aggregate results.csv into summary tables");
  std::string results;
  sum->add_option("--results", results, "results.csv to read (default <out>/results.csv)");

  auto* theory = app.add_subcommand("check-theory", "Solve a stored stream and run theory checks");
  std::string data_dir;
  std::optional<std::size_t> mu;
  std::string tau_mode = "adaptive";
  std::size_t trials = 20;
  theory->add_option("--data", data_dir, "Directory written by gen")->check(CLI::ExistingDirectory);
  theory->add_option("--mu", mu, "Retained feature budget (default: true support size)");
  theory->add_option("--tau-mode", tau_mode, "adaptive or fixed:<gamma>");
  theory->add_option("--srsc-trials", trials, "Random subsets for the convexity estimate");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) {
    g.seed = seed;
  }

  try {
    if (*gen) return cmd_gen(g, p, n, mu_ratio, cr, sigma, bs);
    if (*run) return cmd_run(g);
    if (*sum) return cmd_summarize(g, results);
    if (*theory) return cmd_check_theory(g, data_dir, mu, tau_mode, trials);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
