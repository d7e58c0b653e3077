#include <fstream>
#include <sstream>

#include "doctest.h"
#include "roofs/errors.hpp"
#include "roofs/experiment.hpp"
#include "roofs/summarize.hpp"
#include "temp_dir.hpp"

using namespace roofs;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// Drops the wall_time field from every row.
std::vector<std::string> without_wall_time(const std::vector<std::string>& rows) {
  const auto& cols = result_columns();
  const std::size_t skip = static_cast<std::size_t>(
      std::find(cols.begin(), cols.end(), "wall_time") - cols.begin());
  std::vector<std::string> out;
  for (const std::string& row : rows) {
    std::stringstream in(row);
    std::string field, kept;
    for (std::size_t i = 0; std::getline(in, field, ','); ++i) {
      if (i != skip) kept += field + ",";
    }
    out.push_back(kept);
  }
  return out;
}

ExperimentSpec spec_from(const std::string& text, const fs::path& out) {
  KeyValueConfig kv = KeyValueConfig::parse(text);
  kv.set("out", {out.string()});
  return ExperimentSpec::from_config(kv);
}

}  // namespace

TEST_CASE("solver and tau mode tokens") {
  CHECK(SolverChoice::parse("roofs").kind == SolverKind::Roofs);
  CHECK(SolverChoice::parse("torr25").kind == SolverKind::Torr25);
  const SolverChoice fixed = SolverChoice::parse("torr@0.8");
  CHECK(fixed.kind == SolverKind::TorrFixed);
  CHECK(fixed.parameter == 0.8);
  CHECK(SolverChoice::parse("torr_shift@-0.075").parameter == -0.075);
  CHECK_THROWS_AS(SolverChoice::parse("torr@0.4"), ConfigError);
  CHECK_THROWS_AS(SolverChoice::parse("lasso"), ConfigError);

  CHECK(std::holds_alternative<AdaptiveTau>(parse_tau_mode("adaptive")));
  CHECK(std::get<FixedTau>(parse_tau_mode("fixed:0.7")).gamma == 0.7);
  CHECK(tau_mode_token(FixedTau{0.7}) == "fixed:0.7");
  CHECK_THROWS_AS(parse_tau_mode("fixed:1.5"), ConfigError);
  CHECK_THROWS_AS(parse_tau_mode("sometimes"), ConfigError);
}

TEST_CASE("experiment spec validation") {
  TempDir dir("spec");
  CHECK_THROWS_AS(spec_from("p = 10\nn = 10\n", dir.path()), ConfigError);
  CHECK_THROWS_AS(spec_from("p = 10\nn = 10\nseeds = 1\nbatch_size = 0\n", dir.path()), ConfigError);
  CHECK_THROWS_AS(spec_from("p = 10\nn = 10\nseeds = 1\nbogus = 3\n", dir.path()), ConfigError);
  const ExperimentSpec s = spec_from(
      "p = 10\nn = 20\nseeds = 1, 2, 3\ncorruption_ratio = 0.1, 0.2\nrepetitions = 2\n", dir.path());
  CHECK(s.cells().size() == 12);
  CHECK(s.batch_size == std::vector<std::size_t>{100});
  CHECK(s.cells()[0].mu() == 2);
  CHECK(s.cells()[1].data_seed() != s.cells()[0].data_seed());
}

TEST_CASE("one cell gives one row per seed") {
  TempDir dir("rows");
  const ExperimentSpec s =
      spec_from("p = 60\nn = 40\nseeds = 4, 5, 6\nbatch_size = 20\n", dir.path());
  std::ostringstream log;
  const ExperimentOutcome o = run_experiment(s, 1, log);
  CHECK(o.failed == 0);
  const auto rows = lines(dir / kResultsFile);
  CHECK(rows.size() == 4);
  CHECK(rows[0].rfind("p,n,mu,", 0) == 0);
  CHECK(fs::exists(dir / kMetadataFile));
  const std::string meta = lines(dir / kMetadataFile)[0];
  CHECK(meta.find("version") != std::string::npos);
}

TEST_CASE("reruns and thread counts give identical rows apart from timing") {
  TempDir a("det_a"), b("det_b");
  const std::string cfg =
      "p = 80\nn = 50\nmu_ratio = 0.1\ncorruption_ratio = 0.1, 0.3\nseeds = 1, 2\n"
      "batch_size = 30\nsolver = roofs, ols, oracle, torr_star, torr25\n"
      "tau_mode = adaptive, fixed:0.8\ntheory_checks = true\nsrsc_trials = 3\n";
  std::ostringstream log;
  run_experiment(spec_from(cfg, a.path()), 1, log);
  run_experiment(spec_from(cfg, b.path()), 3, log);
  const auto ra = lines(a / kResultsFile);
  const auto rb = lines(b / kResultsFile);
  CHECK(ra.size() == 1 + 4 * 6);
  CHECK(without_wall_time(ra) == without_wall_time(rb));
}

TEST_CASE("failed cells are logged and skipped") {
  TempDir dir("fail");
  // A single sample is too few to estimate the uncorrupted-set size.
  const ExperimentSpec s = spec_from("p = 10\nn = 1, 30\nseeds = 1, 2\nbatch_size = 5\n", dir.path());
  std::ostringstream log;
  const ExperimentOutcome o = run_experiment(s, 2, log);
  CHECK(o.jobs == 4);
  CHECK(o.failed == 2);
  CHECK(o.rows == 2);
  CHECK(lines(dir / kResultsFile).size() == 3);
  CHECK(fs::exists(dir / kErrorsFile));
  CHECK(log.str().find("failed") != std::string::npos);
}

TEST_CASE("summaries of a real grid") {
  TempDir dir("grid");
  const ExperimentSpec s = spec_from(
      "p = 60\nn = 40\ncorruption_ratio = 0.1, 0.2\nseeds = 1, 2, 3\nbatch_size = 20\n"
      "solver = roofs, ols\n",
      dir.path());
  std::ostringstream log;
  run_experiment(s, 1, log);
  const SummaryOutcome o = summarize(dir / kResultsFile, dir.path(), log);
  CHECK(o.input_rows == 12);
  CHECK(o.groups == 4);
  const auto table = lines(dir / "table_f1_uncorrupted.csv");
  REQUIRE(table.size() == 3);
  CHECK(table[0].find("cr=0.1,cr=0.2") != std::string::npos);
}
