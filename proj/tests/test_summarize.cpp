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

const char* kHeader =
    "p,n,mu_ratio,corruption_ratio,sigma,seed,rep,data_seed,solver,gamma_param,batch_size,tau_mode,"
    "l2_error,f1_uncorrupted,f1_features,wall_time\n";

std::string row(const std::string& solver, double cr, int seed, double l2) {
  std::ostringstream s;
  s << "100,50,0.2," << cr << ",0.1," << seed << ",0," << seed << "," << solver << ",,100,adaptive,"
    << l2 << ",0.9,0.5,0.01\n";
  return s.str();
}

std::vector<std::vector<std::string>> csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    out.push_back(fields);
  }
  return out;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("aggregate") {
  const MetricStats one = aggregate({2.5});
  CHECK(one.mean == 2.5);
  CHECK(one.std == 0.0);
  const MetricStats four = aggregate({1, 2, 3, 4});
  CHECK(four.mean == 2.5);
  CHECK(four.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(aggregate({}).count == 0);
}

TEST_CASE("identical rows have zero spread") {
  TempDir dir("same");
  std::string text = kHeader;
  for (int i = 0; i < 10; ++i) text += row("roofs", 0.1, i, 0.25);
  write(dir / "results.csv", text);
  std::ostringstream log;
  const SummaryOutcome o = summarize(dir / "results.csv", dir.path(), log);
  CHECK(o.groups == 1);
  const auto s = csv(dir / kSummaryFile);
  REQUIRE(s.size() == 2);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(s[0].begin(), s[0].end(), name) - s[0].begin());
  };
  CHECK(s[1][col("count")] == "10");
  CHECK(s[1][col("l2_error_mean")] == "0.25");
  CHECK(s[1][col("l2_error_std")] == "0");
}

TEST_CASE("empty results give empty summaries and a warning") {
  TempDir dir("empty");
  write(dir / "results.csv", "");
  std::ostringstream log;
  const SummaryOutcome o = summarize(dir / "results.csv", dir.path(), log);
  CHECK(o.groups == 0);
  CHECK(log.str().find("warning") != std::string::npos);
  CHECK(csv(dir / kSummaryFile).size() == 1);

  write(dir / "results.csv", kHeader);
  CHECK_NOTHROW(summarize(dir / "results.csv", dir.path(), log));
  CHECK(csv(dir / kSummaryFile).size() == 1);
}

TEST_CASE("two methods by two ratios pivot into a 2x2 grid") {
  TempDir dir("pivot");
  std::string text = kHeader;
  for (const char* solver : {"roofs", "ols"})
    for (double cr : {0.1, 0.2})
      for (int seed = 0; seed < 3; ++seed) text += row(solver, cr, seed, cr + seed);
  write(dir / "results.csv", text);
  std::ostringstream log;
  summarize(dir / "results.csv", dir.path(), log);

  const auto t = csv(dir / "table_l2_error.csv");
  REQUIRE(t.size() == 3);
  CHECK(t[0][t[0].size() - 2] == "cr=0.1");
  CHECK(t[0].back() == "cr=0.2");
  for (std::size_t r = 1; r < 3; ++r) {
    CHECK(t[r].size() == t[0].size());
    CHECK(std::stod(t[r].back()) == doctest::Approx(1.2));
  }
  // Long format: 2 methods x 2 ratios x 4 metrics.
  CHECK(csv(dir / kCurvesFile).size() == 1 + 16);
}

TEST_CASE("malformed rows are reported with their line") {
  TempDir dir("bad");
  write(dir / "results.csv", std::string(kHeader) + row("roofs", 0.1, 1, 0.2) + "1,2,3\n");
  std::ostringstream log;
  try {
    summarize(dir / "results.csv", dir.path(), log);
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("results.csv:3") != std::string::npos);
  }

  std::string bad_number = std::string(kHeader) + row("roofs", 0.1, 1, 0.2);
  bad_number += "100,50,0.2,0.1,0.1,2,0,2,roofs,,100,adaptive,abc,0.9,0.5,0.01\n";
  write(dir / "results.csv", bad_number);
  try {
    summarize(dir / "results.csv", dir.path(), log);
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("results.csv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(summarize(dir / "nope.csv", dir.path(), log), IoError);
}
