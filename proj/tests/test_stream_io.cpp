#include <cstring>
#include <fstream>
#include <random>

#include "doctest.h"
#include "roofs/errors.hpp"
#include "roofs/stream_io.hpp"
#include "temp_dir.hpp"

using namespace roofs;
namespace fs = std::filesystem;

namespace {

Dataset small_dataset(std::size_t p, std::size_t n, double cr, std::uint64_t seed) {
  GenConfig c;
  c.p = p;
  c.n = n;
  c.mu = 3;
  c.corruption_ratio = cr;
  c.seed = seed;
  return generate_dataset(c);
}

void append(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::app);
  out << text;
}

std::uint64_t bits(double v) {
  std::uint64_t b = 0;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

}  // namespace

TEST_CASE("number formatting round-trips every bit") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> any;
  int checked = 0;
  while (checked < 20000) {
    const std::uint64_t b = any(rng);
    double v = 0.0;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(bits(parse_double_exact(format_double(v), "t")) == b);
    ++checked;
  }
  for (double v : {0.0, -0.0, 1e-310, 5e-324, 1.0 / 3.0, 1e300}) {
    CHECK(bits(parse_double_exact(format_double(v), "t")) == bits(v));
  }
}

TEST_CASE("write stream: batch layout") {
  TempDir dir("layout");
  const Dataset d = small_dataset(10, 6, 0.0, 1);
  const StreamManifest m = write_stream(d, 4, dir.path());
  REQUIRE(m.batches.size() == 3);
  CHECK(m.batches[0].file == "batch_00000.csv");
  CHECK(m.batches[2].first_id == 8);
  CHECK(m.batches[2].last_id == 9);
  CHECK(fs::exists(dir / kGroundTruthFile));
  CHECK(fs::exists(dir / kResponseFile));

  FileFeatureStream stream(dir.path());
  std::vector<std::size_t> sizes;
  while (auto b = stream.next()) sizes.push_back(b->ids().size());
  CHECK(sizes == std::vector<std::size_t>{4, 4, 2});

  CHECK_THROWS_AS(write_stream(d, 0, dir.path()), ConfigError);
}

TEST_CASE("write stream: round trip is bit-exact") {
  TempDir dir("roundtrip");
  const Dataset d = small_dataset(25, 17, 0.3, 2);
  write_stream(d, 7, dir.path());

  FileFeatureStream stream(dir.path());
  const FeatureStore original = d.design.full_store();
  while (auto b = stream.next()) {
    for (std::size_t i = 0; i < b->ids().size(); ++i) {
      CHECK(b->values().row(static_cast<Eigen::Index>(i)) == original.row(b->ids()[i]));
    }
  }
  CHECK(read_stream_response(dir.path(), stream.manifest()) == d.y);

  const GroundTruth t = read_ground_truth(dir / kGroundTruthFile);
  CHECK(t.beta_star == d.truth.beta_star);
  CHECK(t.s_star == d.truth.s_star);
  CHECK(t.u == d.truth.u);
  CHECK(t.epsilon == d.truth.epsilon);
  CHECK(t.psi_star == d.truth.psi_star);

  const GenConfig c = read_dataset_config(dir.path());
  CHECK(c.p == 25);
  CHECK(c.corruption_ratio == 0.3);
  CHECK(c.seed == 2);
}

TEST_CASE("tampered files fail to load") {
  TempDir dir("tamper");
  const Dataset d = small_dataset(12, 5, 0.2, 3);
  write_stream(d, 5, dir.path());
  append(dir / "batch_00001.csv", "\n");

  FileFeatureStream stream(dir.path());
  CHECK(stream.next().has_value());
  try {
    stream.next();
    FAIL("expected a checksum error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("batch_00001.csv") != std::string::npos);
  }

  append(dir / kResponseFile, "1\n");
  CHECK_THROWS_AS(read_stream_response(dir.path(), read_manifest(dir.path())), IoError);
}

TEST_CASE("manifest validation") {
  TempDir dir("manifest");
  CHECK_THROWS_AS(read_manifest(dir.path()), IoError);

  StreamManifest m;
  m.n = 3;
  m.feature_count = 4;
  m.batches = {{"a.csv", 0, 2, "x"}, {"b.csv", 2, 3, "y"}};
  write_manifest(dir.path(), m);
  CHECK_THROWS_AS(read_manifest(dir.path()), IoError);

  m.batches = {{"a.csv", 0, 1, "x"}, {"b.csv", 3, 3, "y"}};
  write_manifest(dir.path(), m);
  CHECK_THROWS_AS(read_manifest(dir.path()), IoError);

  m.batches = {{"a.csv", 0, 1, "x"}, {"b.csv", 2, 3, "y"}};
  write_manifest(dir.path(), m);
  const StreamManifest back = read_manifest(dir.path());
  CHECK(back.batches.size() == 2);
  CHECK(back.batches[1].checksum == "y");
}

TEST_CASE("malformed batch lines report file and line") {
  TempDir dir("malformed");
  {
    std::ofstream out(dir / "b.csv");
    out << "0,1.5,2\n1,3,oops\n";
  }
  try {
    read_batch_file(dir / "b.csv", 0, 2);
    FAIL("expected a parse error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("b.csv:2") != std::string::npos);
  }
  {
    std::ofstream out(dir / "c.csv");
    out << "0,1.5\n";
  }
  CHECK_THROWS_AS(read_batch_file(dir / "c.csv", 0, 2), IoError);
  CHECK_THROWS_AS(read_batch_file(dir / "missing.csv", 0, 2), IoError);
}
