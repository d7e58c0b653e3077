#include "roofs/stream_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "roofs/config.hpp"
#include "roofs/errors.hpp"

namespace fs = std::filesystem;

namespace roofs {

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return in;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) {
      return out;
    }
    start = pos + 1;
  }
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') {
    s.remove_suffix(1);
  }
  return s;
}

std::uint64_t parse_u64_exact(std::string_view text, const std::string& at) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError(at + ": expected an unsigned integer, got '" + std::string(text) + "'");
  }
  return value;
}

void verify_checksum(const fs::path& path, const std::string& expected) {
  const std::string actual = sha256_file(path);
  if (actual != expected) {
    throw IoError("checksum mismatch for " + path.string() + ": manifest has " + expected +
                  ", file hashes to " + actual);
  }
}

std::string batch_file_name(std::size_t index) {
  std::ostringstream name;
  name << "batch_" << std::setw(5) << std::setfill('0') << index << ".csv";
  return name.str();
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) {
    throw IoError("cannot format number");
  }
  return std::string(buf.data(), ptr);
}

double parse_double_exact(std::string_view text, const std::string& at) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw IoError(at + ": expected a finite number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in = open_in(path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256 unavailable");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize got = in.gcount();
    if (got > 0) {
      EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(got));
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest.data(), &len);
  EVP_MD_CTX_free(ctx);

  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::setw(2) << static_cast<int>(digest[i]);
  }
  return hex.str();
}

void write_batch_file(const fs::path& path, const FeatureBatch& batch) {
  std::ofstream out = open_out(path);
  const RowMatrix& values = batch.values();
  std::string line;
  for (std::size_t i = 0; i < batch.ids().size(); ++i) {
    line = std::to_string(batch.ids()[i]);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      line += ',';
      line += format_double(values(static_cast<Eigen::Index>(i), j));
    }
    line += '\n';
    out << line;
  }
  finish(out, path);
}

FeatureBatch read_batch_file(const fs::path& path, std::size_t batch_index, std::size_t n) {
  std::ifstream in = open_in(path);
  std::vector<FeatureId> ids;
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = strip_cr(line);
    if (text.empty()) {
      continue;
    }
    const auto fields = split(text, ',');
    if (fields.size() != n + 1) {
      throw IoError(where(path, lineno) + ": expected " + std::to_string(n + 1) +
                    " fields, got " + std::to_string(fields.size()));
    }
    ids.push_back(parse_u64_exact(fields[0], where(path, lineno)));
    for (std::size_t j = 1; j < fields.size(); ++j) {
      values.push_back(parse_double_exact(fields[j], where(path, lineno)));
    }
  }
  RowMatrix rows(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(n));
  if (!values.empty()) {
    rows = Eigen::Map<const RowMatrix>(values.data(), rows.rows(), rows.cols());
  }
  // Rows are sorted alongside their ids if the file is not in id order.
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  RowMatrix sorted(rows.rows(), rows.cols());
  std::vector<FeatureId> sorted_ids(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(order[i]));
    sorted_ids[i] = ids[order[i]];
  }
  try {
    return FeatureBatch(batch_index, FeatureIdSet(std::move(sorted_ids)), std::move(sorted));
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_response(const fs::path& path, const Vector& y) {
  std::ofstream out = open_out(path);
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    out << format_double(y[j]) << '\n';
  }
  finish(out, path);
}

Vector read_response(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = strip_cr(line);
    if (text.empty()) {
      continue;
    }
    values.push_back(parse_double_exact(text, where(path, lineno)));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_ground_truth(const fs::path& path, const GroundTruth& truth) {
  std::ofstream out = open_out(path);
  out << "# ground truth; solvers must not read this file\n";
  out << "n = " << truth.s_star.bound() << '\n';
  out << "[beta_star]\n";
  for (const auto& [id, w] : truth.beta_star.entries()) {
    out << id << ',' << format_double(w) << '\n';
  }
  out << "[s_star]\n";
  for (std::size_t j : truth.s_star) {
    out << j << '\n';
  }
  out << "[u]\n";
  for (Eigen::Index j = 0; j < truth.u.size(); ++j) {
    if (truth.u[j] != 0.0) {
      out << j << ',' << format_double(truth.u[j]) << '\n';
    }
  }
  out << "[epsilon]\n";
  for (Eigen::Index j = 0; j < truth.epsilon.size(); ++j) {
    out << format_double(truth.epsilon[j]) << '\n';
  }
  finish(out, path);
}

GroundTruth read_ground_truth(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::string section;
  std::size_t n = 0;
  bool have_n = false;
  GroundTruth truth;
  std::vector<std::size_t> s_star;
  std::vector<std::pair<std::size_t, double>> u;
  std::vector<double> eps;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = strip_cr(line);
    if (text.empty() || text.front() == '#') {
      continue;
    }
    const std::string at = where(path, lineno);
    if (text.front() == '[') {
      section = std::string(text);
      continue;
    }
    if (section.empty()) {
      const std::string prefix = "n = ";
      if (text.substr(0, prefix.size()) != prefix) {
        throw IoError(at + ": expected 'n = <count>'");
      }
      n = parse_u64_exact(text.substr(prefix.size()), at);
      have_n = true;
    } else if (section == "[beta_star]") {
      const auto f = split(text, ',');
      if (f.size() != 2) {
        throw IoError(at + ": expected id,weight");
      }
      truth.beta_star.set(parse_u64_exact(f[0], at), parse_double_exact(f[1], at));
    } else if (section == "[s_star]") {
      s_star.push_back(parse_u64_exact(text, at));
    } else if (section == "[u]") {
      const auto f = split(text, ',');
      if (f.size() != 2) {
        throw IoError(at + ": expected index,value");
      }
      u.emplace_back(parse_u64_exact(f[0], at), parse_double_exact(f[1], at));
    } else if (section == "[epsilon]") {
      eps.push_back(parse_double_exact(text, at));
    } else {
      throw IoError(at + ": unknown section " + section);
    }
  }
  if (!have_n) {
    throw IoError(path.string() + ": missing sample count");
  }
  try {
    truth.s_star = SampleIndexSet(std::move(s_star), n);
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  truth.u = Vector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& [j, v] : u) {
    if (j >= n) {
      throw IoError(path.string() + ": corruption index out of range");
    }
    truth.u[static_cast<Eigen::Index>(j)] = v;
  }
  if (!eps.empty() && eps.size() != n) {
    throw IoError(path.string() + ": noise section has " + std::to_string(eps.size()) +
                  " values, expected " + std::to_string(n));
  }
  truth.epsilon = eps.empty() ? Vector::Zero(static_cast<Eigen::Index>(n))
                              : Vector(Eigen::Map<const Vector>(eps.data(), static_cast<Eigen::Index>(n)));
  truth.psi_star = truth.beta_star.support();
  return truth;
}

void write_manifest(const fs::path& dir, const StreamManifest& manifest) {
  const fs::path path = dir / kManifestFile;
  std::ofstream out = open_out(path);
  out << "# feature stream manifest\n";
  out << "checksum_algorithm = " << manifest.checksum_algorithm << '\n';
  out << "n = " << manifest.n << '\n';
  out << "features = " << manifest.feature_count << '\n';
  out << "response = " << manifest.response_file << ':' << manifest.response_checksum << '\n';
  for (const BatchFileEntry& b : manifest.batches) {
    out << "batch = " << b.file << ':' << b.first_id << ':' << b.last_id << ':' << b.checksum
        << '\n';
  }
  finish(out, path);
}

StreamManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestFile;
  if (!fs::exists(path)) {
    throw IoError("no manifest at " + path.string());
  }
  KeyValueConfig kv;
  try {
    kv = KeyValueConfig::load(path);
    kv.require_known({"checksum_algorithm", "n", "features", "response", "batch"});
  } catch (const ConfigError& e) {
    throw IoError(e.what());
  }

  StreamManifest m;
  try {
    m.checksum_algorithm = kv.one("checksum_algorithm");
    m.n = kv.count("n");
    m.feature_count = kv.count("features");
  } catch (const ConfigError& e) {
    throw IoError(e.what());
  }
  if (m.checksum_algorithm != "sha256") {
    throw IoError(path.string() + ": unsupported checksum algorithm " + m.checksum_algorithm);
  }
  const std::string at = path.string();
  if (kv.has("response")) {
    const auto f = split(kv.one("response"), ':');
    if (f.size() != 2) {
      throw IoError(at + ": response entry must be file:checksum");
    }
    m.response_file = std::string(f[0]);
    m.response_checksum = std::string(f[1]);
  }
  if (kv.has("batch")) {
    for (const std::string& entry : kv.all("batch")) {
      const auto f = split(entry, ':');
      if (f.size() != 4) {
        throw IoError(at + ": batch entry must be file:first_id:last_id:checksum");
      }
      BatchFileEntry b;
      b.file = std::string(f[0]);
      b.first_id = parse_u64_exact(f[1], at);
      b.last_id = parse_u64_exact(f[2], at);
      b.checksum = std::string(f[3]);
      if (b.last_id < b.first_id) {
        throw IoError(at + ": batch " + b.file + " has an empty id range");
      }
      m.batches.push_back(std::move(b));
    }
  }

  // Ranges must be disjoint and together cover exactly the declared features.
  std::vector<std::pair<FeatureId, FeatureId>> ranges;
  std::size_t covered = 0;
  for (const BatchFileEntry& b : m.batches) {
    ranges.emplace_back(b.first_id, b.last_id);
    covered += static_cast<std::size_t>(b.last_id - b.first_id + 1);
  }
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].first <= ranges[i - 1].second) {
      throw IoError(at + ": batch id ranges overlap");
    }
  }
  if (covered != m.feature_count) {
    throw IoError(at + ": batches cover " + std::to_string(covered) + " ids but " +
                  std::to_string(m.feature_count) + " features are declared");
  }
  return m;
}

StreamManifest write_stream(const Dataset& dataset, std::size_t batch_size, const fs::path& dir) {
  if (batch_size < 1) {
    throw ConfigError("batch_size must be >= 1");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }

  const GaussianDesign& design = dataset.design;
  StreamManifest m;
  m.n = design.n();
  m.feature_count = design.p();
  DesignStream stream(design, batch_size);
  while (std::optional<FeatureBatch> batch = stream.next()) {
    BatchFileEntry entry;
    entry.file = batch_file_name(batch->batch_index());
    entry.first_id = batch->ids()[0];
    entry.last_id = batch->ids()[batch->ids().size() - 1];
    write_batch_file(dir / entry.file, *batch);
    entry.checksum = sha256_file(dir / entry.file);
    m.batches.push_back(std::move(entry));
  }

  write_response(dir / kResponseFile, dataset.y);
  m.response_file = kResponseFile;
  m.response_checksum = sha256_file(dir / kResponseFile);
  write_ground_truth(dir / kGroundTruthFile, dataset.truth);

  const GenConfig& c = dataset.config;
  const fs::path cfg_path = dir / kDatasetFile;
  std::ofstream cfg = open_out(cfg_path);
  cfg << "p = " << c.p << '\n'
      << "n = " << c.n << '\n'
      << "mu = " << c.mu << '\n'
      << "corruption_ratio = " << format_double(c.corruption_ratio) << '\n'
      << "sigma = " << format_double(c.sigma) << '\n'
      << "corruption_scale = " << format_double(c.corruption_scale) << '\n'
      << "seed = " << c.seed << '\n'
      << "batch_size = " << batch_size << '\n';
  finish(cfg, cfg_path);

  write_manifest(dir, m);
  return m;
}

Vector read_stream_response(const fs::path& dir, const StreamManifest& manifest) {
  const fs::path path = dir / manifest.response_file;
  if (!manifest.response_checksum.empty()) {
    verify_checksum(path, manifest.response_checksum);
  }
  Vector y = read_response(path);
  if (static_cast<std::size_t>(y.size()) != manifest.n) {
    throw IoError(path.string() + ": " + std::to_string(y.size()) + " responses, manifest says " +
                  std::to_string(manifest.n));
  }
  return y;
}

GenConfig read_dataset_config(const fs::path& dir) {
  const KeyValueConfig kv = KeyValueConfig::load(dir / kDatasetFile);
  GenConfig c;
  c.p = kv.count("p");
  c.n = kv.count("n");
  c.mu = kv.count("mu");
  c.corruption_ratio = kv.number("corruption_ratio");
  c.sigma = kv.number("sigma");
  c.corruption_scale = kv.number("corruption_scale");
  c.seed = parse_u64(kv.one("seed"), "seed");
  return c;
}

FileFeatureStream::FileFeatureStream(fs::path dir)
    : dir_(std::move(dir)), manifest_(read_manifest(dir_)) {}

std::optional<FeatureBatch> FileFeatureStream::next() {
  if (next_ >= manifest_.batches.size()) {
    return std::nullopt;
  }
  const BatchFileEntry& entry = manifest_.batches[next_];
  const fs::path path = dir_ / entry.file;
  verify_checksum(path, entry.checksum);
  FeatureBatch batch = read_batch_file(path, next_, manifest_.n);
  const std::size_t expected = static_cast<std::size_t>(entry.last_id - entry.first_id + 1);
  if (batch.ids().size() != expected || batch.ids()[0] != entry.first_id ||
      batch.ids()[batch.ids().size() - 1] != entry.last_id) {
    throw IoError(path.string() + ": ids do not match the manifest range");
  }
  ++next_;
  return batch;
}

}  // namespace roofs
