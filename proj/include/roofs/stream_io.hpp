#pragma once

// On-disk feature stream.
//
//   <dir>/manifest.txt      n, feature count, ordered batch files with SHA-256
//   <dir>/batch_00000.csv   one line per feature: <id>,<v_0>,...,<v_{n-1}>
//   <dir>/response.txt      n lines, one response value each
//   <dir>/ground_truth.txt  beta*, S*, u and eps sections (never read by solvers)
//   <dir>/dataset.txt       generator configuration
//
// Numbers are written in shortest round-trip decimal form, so reading a file
// back reproduces every double bit for bit.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "roofs/core.hpp"
#include "roofs/datagen.hpp"
#include "roofs/feature_stream.hpp"

namespace roofs {

struct BatchFileEntry {
  std::string file;
  FeatureId first_id = 0;
  FeatureId last_id = 0;  ///< inclusive
  std::string checksum;
};

struct StreamManifest {
  std::size_t n = 0;
  std::size_t feature_count = 0;
  std::string checksum_algorithm = "sha256";
  std::vector<BatchFileEntry> batches;
  std::string response_file = "response.txt";
  std::string response_checksum;
};

inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kResponseFile = "response.txt";
inline constexpr const char* kGroundTruthFile = "ground_truth.txt";
inline constexpr const char* kDatasetFile = "dataset.txt";

std::string format_double(double value);
double parse_double_exact(std::string_view text, const std::string& where);

std::string sha256_file(const std::filesystem::path& path);

void write_batch_file(const std::filesystem::path& path, const FeatureBatch& batch);
FeatureBatch read_batch_file(const std::filesystem::path& path, std::size_t batch_index,
                             std::size_t n);

void write_response(const std::filesystem::path& path, const Vector& y);
Vector read_response(const std::filesystem::path& path);

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth read_ground_truth(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& dir, const StreamManifest& manifest);
/// Parses and validates the manifest (disjoint id ranges covering every
/// declared feature). Checksums are verified when files are read.
StreamManifest read_manifest(const std::filesystem::path& dir);

/// Writes the whole dataset as a feature stream of `batch_size` consecutive
/// ids per file, plus response, ground truth and generator config.
StreamManifest write_stream(const Dataset& dataset, std::size_t batch_size,
                            const std::filesystem::path& dir);

/// Response file of a stream directory, checksum-verified.
Vector read_stream_response(const std::filesystem::path& dir, const StreamManifest& manifest);

/// Generator configuration stored next to a stream.
GenConfig read_dataset_config(const std::filesystem::path& dir);

/// Reads batch files lazily in manifest order, verifying each checksum.
class FileFeatureStream : public FeatureStream {
 public:
  explicit FileFeatureStream(std::filesystem::path dir);
  std::optional<FeatureBatch> next() override;
  const StreamManifest& manifest() const { return manifest_; }

 private:
  std::filesystem::path dir_;
  StreamManifest manifest_;
  std::size_t next_ = 0;
};

}  // namespace roofs
