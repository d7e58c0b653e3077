#pragma once

// Experiment grids: every combination of the data parameters, seeds and
// repetitions is one job; each job generates its instance once and runs
// every requested solver on it.
//
// Config keys (lists allowed where marked *):
//   p*, n*, mu_ratio*, corruption_ratio*, sigma*, batch_size*, tau_mode*,
//   solver*, seeds*, repetitions, corruption_scale, epsilon, max_inner_iters,
//   theory_checks, srsc_trials, out
//
// tau_mode:  adaptive | fixed:<gamma>
// solver:    roofs | ols | oracle | torr_star | torr25 | torr@<gamma> | torr_shift@<delta>
//   torr_star   fixed-ratio thresholding with the instance's true gamma
//   torr25      same, with the corruption ratio perturbed by up to +-25%
//   torr@g      fixed gamma_param = g
//   torr_shift@d  gamma_param = true gamma + d

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "roofs/config.hpp"
#include "roofs/datagen.hpp"
#include "roofs/thresholding.hpp"

namespace roofs {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kResultsFile = "results.csv";
inline constexpr const char* kMetadataFile = "metadata.txt";
inline constexpr const char* kErrorsFile = "errors.log";

enum class SolverKind { Roofs, Ols, Oracle, TorrStar, Torr25, TorrFixed, TorrShift };

struct SolverChoice {
  SolverKind kind = SolverKind::Roofs;
  double parameter = 0.0;  ///< gamma for TorrFixed, shift for TorrShift
  std::string token;

  static SolverChoice parse(const std::string& token);
};

TauMode parse_tau_mode(const std::string& token);
std::string tau_mode_token(const TauMode& mode);

/// One data instance: everything generate_dataset needs plus its provenance.
struct DataCell {
  std::size_t p = 0;
  std::size_t n = 0;
  double mu_ratio = 0.0;
  double corruption_ratio = 0.0;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  std::size_t rep = 0;

  std::size_t mu() const;
  /// seed for rep 0, a hashed derivative for later repetitions.
  std::uint64_t data_seed() const;
};

struct ExperimentSpec {
  std::vector<std::size_t> p;
  std::vector<std::size_t> n;
  std::vector<double> mu_ratio{0.2};
  std::vector<double> corruption_ratio{0.1};
  std::vector<double> sigma{0.1};
  std::vector<std::size_t> batch_size{100};
  std::vector<std::string> tau_mode{"adaptive"};
  std::vector<SolverChoice> solvers;
  std::vector<std::uint64_t> seeds;
  std::size_t repetitions = 1;
  double corruption_scale = 5.0;
  double epsilon = 1e-6;
  std::size_t max_inner_iters = 500;
  bool theory_checks = false;
  std::size_t srsc_trials = 20;
  std::filesystem::path out = "results";

  static ExperimentSpec from_config(const KeyValueConfig& cfg);
  void validate() const;
  /// Jobs in output order.
  std::vector<DataCell> cells() const;
};

/// One results row, already formatted.
using ResultRow = std::vector<std::string>;

const std::vector<std::string>& result_columns();

/// Runs every requested solver on one instance. Pure apart from timing.
std::vector<ResultRow> run_cell(const ExperimentSpec& spec, const DataCell& cell);

struct ExperimentOutcome {
  std::size_t jobs = 0;
  std::size_t rows = 0;
  std::size_t failed = 0;
};

/// Runs the grid on `threads` workers, writing results.csv, metadata.txt and
/// (when a job fails) errors.log under spec.out. Rows come out in job order
/// whatever the thread count.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::size_t threads,
                                 std::ostream& log);

}  // namespace roofs
