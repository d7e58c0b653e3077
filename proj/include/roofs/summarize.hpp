#pragma once

// Aggregation of results.csv into summary tables.
//
//   summary.csv          one row per configuration (seed and rep pooled) with
//                        count, mean and sample std of each metric
//   table_<metric>.csv   mean metric, one row per setting and method, one
//                        column per corruption ratio
//   curves.csv           long format: setting, method, corruption_ratio,
//                        metric, mean, std, count

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace roofs {

inline constexpr const char* kSummaryFile = "summary.csv";
inline constexpr const char* kCurvesFile = "curves.csv";

struct ResultsTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

/// IoError naming the line of any row whose field count differs from the
/// header's.
ResultsTable read_results(const std::filesystem::path& path);

struct MetricStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation; 0 for a single value
};

MetricStats aggregate(const std::vector<double>& values);

struct SummaryOutcome {
  std::size_t input_rows = 0;
  std::size_t groups = 0;
  std::vector<std::filesystem::path> written;
};

/// Writes the summary files into `out_dir`. An empty results file produces
/// header-only outputs and a warning on `log`.
SummaryOutcome summarize(const std::filesystem::path& results, const std::filesystem::path& out_dir,
                         std::ostream& log);

}  // namespace roofs
