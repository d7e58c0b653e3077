#include "roofs/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "roofs/errors.hpp"
#include "roofs/stream_io.hpp"

namespace fs = std::filesystem;

namespace roofs {

namespace {

const std::vector<std::string> kMetrics = {"l2_error", "f1_uncorrupted", "f1_features",
                                           "wall_time"};
// Per-run identity that is pooled away when aggregating.
// gamma_param is derived per instance for torr_star and torr25.
const std::set<std::string> kPooled = {"seed", "rep", "data_seed", "gamma_param"};
// Columns that identify a setting in the pivot tables and curves.
const std::vector<std::string> kSetting = {"p", "n", "mu_ratio", "sigma"};
const std::vector<std::string> kMethod = {"solver", "tau_mode", "batch_size"};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

void write_line(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    out << (i ? "," : "") << fields[i];
  }
  out << '\n';
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

using Key = std::vector<std::string>;

Key project(const std::vector<std::string>& row, const std::vector<std::size_t>& cols) {
  Key k;
  k.reserve(cols.size());
  for (std::size_t c : cols) {
    k.push_back(row[c]);
  }
  return k;
}

// Numeric-aware ordering so "0.1" < "0.2" < "0.10000001" and "100" > "20".
bool less_field(const std::string& a, const std::string& b) {
  char* ea = nullptr;
  char* eb = nullptr;
  const double da = std::strtod(a.c_str(), &ea);
  const double db = std::strtod(b.c_str(), &eb);
  const bool na = !a.empty() && *ea == '\0';
  const bool nb = !b.empty() && *eb == '\0';
  if (na && nb && da != db) {
    return da < db;
  }
  if (na != nb) {
    return na;
  }
  return a < b;
}

struct KeyLess {
  bool operator()(const Key& a, const Key& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), less_field);
  }
};

}  // namespace

std::size_t ResultsTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw IoError("results have no '" + name + "' column");
  }
  return static_cast<std::size_t>(it - header.begin());
}

ResultsTable read_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  ResultsTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields = split_csv(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(table.header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    row_lines.push_back(lineno);
  }
  // Metric fields must parse; report the first bad one by line.
  if (!table.rows.empty()) {
    std::vector<std::size_t> metric_cols;
    for (const std::string& m : kMetrics) {
      metric_cols.push_back(table.column(m));
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      for (std::size_t c : metric_cols) {
        parse_double_exact(table.rows[i][c], path.string() + ":" + std::to_string(row_lines[i]) +
                                                 " (" + table.header[c] + ")");
      }
    }
  }
  return table;
}

MetricStats aggregate(const std::vector<double>& values) {
  MetricStats s;
  s.count = values.size();
  if (values.empty()) {
    return s;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) {
      ss += (v - s.mean) * (v - s.mean);
    }
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

SummaryOutcome summarize(const fs::path& results, const fs::path& out_dir, std::ostream& log) {
  const ResultsTable table = read_results(results);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  }
  SummaryOutcome outcome;
  outcome.input_rows = table.rows.size();

  std::vector<std::string> summary_header;
  std::vector<std::size_t> group_cols;
  std::vector<std::size_t> metric_cols;
  const bool have_header = !table.header.empty();
  if (have_header) {
    const std::set<std::string> metrics(kMetrics.begin(), kMetrics.end());
    // Config columns are everything before the first metric.
    const std::size_t first_metric = table.column(kMetrics.front());
    for (std::size_t c = 0; c < first_metric; ++c) {
      if (!kPooled.count(table.header[c])) {
        group_cols.push_back(c);
        summary_header.push_back(table.header[c]);
      }
    }
    for (const std::string& m : kMetrics) {
      metric_cols.push_back(table.column(m));
    }
  } else {
    summary_header = {"p", "n", "mu", "mu_ratio", "corruption_ratio", "sigma", "solver"};
  }
  summary_header.push_back("count");
  for (const std::string& m : kMetrics) {
    summary_header.push_back(m + "_mean");
    summary_header.push_back(m + "_std");
  }

  if (table.rows.empty()) {
    log << "warning: " << results.string() << " has no result rows; writing empty summaries\n";
  }

  // Group -> metric -> values.
  std::map<Key, std::vector<std::vector<double>>, KeyLess> groups;
  for (const auto& row : table.rows) {
    auto& bucket = groups[project(row, group_cols)];
    bucket.resize(kMetrics.size());
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      bucket[m].push_back(std::stod(row[metric_cols[m]]));
    }
  }
  outcome.groups = groups.size();

  const fs::path summary_path = out_dir / kSummaryFile;
  {
    std::ofstream out = open_out(summary_path);
    write_line(out, summary_header);
    for (const auto& [key, values] : groups) {
      std::vector<std::string> line = key;
      line.push_back(std::to_string(values.front().size()));
      for (const auto& v : values) {
        const MetricStats s = aggregate(v);
        line.push_back(format_double(s.mean));
        line.push_back(format_double(s.std));
      }
      write_line(out, line);
    }
  }
  outcome.written.push_back(summary_path);

  // Pivot and curves are keyed by setting + method, spread over corruption ratio.
  std::vector<std::size_t> setting_cols;
  std::vector<std::size_t> method_cols;
  std::size_t cr_col = 0;
  if (have_header) {
    for (const std::string& c : kSetting) setting_cols.push_back(table.column(c));
    for (const std::string& c : kMethod) method_cols.push_back(table.column(c));
    cr_col = table.column("corruption_ratio");
  }
  std::vector<std::size_t> row_cols = setting_cols;
  row_cols.insert(row_cols.end(), method_cols.begin(), method_cols.end());

  std::set<std::string, decltype(&less_field)> ratios(&less_field);
  std::map<Key, std::map<std::string, std::vector<std::vector<double>>, decltype(&less_field)>,
           KeyLess>
      pivot;
  for (const auto& row : table.rows) {
    const std::string& cr = row[cr_col];
    ratios.insert(cr);
    auto [it, inserted] = pivot.try_emplace(project(row, row_cols), &less_field);
    auto& bucket = it->second[cr];
    bucket.resize(kMetrics.size());
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      bucket[m].push_back(std::stod(row[metric_cols[m]]));
    }
  }

  std::vector<std::string> row_header;
  for (const std::string& c : kSetting) row_header.push_back(c);
  for (const std::string& c : kMethod) row_header.push_back(c);

  for (std::size_t m = 0; m < kMetrics.size(); ++m) {
    const fs::path path = out_dir / ("table_" + kMetrics[m] + ".csv");
    std::ofstream out = open_out(path);
    std::vector<std::string> header = row_header;
    for (const std::string& cr : ratios) {
      header.push_back("cr=" + cr);
    }
    write_line(out, header);
    for (const auto& [key, by_cr] : pivot) {
      std::vector<std::string> line = key;
      for (const std::string& cr : ratios) {
        const auto it = by_cr.find(cr);
        line.push_back(it == by_cr.end() ? "" : format_double(aggregate(it->second[m]).mean));
      }
      write_line(out, line);
    }
    outcome.written.push_back(path);
  }

  const fs::path curves_path = out_dir / kCurvesFile;
  {
    std::ofstream out = open_out(curves_path);
    std::vector<std::string> header = row_header;
    for (const char* c : {"corruption_ratio", "metric", "mean", "std", "count"}) {
      header.emplace_back(c);
    }
    write_line(out, header);
    for (const auto& [key, by_cr] : pivot) {
      for (const auto& [cr, values] : by_cr) {
        for (std::size_t m = 0; m < kMetrics.size(); ++m) {
          const MetricStats s = aggregate(values[m]);
          std::vector<std::string> line = key;
          line.push_back(cr);
          line.push_back(kMetrics[m]);
          line.push_back(format_double(s.mean));
          line.push_back(format_double(s.std));
          line.push_back(std::to_string(s.count));
          write_line(out, line);
        }
      }
    }
  }
  outcome.written.push_back(curves_path);
  return outcome;
}

}  // namespace roofs
