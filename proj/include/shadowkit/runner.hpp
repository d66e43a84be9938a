#pragma once

// Runs one configured experiment and produces its reports: summary.json
// (resolved config, checks, statistics) and detail.csv (one row per sample).

#include <string>
#include <vector>

#include <json.hpp>

#include "shadowkit/config.hpp"

namespace shadowkit {

struct Check {
  std::string name;
  bool passed = false;
  double value = 0;
  double bound = 0;
  std::string note;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<Check> checks;
  nlohmann::json statistics = nlohmann::json::object();
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;

  bool passed() const;
  std::string detail_csv() const;
  nlohmann::json summary() const;
};

// Deterministic given config.seed; `jobs` only changes scheduling.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs = 1);

// Writes <dir>/summary.json and <dir>/detail.csv, creating dir if needed.
void write_reports(const ExperimentResult& result, const std::string& dir);

// %.17g, so every reported double parses back to the same value.
std::string format_number(double v);

}  // namespace shadowkit
