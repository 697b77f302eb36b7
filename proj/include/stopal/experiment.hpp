#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stopal/al_loop.hpp"
#include "stopal/dataset.hpp"

namespace stopal {

/// Configuration or input validation problem; the CLI exits 2 on these.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string dataset_path;
  Task task = Task::kRegression;
  LearnerProfile profile = LearnerProfile::kGpr;
  std::vector<double> thresholds;  // kept sorted descending
  int warmup = 10;     // m
  int min_steps = 10;
  int n0 = 10;
  int test_size = -1;  // negative: 20% of usable rows (at least 1)
  int budget = 500;
  std::uint64_t seed = 0;
  std::string output_dir = "stopal_out";
};

struct ExperimentSummary {
  std::string trace_path;
  std::string stop_summary_path;
  std::string correlation_path;
  std::vector<std::pair<double, std::optional<int>>> stop_steps;
  std::optional<double> pearson;  // unset when underdetermined
  int n_points = 0;               // filtered pairs entering the correlation
  int dropped_rows = 0;
  std::optional<int> stop_step;   // where the smallest threshold halted the run
};

/// Loads, normalizes and splits the dataset, runs active learning, and
/// writes trace.csv, stop_summary.csv and correlation.txt under
/// config.output_dir (each atomically; files already written are removed if
/// a later step fails). Throws ConfigError on validation problems.
ExperimentSummary run_experiment(const ExperimentConfig& config);

/// The two-line correlation report (`pearson=...`, `n_points=...`);
/// `pearson=insufficient_data` when fewer than two filtered points exist or
/// a filtered sequence is constant.
std::string correlation_report(const std::vector<TraceRecord>& trace);

}  // namespace stopal
