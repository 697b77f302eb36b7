#include "stopal/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "stopal/evaluation.hpp"

namespace stopal {
namespace {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp);
    }
    out << content;
    if (!out.good()) {
      throw std::runtime_error("write failed for " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename into " + path);
  }
}

void validate_config(const ExperimentConfig& config) {
  if (config.dataset_path.empty()) {
    throw ConfigError("run: --data is required");
  }
  if (config.thresholds.empty()) {
    throw ConfigError("run: at least one threshold is required");
  }
  for (double threshold : config.thresholds) {
    if (!std::isfinite(threshold) || threshold <= 0.0 || threshold > 1.0) {
      throw ConfigError("run: thresholds must lie in (0, 1]");
    }
  }
  if (config.warmup < 1) throw ConfigError("run: m must be at least 1");
  if (config.min_steps < 1) throw ConfigError("run: min-steps must be at least 1");
  if (config.n0 < 1) throw ConfigError("run: n0 must be at least 1");
  if (config.budget < 0) throw ConfigError("run: budget must be nonnegative");
  if (config.output_dir.empty()) throw ConfigError("run: output directory must be nonempty");
  const bool classification = config.profile == LearnerProfile::kBlr;
  if (classification != (config.task == Task::kClassification)) {
    throw ConfigError("run: model does not match the task (blr is the classification model)");
  }
}

}  // namespace

std::string correlation_report(const std::vector<TraceRecord>& trace) {
  std::optional<double> pearson;
  int n_points = 0;
  try {
    const FilteredSequences filtered = filter_running_min(trace);
    n_points = static_cast<int>(filtered.error_ratios.size());
    pearson = pearson_correlation(filtered);
  } catch (const std::invalid_argument&) {
    pearson.reset();
  }
  std::string report = "pearson=";
  report += pearson ? format_double(*pearson) : std::string("insufficient_data");
  report += "\nn_points=" + std::to_string(n_points) + "\n";
  return report;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  if (!std::filesystem::exists(config.dataset_path)) {
    throw ConfigError("run: dataset file not found: " + config.dataset_path);
  }

  CsvLoadResult loaded;
  try {
    loaded = load_csv(config.dataset_path, config.task);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("run: ") + e.what());
  }
  if (loaded.dropped_rows > 0) {
    std::cerr << "warning: dropped " << loaded.dropped_rows << " malformed row(s) from "
              << config.dataset_path << "\n";
  }

  const int n = static_cast<int>(loaded.data.n());
  const int test_size =
      config.test_size >= 0 ? config.test_size : std::max(1, n / 5);
  if (config.n0 + test_size > n) {
    throw ConfigError("run: n0 + test_size exceeds the " + std::to_string(n) +
                      " usable rows of " + config.dataset_path);
  }
  if (test_size < 1) {
    throw ConfigError("run: test_size must be at least 1");
  }

  NormalizeResult normalized;
  LabeledPool pool;
  try {
    normalized = normalize(loaded.data);
    pool = split(normalized.data, config.n0, test_size, config.seed);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("run: ") + e.what());
  }

  std::vector<double> thresholds = config.thresholds;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());

  AlConfig al;
  al.profile = config.profile;
  al.thresholds = thresholds;
  al.warmup = config.warmup;
  al.min_steps = config.min_steps;
  al.budget = config.budget;
  AlRunResult run;
  try {
    run = run_active_learning(normalized.data, pool, al);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("run: ") + e.what());
  }

  ExperimentSummary summary;
  summary.dropped_rows = loaded.dropped_rows;
  summary.stop_step = run.stop_step;
  summary.stop_steps = compute_stop_steps(run.trace, thresholds, config.warmup,
                                          config.min_steps);
  try {
    const FilteredSequences filtered = filter_running_min(run.trace);
    summary.n_points = static_cast<int>(filtered.error_ratios.size());
    summary.pearson = pearson_correlation(filtered);
  } catch (const std::invalid_argument&) {
    summary.pearson.reset();
  }

  std::filesystem::create_directories(config.output_dir);
  const std::filesystem::path dir(config.output_dir);
  summary.trace_path = (dir / "trace.csv").string();
  summary.stop_summary_path = (dir / "stop_summary.csv").string();
  summary.correlation_path = (dir / "correlation.txt").string();

  std::string stop_summary = "threshold,stop_step,test_error_at_stop\n";
  for (const auto& [threshold, step] : summary.stop_steps) {
    stop_summary += format_double(threshold);
    stop_summary += ',';
    if (step) {
      stop_summary += std::to_string(*step);
      stop_summary += ',';
      stop_summary += format_double(run.trace[static_cast<std::size_t>(*step - 1)].test_error);
    } else {
      stop_summary += "inf,";
    }
    stop_summary += '\n';
  }

  std::vector<std::string> written;
  try {
    write_trace_csv(summary.trace_path, run.trace);
    written.push_back(summary.trace_path);
    write_text_atomic(summary.stop_summary_path, stop_summary);
    written.push_back(summary.stop_summary_path);
    write_text_atomic(summary.correlation_path, correlation_report(run.trace));
  } catch (...) {
    for (const std::string& path : written) std::remove(path.c_str());
    throw;
  }
  return summary;
}

}  // namespace stopal
