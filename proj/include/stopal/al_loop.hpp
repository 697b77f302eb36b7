#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stopal/dataset.hpp"
#include "stopal/stability.hpp"

namespace stopal {

enum class LearnerProfile { kBrr, kBlr, kGpr };

/// One acquisition step of a run.
struct TraceRecord {
  int t = 0;                // 1-based step number
  int acquired_index = 0;   // dataset row id
  double kl_forward = 0.0;
  double kl_backward = 0.0;
  double r_t = 0.0;
  std::optional<double> lambda_t;  // backfilled for t <= warmup once known
  double test_error = 0.0;
  /// Per threshold (in config order): does the stop condition hold at this step?
  std::vector<std::pair<double, bool>> stopped_flags;
};

struct AlConfig {
  LearnerProfile profile = LearnerProfile::kGpr;
  std::vector<double> thresholds;  // each in (0, 1]; the smallest halts the run
  int warmup = 10;     // m
  int min_steps = 10;
  int budget = 500;
  int rbf_centers_per_dim = 10;  // BRR/BLR basis resolution
  double blr_alpha = 1.0;
};

struct AlRunResult {
  std::vector<TraceRecord> trace;
  std::optional<int> stop_step;  // step where the smallest threshold fired
};

/// Pool-based active learning: fits hyperparameters on the seed set (then
/// freezes them), acquires one pool point per step by the profile's
/// criterion (ties to the lowest row id), records KLs, r_t, lambda_t and
/// test error, and halts at the smallest threshold's stop or at the budget.
/// Pool exhaustion ends the run gracefully.
AlRunResult run_active_learning(const Dataset& data, const LabeledPool& pool,
                                const AlConfig& config);

/// Same loop with uniformly random acquisitions drawn from `seed`.
AlRunResult run_random_baseline(const Dataset& data, const LabeledPool& pool,
                                const AlConfig& config, std::uint64_t seed);

/// Writes the trace as CSV with 17-significant-digit numbers, atomically
/// (temp file + rename).
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);

/// Reads a trace written by write_trace_csv. stopped_flags are not stored
/// in the file and come back empty.
std::vector<TraceRecord> read_trace_csv(const std::string& path);

}  // namespace stopal
