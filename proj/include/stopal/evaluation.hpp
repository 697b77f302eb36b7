#pragma once

#include <optional>
#include <vector>

#include "stopal/al_loop.hpp"

namespace stopal {

/// Paired (test error, error ratio) sequences after running-minimum
/// filtering on the ratios.
struct FilteredSequences {
  std::vector<double> test_errors;
  std::vector<double> error_ratios;
};

/// Keeps step i iff its lambda_t is strictly below every previously kept
/// lambda_t (the first step with a ratio is always kept). Steps without a
/// ratio are ignored; throws if none carries one.
FilteredSequences filter_running_min(const std::vector<TraceRecord>& trace);

/// Sample Pearson correlation of the filtered pairs. Throws when fewer
/// than two points exist or either sequence is constant.
double pearson_correlation(const FilteredSequences& sequences);

/// First step t with t >= max(warmup, min_steps) and lambda_t <= threshold;
/// lambdas[i] is step i+1's ratio (unset while the normalizer is undefined).
std::optional<int> stop_step_for_threshold(const std::vector<std::optional<double>>& lambdas,
                                           double threshold, int warmup, int min_steps);

/// Stop steps for every threshold, replayed from a recorded trace.
std::vector<std::pair<double, std::optional<int>>> compute_stop_steps(
    const std::vector<TraceRecord>& trace, const std::vector<double>& thresholds, int warmup,
    int min_steps);

}  // namespace stopal
