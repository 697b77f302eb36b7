#include "stopal/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stopal {

FilteredSequences filter_running_min(const std::vector<TraceRecord>& trace) {
  FilteredSequences out;
  double best = 0.0;
  bool any = false;
  for (const TraceRecord& record : trace) {
    if (!record.lambda_t) continue;
    if (!any || *record.lambda_t < best) {
      any = true;
      best = *record.lambda_t;
      out.error_ratios.push_back(best);
      out.test_errors.push_back(record.test_error);
    }
  }
  if (!any) {
    throw std::invalid_argument("filter_running_min: trace carries no error ratios");
  }
  return out;
}

double pearson_correlation(const FilteredSequences& sequences) {
  const std::size_t n = sequences.test_errors.size();
  if (sequences.error_ratios.size() != n) {
    throw std::invalid_argument("pearson_correlation: sequence lengths differ");
  }
  if (n < 2) {
    throw std::invalid_argument("pearson_correlation: needs at least two points");
  }
  const double count = static_cast<double>(n);
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += sequences.error_ratios[i];
    mean_y += sequences.test_errors[i];
  }
  mean_x /= count;
  mean_y /= count;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = sequences.error_ratios[i] - mean_x;
    const double dy = sequences.test_errors[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("pearson_correlation: a sequence is constant");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::optional<int> stop_step_for_threshold(const std::vector<std::optional<double>>& lambdas,
                                           double threshold, int warmup, int min_steps) {
  if (warmup < 1 || min_steps < 1) {
    throw std::invalid_argument("stop_step_for_threshold: warmup/min_steps must be >= 1");
  }
  const int gate = std::max(warmup, min_steps);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    if (t < gate || !lambdas[i]) continue;
    if (*lambdas[i] <= threshold) return t;
  }
  return std::nullopt;
}

std::vector<std::pair<double, std::optional<int>>> compute_stop_steps(
    const std::vector<TraceRecord>& trace, const std::vector<double>& thresholds, int warmup,
    int min_steps) {
  std::vector<std::optional<double>> lambdas;
  lambdas.reserve(trace.size());
  for (const TraceRecord& record : trace) lambdas.push_back(record.lambda_t);
  std::vector<std::pair<double, std::optional<int>>> out;
  out.reserve(thresholds.size());
  for (double threshold : thresholds) {
    out.emplace_back(threshold, stop_step_for_threshold(lambdas, threshold, warmup, min_steps));
  }
  return out;
}

}  // namespace stopal
