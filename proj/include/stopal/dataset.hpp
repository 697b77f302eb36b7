#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace stopal {

enum class Task { kRegression, kClassification };

struct Dataset {
  Eigen::MatrixXd features;  // n x D
  Eigen::VectorXd targets;   // n; 0/1 for classification
  std::vector<std::string> feature_names;  // empty when the file had no header
  Task task = Task::kRegression;

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

struct CsvLoadResult {
  Dataset data;
  int dropped_rows = 0;  // rows skipped for parse failures or non-finite cells
};

/// Loads a numeric CSV whose last column is the target. A non-numeric first
/// line is treated as a header. Malformed rows are dropped and counted.
/// Throws if no usable rows remain or (classification) targets are not 0/1.
CsvLoadResult load_csv(const std::string& path, Task task);

struct FeatureStats {
  double mean = 0.0;
  double stddev = 1.0;  // population; 1.0 for constant columns
  bool constant = false;
};

struct NormalizeResult {
  Dataset data;
  std::vector<FeatureStats> stats;
};

/// Centers and scales each feature column to mean 0, population stddev 1,
/// over all rows. Constant columns are centered only and flagged. Targets
/// pass through untouched. Requires n >= 2.
NormalizeResult normalize(const Dataset& input);

/// Index structure of an active-learning run over one dataset.
struct LabeledPool {
  std::vector<int> labeled;  // acquisition order; the first n0 are the seed draw
  std::vector<int> pool;     // ascending row ids
  std::vector<int> test;     // ascending row ids
  std::uint64_t seed = 0;
};

/// Seeded disjoint split: test_size rows for evaluation, n0 for the initial
/// labeled set, the rest form the pool. Requires 1 <= n0 and
/// n0 + test_size <= n; an empty pool is valid.
LabeledPool split(const Dataset& data, int n0, int test_size, std::uint64_t seed);

}  // namespace stopal
