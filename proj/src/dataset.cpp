#include "stopal/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stopal/random.hpp"

namespace stopal {
namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream row(line);
  std::string cell;
  while (std::getline(row, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_cell(const std::string& text, double* value) {
  std::size_t pos = 0;
  try {
    *value = std::stod(text, &pos);
  } catch (const std::exception&) {
    return false;
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  return pos == text.size() && std::isfinite(*value);
}

}  // namespace

CsvLoadResult load_csv(const std::string& path, Task task) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open " + path);
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  int dropped = 0;
  std::string line;
  bool first_content_line = true;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_cells(line);

    if (first_content_line) {
      first_content_line = false;
      bool all_numeric = true;
      double ignored;
      for (const std::string& cell : cells) {
        if (!parse_cell(cell, &ignored)) {
          all_numeric = false;
          break;
        }
      }
      if (!all_numeric) {
        if (cells.size() < 2) {
          throw std::runtime_error("load_csv: header must have at least two columns");
        }
        names.assign(cells.begin(), cells.end() - 1);
        width = cells.size();
        continue;
      }
    }

    if (width == 0) width = cells.size();
    bool ok = cells.size() == width && width >= 2;
    std::vector<double> parsed(cells.size());
    if (ok) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!parse_cell(cells[i], &parsed[i])) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(parsed));
  }

  if (rows.empty()) {
    throw std::runtime_error("load_csv: no usable data rows in " + path);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(width) - 1;
  Dataset data;
  data.task = task;
  data.feature_names = std::move(names);
  data.features.resize(n, d);
  data.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = rows[i][j];
    data.targets(i) = rows[i][width - 1];
  }

  if (task == Task::kClassification) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (data.targets(i) != 0.0 && data.targets(i) != 1.0) {
        throw std::runtime_error("load_csv: classification target on data row " +
                                 std::to_string(i) + " is not 0 or 1");
      }
    }
  }
  return CsvLoadResult{std::move(data), dropped};
}

NormalizeResult normalize(const Dataset& input) {
  const Eigen::Index n = input.n();
  if (n < 2) {
    throw std::invalid_argument("normalize: needs at least two rows");
  }
  NormalizeResult out;
  out.data = input;
  out.stats.resize(static_cast<std::size_t>(input.dim()));
  for (Eigen::Index j = 0; j < input.dim(); ++j) {
    const double mean = input.features.col(j).mean();
    const double var = (input.features.col(j).array() - mean).square().sum() /
                       static_cast<double>(n);
    FeatureStats stats;
    stats.mean = mean;
    if (var > 0.0) {
      stats.stddev = std::sqrt(var);
    } else {
      stats.stddev = 1.0;
      stats.constant = true;
    }
    out.data.features.col(j) = (input.features.col(j).array() - mean) / stats.stddev;
    out.stats[static_cast<std::size_t>(j)] = stats;
  }
  return out;
}

LabeledPool split(const Dataset& data, int n0, int test_size, std::uint64_t seed) {
  const int n = static_cast<int>(data.n());
  if (n0 < 1) {
    throw std::invalid_argument("split: n0 must be at least 1");
  }
  if (test_size < 0) {
    throw std::invalid_argument("split: test_size must be nonnegative");
  }
  if (n0 + test_size > n) {
    throw std::invalid_argument("split: n0 + test_size exceeds the dataset size");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  shuffle_values(order, rng);

  LabeledPool result;
  result.seed = seed;
  result.test.assign(order.begin(), order.begin() + test_size);
  result.labeled.assign(order.begin() + test_size, order.begin() + test_size + n0);
  result.pool.assign(order.begin() + test_size + n0, order.end());
  std::sort(result.test.begin(), result.test.end());
  std::sort(result.pool.begin(), result.pool.end());
  return result;
}

}  // namespace stopal
