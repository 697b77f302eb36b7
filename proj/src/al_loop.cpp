#include "stopal/al_loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "stopal/bayes_logistic.hpp"
#include "stopal/bayes_ridge.hpp"
#include "stopal/gaussian.hpp"
#include "stopal/gp.hpp"
#include "stopal/random.hpp"
#include "stopal/rbf_basis.hpp"

namespace stopal {
namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
  }
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& source, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = source(rows[i]);
  }
  return out;
}

/// Learner behind one AL run: posterior updates, acquisition scores,
/// incremental KLs and the profile's test loss.
class ActiveLearner {
 public:
  virtual ~ActiveLearner() = default;
  virtual Eigen::Index acquire(const Eigen::MatrixXd& candidates) const = 0;
  virtual KlPair incorporate(const Eigen::RowVectorXd& x, double y) = 0;
  virtual double evaluate(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) const = 0;
};

class BrrLearner : public ActiveLearner {
 public:
  BrrLearner(RbfBasis basis, const Eigen::MatrixXd& seed_inputs,
             const Eigen::VectorXd& seed_targets)
      : basis_(std::move(basis)), inputs_(seed_inputs), targets_(seed_targets) {
    const BrrHyperFit fit = brr_update_hyper(basis_, BrrHyper{}, inputs_, targets_);
    if (!fit.converged) {
      std::cerr << "warning: ridge hyperparameter fixed point did not converge after "
                << fit.iterations << " iterations\n";
    }
    hyper_ = fit.hyper;
    posterior_ = std::make_unique<GaussianPosterior>(
        brr_posterior(basis_, hyper_, inputs_, targets_));
  }

  Eigen::Index acquire(const Eigen::MatrixXd& candidates) const override {
    return brr_acquisition(*posterior_, basis_, candidates);
  }

  KlPair incorporate(const Eigen::RowVectorXd& x, double y) override {
    inputs_.conservativeResize(inputs_.rows() + 1, Eigen::NoChange);
    inputs_.row(inputs_.rows() - 1) = x;
    targets_.conservativeResize(targets_.size() + 1);
    targets_(targets_.size() - 1) = y;
    auto next = std::make_unique<GaussianPosterior>(
        brr_posterior(basis_, hyper_, inputs_, targets_));
    const KlPair kl{gaussian_kl(*next, *posterior_), gaussian_kl(*posterior_, *next)};
    posterior_ = std::move(next);
    return kl;
  }

  double evaluate(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) const override {
    return brr_test_error(*posterior_, basis_, inputs, targets);
  }

 private:
  RbfBasis basis_;
  BrrHyper hyper_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  std::unique_ptr<GaussianPosterior> posterior_;
};

class BlrLearner : public ActiveLearner {
 public:
  BlrLearner(RbfBasis basis, double alpha, const Eigen::MatrixXd& seed_inputs,
             const Eigen::VectorXd& seed_targets)
      : basis_(std::move(basis)), alpha_(alpha), inputs_(seed_inputs), targets_(seed_targets) {
    posterior_ = std::make_unique<GaussianPosterior>(
        blr_laplace_posterior(basis_, alpha_, inputs_, targets_));
  }

  Eigen::Index acquire(const Eigen::MatrixXd& candidates) const override {
    return entropy_acquisition(*posterior_, basis_, candidates);
  }

  KlPair incorporate(const Eigen::RowVectorXd& x, double y) override {
    inputs_.conservativeResize(inputs_.rows() + 1, Eigen::NoChange);
    inputs_.row(inputs_.rows() - 1) = x;
    targets_.conservativeResize(targets_.size() + 1);
    targets_(targets_.size() - 1) = y;
    auto next = std::make_unique<GaussianPosterior>(
        blr_laplace_posterior(basis_, alpha_, inputs_, targets_));
    const KlPair kl{gaussian_kl(*next, *posterior_), gaussian_kl(*posterior_, *next)};
    posterior_ = std::move(next);
    return kl;
  }

  double evaluate(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) const override {
    return blr_test_error(*posterior_, basis_, inputs, targets);
  }

 private:
  RbfBasis basis_;
  double alpha_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  std::unique_ptr<GaussianPosterior> posterior_;
};

class GprLearner : public ActiveLearner {
 public:
  GprLearner(const Eigen::MatrixXd& seed_inputs, const Eigen::VectorXd& seed_targets)
      : state_(gp_fit_hyper(seed_inputs, seed_targets, default_gp_grid(
                                static_cast<int>(seed_inputs.cols()))),
               seed_inputs, seed_targets) {}

  Eigen::Index acquire(const Eigen::MatrixXd& candidates) const override {
    return gp_acquisition(state_, candidates);
  }

  KlPair incorporate(const Eigen::RowVectorXd& x, double y) override {
    const Eigen::VectorXd xv = x.transpose();
    const KlPair kl{gp_incremental_kl_forward(state_, xv, y),
                    gp_incremental_kl_backward(state_, xv, y)};
    state_ = gp_extend(state_, xv, y);
    return kl;
  }

  double evaluate(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) const override {
    return gp_test_error(state_, inputs, targets);
  }

 private:
  GpState state_;
};

void validate_run(const Dataset& data, const LabeledPool& pool, const AlConfig& config) {
  const int n = static_cast<int>(data.n());
  auto check_rows = [&](const std::vector<int>& rows, const char* name) {
    for (int r : rows) {
      if (r < 0 || r >= n) {
        throw std::invalid_argument(std::string("run: ") + name + " index out of range");
      }
    }
  };
  check_rows(pool.labeled, "labeled");
  check_rows(pool.pool, "pool");
  check_rows(pool.test, "test");
  if (pool.labeled.empty()) {
    throw std::invalid_argument("run: initial labeled set is empty");
  }
  if (pool.test.empty()) {
    throw std::invalid_argument("run: test set is empty");
  }
  if (config.thresholds.empty()) {
    throw std::invalid_argument("run: at least one threshold required");
  }
  for (double threshold : config.thresholds) {
    if (!std::isfinite(threshold) || threshold <= 0.0 || threshold > 1.0) {
      throw std::invalid_argument("run: thresholds must lie in (0, 1]");
    }
  }
  if (config.warmup < 1 || config.min_steps < 1 || config.budget < 0) {
    throw std::invalid_argument("run: warmup/min_steps must be >= 1 and budget >= 0");
  }
  const bool classification = config.profile == LearnerProfile::kBlr;
  if (classification != (data.task == Task::kClassification)) {
    throw std::invalid_argument("run: learner profile does not match the dataset task");
  }
}

std::unique_ptr<ActiveLearner> make_learner(const Dataset& data, const LabeledPool& pool,
                                            const AlConfig& config) {
  const Eigen::MatrixXd seed_inputs = gather_rows(data.features, pool.labeled);
  const Eigen::VectorXd seed_targets = gather(data.targets, pool.labeled);
  switch (config.profile) {
    case LearnerProfile::kGpr:
      return std::make_unique<GprLearner>(seed_inputs, seed_targets);
    case LearnerProfile::kBrr:
    case LearnerProfile::kBlr: {
      // Basis ranges come from every non-test row so pool points stay covered.
      std::vector<int> known = pool.labeled;
      known.insert(known.end(), pool.pool.begin(), pool.pool.end());
      const RbfBasis basis =
          RbfBasis::from_data(gather_rows(data.features, known), config.rbf_centers_per_dim);
      if (config.profile == LearnerProfile::kBrr) {
        return std::make_unique<BrrLearner>(basis, seed_inputs, seed_targets);
      }
      return std::make_unique<BlrLearner>(basis, config.blr_alpha, seed_inputs, seed_targets);
    }
  }
  throw std::logic_error("run: unknown learner profile");
}

template <typename PickIndex>
AlRunResult run_loop(const Dataset& data, const LabeledPool& pool, const AlConfig& config,
                     PickIndex pick) {
  validate_run(data, pool, config);
  std::unique_ptr<ActiveLearner> learner = make_learner(data, pool, config);

  const Eigen::MatrixXd test_inputs = gather_rows(data.features, pool.test);
  const Eigen::VectorXd test_targets = gather(data.targets, pool.test);
  const double min_threshold = *std::min_element(config.thresholds.begin(),
                                                 config.thresholds.end());
  StoppingState stop_state(StoppingConfig{min_threshold, config.warmup, config.min_steps});
  const int gate = std::max(config.warmup, config.min_steps);

  std::vector<int> remaining = pool.pool;
  AlRunResult result;
  for (int t = 1; t <= config.budget && !remaining.empty(); ++t) {
    const Eigen::MatrixXd candidates = gather_rows(data.features, remaining);
    const Eigen::Index choice = pick(*learner, candidates);
    const int row = remaining[static_cast<std::size_t>(choice)];
    remaining.erase(remaining.begin() + choice);

    const KlPair kl = learner->incorporate(data.features.row(row), data.targets(row));
    StepOutcome outcome = step_stopping(std::move(stop_state), kl);
    stop_state = std::move(outcome.state);

    TraceRecord record;
    record.t = t;
    record.acquired_index = row;
    record.kl_forward = kl.forward;
    record.kl_backward = kl.backward;
    record.r_t = outcome.radius;
    record.lambda_t = outcome.lambda_t;
    record.test_error = learner->evaluate(test_inputs, test_targets);
    record.stopped_flags.reserve(config.thresholds.size());
    for (double threshold : config.thresholds) {
      const bool hit = outcome.lambda_t.has_value() && t >= gate && *outcome.lambda_t <= threshold;
      record.stopped_flags.emplace_back(threshold, hit);
    }
    result.trace.push_back(std::move(record));

    if (outcome.decision == StopDecision::kStop) {
      result.stop_step = t;
      break;
    }
  }

  // The ratios for the warmup steps exist only once the normalizer does.
  const std::vector<double>& lambdas = stop_state.lambda_history();
  for (std::size_t i = 0; i < result.trace.size() && i < lambdas.size(); ++i) {
    result.trace[i].lambda_t = lambdas[i];
  }
  return result;
}

}  // namespace

AlRunResult run_active_learning(const Dataset& data, const LabeledPool& pool,
                                const AlConfig& config) {
  return run_loop(data, pool, config,
                  [](const ActiveLearner& learner, const Eigen::MatrixXd& candidates) {
                    return learner.acquire(candidates);
                  });
}

AlRunResult run_random_baseline(const Dataset& data, const LabeledPool& pool,
                                const AlConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return run_loop(data, pool, config,
                  [&rng](const ActiveLearner&, const Eigen::MatrixXd& candidates) {
                    return static_cast<Eigen::Index>(
                        uniform_below(rng, static_cast<std::uint64_t>(candidates.rows())));
                  });
}

namespace {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) {
      throw std::runtime_error("write_trace_csv: cannot open " + tmp);
    }
    out << "t,acquired_index,kl_forward,kl_backward,r_t,lambda_t,test_error\n";
    for (const TraceRecord& record : trace) {
      out << record.t << ',' << record.acquired_index << ',' << format_double(record.kl_forward)
          << ',' << format_double(record.kl_backward) << ',' << format_double(record.r_t) << ','
          << (record.lambda_t ? format_double(*record.lambda_t) : std::string()) << ','
          << format_double(record.test_error) << '\n';
    }
    if (!out.good()) {
      throw std::runtime_error("write_trace_csv: write failed for " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("write_trace_csv: cannot rename into " + path);
  }
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_trace_csv: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_trace_csv: empty file " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,acquired_index,kl_forward,kl_backward,r_t,lambda_t,test_error") {
    throw std::runtime_error("read_trace_csv: unexpected header in " + path);
  }
  std::vector<TraceRecord> trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != 7) {
      throw std::runtime_error("read_trace_csv: malformed line " + std::to_string(line_no) +
                               " in " + path);
    }
    auto parse = [&](const std::string& text) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(text, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("read_trace_csv: bad number on line " + std::to_string(line_no));
      }
      if (pos != text.size()) {
        throw std::runtime_error("read_trace_csv: bad number on line " + std::to_string(line_no));
      }
      return v;
    };
    TraceRecord record;
    record.t = static_cast<int>(parse(cells[0]));
    record.acquired_index = static_cast<int>(parse(cells[1]));
    record.kl_forward = parse(cells[2]);
    record.kl_backward = parse(cells[3]);
    record.r_t = parse(cells[4]);
    if (!cells[5].empty()) record.lambda_t = parse(cells[5]);
    record.test_error = parse(cells[6]);
    trace.push_back(std::move(record));
  }
  return trace;
}

}  // namespace stopal
