#include "stopal/al_loop.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stopal/bayes_ridge.hpp"
#include "stopal/dataset.hpp"
#include "stopal/gaussian.hpp"
#include "stopal/gp.hpp"
#include "stopal/random.hpp"
#include "stopal/stability.hpp"
#include "support/synthetic.hpp"

using namespace stopal;

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& source, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
  }
  return out;
}

Eigen::VectorXd entries_of(const Eigen::VectorXd& source, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = source(rows[i]);
  }
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::filesystem::path temp_text(const std::string& name, const std::string& body) {
  const std::filesystem::path path = temp_file(name);
  std::ofstream out(path);
  out << body;
  return path;
}

Dataset line_dataset(int n) {
  Dataset data;
  data.features.resize(n, 1);
  data.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    data.features(i, 0) = 0.3 * i;
    data.targets(i) = std::sin(0.3 * i);
  }
  return data;
}

AlConfig never_stop_config(int warmup, int min_steps, int budget) {
  AlConfig config;
  config.profile = LearnerProfile::kGpr;
  config.thresholds = {1e-9};
  config.warmup = warmup;
  config.min_steps = min_steps;
  config.budget = budget;
  return config;
}

}  // namespace

TEST_CASE("trace of a process-regression run replays step by step") {
  const Dataset data = normalize(synth::make_noisy_sine(34, 901)).data;
  const LabeledPool pool = split(data, 4, 8, 7);
  const AlConfig config = never_stop_config(3, 3, 20);

  const AlRunResult result = run_active_learning(data, pool, config);
  REQUIRE(result.trace.size() == 20);
  CHECK(!result.stop_step.has_value());

  const Eigen::MatrixXd seed_inputs = rows_of(data.features, pool.labeled);
  const Eigen::VectorXd seed_targets = entries_of(data.targets, pool.labeled);
  const Eigen::MatrixXd test_inputs = rows_of(data.features, pool.test);
  const Eigen::VectorXd test_targets = entries_of(data.targets, pool.test);

  GpState state(gp_fit_hyper(seed_inputs, seed_targets, default_gp_grid(1)), seed_inputs,
                seed_targets);
  std::vector<int> remaining = pool.pool;
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const TraceRecord& record = result.trace[i];
    CHECK(record.t == static_cast<int>(i) + 1);

    const Eigen::MatrixXd candidates = rows_of(data.features, remaining);
    const Eigen::Index choice = gp_acquisition(state, candidates);
    REQUIRE(record.acquired_index == remaining[static_cast<std::size_t>(choice)]);
    remaining.erase(remaining.begin() + choice);

    const Eigen::VectorXd x = data.features.row(record.acquired_index).transpose();
    const double y = data.targets(record.acquired_index);
    CHECK(record.kl_forward == gp_incremental_kl_forward(state, x, y));
    CHECK(record.kl_backward == gp_incremental_kl_backward(state, x, y));
    CHECK(record.kl_forward > 0.0);
    CHECK(record.kl_backward > 0.0);
    CHECK(record.r_t == error_bound_width(KlPair{record.kl_forward, record.kl_backward}));

    state = gp_extend(state, x, y);
    CHECK(record.test_error == gp_test_error(state, test_inputs, test_targets));

    REQUIRE(record.stopped_flags.size() == 1);
    CHECK(record.stopped_flags[0].first == 1e-9);
    CHECK(!record.stopped_flags[0].second);
  }

  // After warmup completes, every step carries the ratio r_t over the
  // normalizer, warmup steps included.
  double gamma = result.trace[0].r_t;
  for (int i = 1; i < 3; ++i) gamma = std::min(gamma, result.trace[i].r_t);
  double min_warmup_lambda = 1e300;
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    REQUIRE(result.trace[i].lambda_t.has_value());
    CHECK(*result.trace[i].lambda_t == result.trace[i].r_t / gamma);
    if (i < 3) min_warmup_lambda = std::min(min_warmup_lambda, *result.trace[i].lambda_t);
  }
  CHECK(min_warmup_lambda == 1.0);
}

TEST_CASE("a unit threshold stops at the first permitted step") {
  const Dataset data = normalize(synth::make_noisy_sine(30, 555)).data;
  const LabeledPool pool = split(data, 3, 5, 2);

  AlConfig config;
  config.profile = LearnerProfile::kGpr;
  config.thresholds = {1.0};
  config.warmup = 1;
  config.min_steps = 1;
  config.budget = 10;

  const AlRunResult result = run_active_learning(data, pool, config);
  REQUIRE(result.stop_step.has_value());
  CHECK(*result.stop_step == 1);
  REQUIRE(result.trace.size() == 1);
  REQUIRE(result.trace[0].lambda_t.has_value());
  CHECK(*result.trace[0].lambda_t == 1.0);
  CHECK(result.trace[0].stopped_flags[0].second);
}

TEST_CASE("flags stay down before the step gate even when the ratio is low") {
  const Dataset data = normalize(synth::make_noisy_sine(30, 556)).data;
  const LabeledPool pool = split(data, 3, 5, 3);

  AlConfig config;
  config.profile = LearnerProfile::kGpr;
  config.thresholds = {1.0};
  config.warmup = 1;
  config.min_steps = 6;
  config.budget = 40;

  const AlRunResult result = run_active_learning(data, pool, config);
  REQUIRE(result.trace.size() >= 6);
  REQUIRE(result.trace[0].lambda_t.has_value());
  CHECK(*result.trace[0].lambda_t == 1.0);
  CHECK(!result.trace[0].stopped_flags[0].second);

  for (const TraceRecord& record : result.trace) {
    REQUIRE(record.lambda_t.has_value());
    const bool expected = record.t >= 6 && *record.lambda_t <= 1.0;
    CHECK(record.stopped_flags[0].second == expected);
  }
  REQUIRE(result.stop_step.has_value());
  CHECK(*result.stop_step >= 6);
  CHECK(result.trace.size() == static_cast<std::size_t>(*result.stop_step));
  CHECK(*result.trace.back().lambda_t <= 1.0);
  CHECK(result.trace.back().stopped_flags[0].second);
}

TEST_CASE("warmup steps report no live ratio and stay unflagged") {
  const Dataset data = normalize(synth::make_noisy_sine(30, 557)).data;
  const LabeledPool pool = split(data, 3, 5, 4);

  AlConfig config;
  config.profile = LearnerProfile::kGpr;
  config.thresholds = {1.0};
  config.warmup = 5;
  config.min_steps = 1;
  config.budget = 40;

  const AlRunResult result = run_active_learning(data, pool, config);
  REQUIRE(result.trace.size() >= 5);
  for (int i = 0; i < 4; ++i) {
    CHECK(!result.trace[static_cast<std::size_t>(i)].stopped_flags[0].second);
    // Backfilled once the normalizer exists, so the record still carries it.
    CHECK(result.trace[static_cast<std::size_t>(i)].lambda_t.has_value());
  }
  REQUIRE(result.stop_step.has_value());
  CHECK(*result.stop_step >= 5);
}

TEST_CASE("budget and pool exhaustion bound the trace") {
  const Dataset data = line_dataset(12);
  LabeledPool pool;
  pool.labeled = {0, 1, 2};
  pool.test = {3, 4};
  pool.pool = {5, 6, 7, 8, 9, 10, 11};

  SUBCASE("zero budget yields an empty trace") {
    const AlRunResult result = run_active_learning(data, pool, never_stop_config(1, 1, 0));
    CHECK(result.trace.empty());
    CHECK(!result.stop_step.has_value());
  }

  SUBCASE("an empty pool yields an empty trace") {
    pool.pool.clear();
    const AlRunResult result = run_active_learning(data, pool, never_stop_config(1, 1, 10));
    CHECK(result.trace.empty());
    CHECK(!result.stop_step.has_value());
  }

  SUBCASE("the pool drains before the budget") {
    const AlRunResult result = run_active_learning(data, pool, never_stop_config(2, 2, 20));
    REQUIRE(result.trace.size() == 7);
    CHECK(!result.stop_step.has_value());
    std::set<int> acquired;
    for (const TraceRecord& record : result.trace) acquired.insert(record.acquired_index);
    CHECK(acquired == std::set<int>(pool.pool.begin(), pool.pool.end()));
  }
}

TEST_CASE("random baseline draws are seed deterministic") {
  const Dataset data = normalize(synth::make_noisy_sine(30, 558)).data;
  const LabeledPool pool = split(data, 3, 5, 5);
  const AlConfig config = never_stop_config(3, 3, 10);

  const AlRunResult first = run_random_baseline(data, pool, config, 42);
  const AlRunResult second = run_random_baseline(data, pool, config, 42);
  REQUIRE(first.trace.size() == 10);
  REQUIRE(second.trace.size() == 10);
  for (std::size_t i = 0; i < first.trace.size(); ++i) {
    CHECK(first.trace[i].acquired_index == second.trace[i].acquired_index);
    CHECK(first.trace[i].kl_forward == second.trace[i].kl_forward);
    CHECK(first.trace[i].test_error == second.trace[i].test_error);
  }

  // One uniform draw over the remaining candidates per step.
  std::mt19937_64 rng(42);
  std::vector<int> remaining = pool.pool;
  for (const TraceRecord& record : first.trace) {
    const std::uint64_t choice =
        uniform_below(rng, static_cast<std::uint64_t>(remaining.size()));
    CHECK(record.acquired_index == remaining[static_cast<std::size_t>(choice)]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(choice));
  }

  const AlRunResult other = run_random_baseline(data, pool, config, 43);
  bool differs = false;
  for (std::size_t i = 0; i < other.trace.size(); ++i) {
    differs = differs || other.trace[i].acquired_index != first.trace[i].acquired_index;
  }
  CHECK(differs);
}

TEST_CASE("ridge profile freezes hyperparameters after the seed fit") {
  const Dataset data = normalize(synth::make_noisy_sine(40, 559)).data;
  const LabeledPool pool = split(data, 6, 8, 11);
  AlConfig config = never_stop_config(3, 3, 8);
  config.profile = LearnerProfile::kBrr;

  const AlRunResult result = run_active_learning(data, pool, config);
  REQUIRE(result.trace.size() == 8);

  std::vector<int> known = pool.labeled;
  known.insert(known.end(), pool.pool.begin(), pool.pool.end());
  const RbfBasis basis = RbfBasis::from_data(rows_of(data.features, known), 10);

  Eigen::MatrixXd inputs = rows_of(data.features, pool.labeled);
  Eigen::VectorXd targets = entries_of(data.targets, pool.labeled);
  const BrrHyper hyper = brr_update_hyper(basis, BrrHyper{}, inputs, targets).hyper;
  const Eigen::MatrixXd test_inputs = rows_of(data.features, pool.test);
  const Eigen::VectorXd test_targets = entries_of(data.targets, pool.test);

  GaussianPosterior posterior = brr_posterior(basis, hyper, inputs, targets);
  std::vector<int> remaining = pool.pool;
  for (const TraceRecord& record : result.trace) {
    const Eigen::MatrixXd candidates = rows_of(data.features, remaining);
    const Eigen::Index choice = brr_acquisition(posterior, basis, candidates);
    REQUIRE(record.acquired_index == remaining[static_cast<std::size_t>(choice)]);
    remaining.erase(remaining.begin() + choice);

    inputs.conservativeResize(inputs.rows() + 1, Eigen::NoChange);
    inputs.row(inputs.rows() - 1) = data.features.row(record.acquired_index);
    targets.conservativeResize(targets.size() + 1);
    targets(targets.size() - 1) = data.targets(record.acquired_index);

    const GaussianPosterior next = brr_posterior(basis, hyper, inputs, targets);
    CHECK(record.kl_forward == gaussian_kl(next, posterior));
    CHECK(record.kl_backward == gaussian_kl(posterior, next));
    posterior = next;
    CHECK(record.test_error == brr_test_error(posterior, basis, test_inputs, test_targets));
  }
}

TEST_CASE("logistic profile runs end to end on binary labels") {
  const Dataset data = normalize(synth::make_logistic_1d(40, 77)).data;
  const LabeledPool pool = split(data, 6, 8, 13);
  AlConfig config = never_stop_config(2, 2, 6);
  config.profile = LearnerProfile::kBlr;

  const AlRunResult result = run_active_learning(data, pool, config);
  REQUIRE(result.trace.size() == 6);
  for (const TraceRecord& record : result.trace) {
    CHECK(record.kl_forward >= 0.0);
    CHECK(record.kl_backward >= 0.0);
    CHECK(record.r_t >= 0.0);
    CHECK(std::isfinite(record.test_error));
    CHECK(record.test_error >= 0.0);
  }
}

TEST_CASE("runs reject inconsistent inputs") {
  const Dataset regression = normalize(synth::make_noisy_sine(20, 560)).data;
  const Dataset classification = normalize(synth::make_logistic_1d(20, 561)).data;
  const LabeledPool pool = split(regression, 3, 4, 6);
  const AlConfig good = never_stop_config(2, 2, 5);

  SUBCASE("profile task mismatch") {
    AlConfig config = good;
    config.profile = LearnerProfile::kBlr;
    CHECK_THROWS_AS(run_active_learning(regression, pool, config), std::invalid_argument);
    const LabeledPool cls_pool = split(classification, 3, 4, 6);
    CHECK_THROWS_AS(run_active_learning(classification, cls_pool, good), std::invalid_argument);
  }

  SUBCASE("index bounds") {
    LabeledPool bad = pool;
    bad.labeled.push_back(-1);
    CHECK_THROWS_AS(run_active_learning(regression, bad, good), std::invalid_argument);
    bad = pool;
    bad.pool.push_back(20);
    CHECK_THROWS_AS(run_active_learning(regression, bad, good), std::invalid_argument);
    bad = pool;
    bad.test.push_back(99);
    CHECK_THROWS_AS(run_active_learning(regression, bad, good), std::invalid_argument);
  }

  SUBCASE("empty labeled or test sets") {
    LabeledPool bad = pool;
    bad.labeled.clear();
    CHECK_THROWS_WITH_AS(run_active_learning(regression, bad, good),
                         "run: initial labeled set is empty", std::invalid_argument);
    bad = pool;
    bad.test.clear();
    CHECK_THROWS_WITH_AS(run_active_learning(regression, bad, good), "run: test set is empty",
                         std::invalid_argument);
  }

  SUBCASE("threshold domain") {
    AlConfig config = good;
    config.thresholds = {};
    CHECK_THROWS_AS(run_active_learning(regression, pool, config), std::invalid_argument);
    config.thresholds = {0.0};
    CHECK_THROWS_AS(run_active_learning(regression, pool, config), std::invalid_argument);
    config.thresholds = {1.5};
    CHECK_THROWS_AS(run_active_learning(regression, pool, config), std::invalid_argument);
    config.thresholds = {std::nan("")};
    CHECK_THROWS_AS(run_active_learning(regression, pool, config), std::invalid_argument);
  }

  SUBCASE("step controls") {
    AlConfig config = good;
    config.warmup = 0;
    CHECK_THROWS_AS(run_active_learning(regression, pool, config), std::invalid_argument);
    config = good;
    config.min_steps = 0;
    CHECK_THROWS_AS(run_active_learning(regression, pool, config), std::invalid_argument);
    config = good;
    config.budget = -1;
    CHECK_THROWS_AS(run_active_learning(regression, pool, config), std::invalid_argument);
  }
}

TEST_CASE("trace CSV round trip preserves every field") {
  std::vector<TraceRecord> trace(3);
  trace[0].t = 1;
  trace[0].acquired_index = 7;
  trace[0].kl_forward = 1.0 / 3.0;
  trace[0].kl_backward = 0.1;
  trace[0].r_t = 3.0000000000000004;
  trace[0].lambda_t = std::nullopt;
  trace[0].test_error = 1.2345678901234567e-5;
  trace[0].stopped_flags = {{0.5, false}};
  trace[1].t = 2;
  trace[1].acquired_index = 0;
  trace[1].kl_forward = 1e-17;
  trace[1].kl_backward = 2.5;
  trace[1].r_t = 0.70000000000000007;
  trace[1].lambda_t = 0.7;
  trace[1].test_error = 42.0;
  trace[2].t = 3;
  trace[2].acquired_index = 11;
  trace[2].kl_forward = 0.25;
  trace[2].kl_backward = 0.125;
  trace[2].r_t = 1.5;
  trace[2].lambda_t = 1.0;
  trace[2].test_error = 0.03125;

  const std::filesystem::path path = temp_file("stopal_trace_roundtrip.csv");
  write_trace_csv(path.string(), trace);
  const std::vector<TraceRecord> loaded = read_trace_csv(path.string());
  REQUIRE(loaded.size() == trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(loaded[i].t == trace[i].t);
    CHECK(loaded[i].acquired_index == trace[i].acquired_index);
    CHECK(loaded[i].kl_forward == trace[i].kl_forward);
    CHECK(loaded[i].kl_backward == trace[i].kl_backward);
    CHECK(loaded[i].r_t == trace[i].r_t);
    CHECK(loaded[i].lambda_t.has_value() == trace[i].lambda_t.has_value());
    if (trace[i].lambda_t) CHECK(*loaded[i].lambda_t == *trace[i].lambda_t);
    CHECK(loaded[i].test_error == trace[i].test_error);
    CHECK(loaded[i].stopped_flags.empty());
  }

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,acquired_index,kl_forward,kl_backward,r_t,lambda_t,test_error");
  std::string first_row;
  std::getline(in, first_row);
  CHECK(first_row.find(",,") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("trace CSV reader rejects malformed input") {
  const std::string header = "t,acquired_index,kl_forward,kl_backward,r_t,lambda_t,test_error\n";

  CHECK_THROWS_AS(read_trace_csv("/nonexistent/stopal_trace.csv"), std::runtime_error);

  const auto empty = temp_text("stopal_trace_empty.csv", "");
  CHECK_THROWS_AS(read_trace_csv(empty.string()), std::runtime_error);

  const auto bad_header = temp_text("stopal_trace_badheader.csv", "a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(read_trace_csv(bad_header.string()), std::runtime_error);

  const auto short_row = temp_text("stopal_trace_short.csv", header + "1,2,0.1,0.2,0.3,0.4\n");
  CHECK_THROWS_AS(read_trace_csv(short_row.string()), std::runtime_error);

  const auto bad_cell = temp_text("stopal_trace_badcell.csv", header + "1,2,abc,0.2,0.3,,0.4\n");
  CHECK_THROWS_AS(read_trace_csv(bad_cell.string()), std::runtime_error);

  const auto trailing = temp_text("stopal_trace_trailing.csv", header + "1,2,0.1,0.2,0.3,0.4,\n");
  CHECK_THROWS_AS(read_trace_csv(trailing.string()), std::runtime_error);

  // Carriage returns and blank lines are tolerated.
  const auto crlf = temp_text("stopal_trace_crlf.csv",
                              "t,acquired_index,kl_forward,kl_backward,r_t,lambda_t,test_error\r\n"
                              "1,5,0.5,0.25,1.25,,0.75\r\n\r\n");
  const std::vector<TraceRecord> loaded = read_trace_csv(crlf.string());
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].t == 1);
  CHECK(loaded[0].acquired_index == 5);
  CHECK(loaded[0].kl_forward == 0.5);
  CHECK(loaded[0].kl_backward == 0.25);
  CHECK(loaded[0].r_t == 1.25);
  CHECK(!loaded[0].lambda_t.has_value());
  CHECK(loaded[0].test_error == 0.75);

  for (const auto& path : {empty, bad_header, short_row, bad_cell, trailing, crlf}) {
    std::filesystem::remove(path);
  }
}
