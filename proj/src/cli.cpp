#include "stopal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "stopal/evaluation.hpp"
#include "stopal/stability.hpp"

namespace stopal {
namespace {

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t pos = 0;
    double value;
    try {
      value = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw CliError("invalid threshold '" + item + "'");
    }
    if (pos != item.size() || !std::isfinite(value) || value <= 0.0 || value > 1.0) {
      throw CliError("threshold '" + item + "' must lie in (0, 1]");
    }
    values.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.empty()) {
    throw CliError("no thresholds given");
  }
  std::sort(values.begin(), values.end(), std::greater<double>());
  return values;
}

std::vector<double> default_thresholds(LearnerProfile profile) {
  switch (profile) {
    case LearnerProfile::kBrr:
      return {0.02, 0.015, 0.01};
    case LearnerProfile::kBlr:
      return {0.3, 0.2, 0.1};
    case LearnerProfile::kGpr:
      return {0.05, 0.04, 0.03};
  }
  return {};
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

int run_command(const CliCommand& command) {
  switch (command.action) {
    case CliAction::kRun: {
      const ExperimentSummary summary = run_experiment(command.config);
      std::cout << "trace=" << summary.trace_path << "\n"
                << "stop_summary=" << summary.stop_summary_path << "\n"
                << "correlation=" << summary.correlation_path << "\n";
      if (summary.stop_step) {
        std::cout << "stopped_at_step=" << *summary.stop_step << "\n";
      } else {
        std::cout << "stopped_at_step=none\n";
      }
      return 0;
    }
    case CliAction::kEval: {
      if (!std::filesystem::exists(command.trace_path)) {
        throw ConfigError("eval: trace file not found: " + command.trace_path);
      }
      const std::vector<TraceRecord> trace = read_trace_csv(command.trace_path);
      std::cout << correlation_report(trace);
      return 0;
    }
    case CliAction::kRadius: {
      const double r = error_bound_width(KlPair{command.kl_forward, command.kl_backward});
      std::cout << "r_t=" << format_double(r) << "\n";
      if (command.gamma) {
        if (!std::isfinite(*command.gamma) || *command.gamma <= 0.0) {
          throw CliError("radius: --gamma must be positive");
        }
        std::cout << "lambda_t=" << format_double(r / *command.gamma) << "\n";
      }
      return 0;
    }
  }
  return 1;
}

}  // namespace

CliCommand cli_parse(const std::vector<std::string>& args) {
  CLI::App app{"Error-stability stopping for Bayesian active learning"};
  app.require_subcommand(1);

  CliCommand command;
  std::string task_text = "regression";
  std::string model_text = "gpr";
  std::string thresholds_text;

  CLI::App* run = app.add_subcommand("run", "Run one pool-based active-learning experiment");
  run->add_option("--data", command.config.dataset_path, "Dataset CSV; last column is the target")
      ->required();
  run->add_option("--task", task_text, "regression or classification (default regression)")
      ->check(CLI::IsMember({"regression", "classification"}));
  run->add_option("--model", model_text, "brr, blr or gpr (default gpr)")
      ->check(CLI::IsMember({"brr", "blr", "gpr"}));
  run->add_option("--thresholds", thresholds_text,
                  "Comma-separated stop thresholds in (0, 1]; default depends on the model");
  run->add_option("--m", command.config.warmup, "Warmup steps defining the normalizer (default 10)")
      ->check(CLI::PositiveNumber);
  run->add_option("--min-steps", command.config.min_steps,
                  "Earliest step allowed to stop (default 10)")
      ->check(CLI::PositiveNumber);
  run->add_option("--n0", command.config.n0, "Initial labeled set size (default 10)")
      ->check(CLI::PositiveNumber);
  run->add_option("--test-size", command.config.test_size,
                  "Held-out test rows (default: 20% of usable rows)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--budget", command.config.budget, "Maximum acquisitions (default 500)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--seed", command.config.seed, "Split seed (default 0)");
  run->add_option("--out", command.config.output_dir,
                  "Output directory (default stopal_out)");

  CLI::App* eval = app.add_subcommand("eval", "Recompute the correlation report from a trace CSV");
  eval->add_option("--trace", command.trace_path, "Trace CSV produced by run")->required();

  CLI::App* radius = app.add_subcommand(
      "radius", "Print the stability width r_t for one KL pair (and lambda_t given --gamma)");
  radius->add_option("--kl-forward", command.kl_forward, "KL[p_t || p_{t-1}]")->required();
  radius->add_option("--kl-backward", command.kl_backward, "KL[p_{t-1} || p_t]")->required();
  double gamma_value = 0.0;
  CLI::Option* gamma_opt =
      radius->add_option("--gamma", gamma_value, "Normalizer gamma-tilde for lambda_t");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw CliHelp{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw CliHelp{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw CliError(std::string(e.what()) + "\n\n" + app.help());
  }

  if (run->parsed()) {
    command.action = CliAction::kRun;
    command.config.task = task_text == "classification" ? Task::kClassification
                                                        : Task::kRegression;
    command.config.profile = model_text == "brr"   ? LearnerProfile::kBrr
                             : model_text == "blr" ? LearnerProfile::kBlr
                                                   : LearnerProfile::kGpr;
    command.config.thresholds = thresholds_text.empty()
                                    ? default_thresholds(command.config.profile)
                                    : parse_thresholds(thresholds_text);
  } else if (eval->parsed()) {
    command.action = CliAction::kEval;
  } else {
    command.action = CliAction::kRadius;
    if (gamma_opt->count() > 0) command.gamma = gamma_value;
  }
  return command;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    const CliCommand command = cli_parse(args);
    return run_command(command);
  } catch (const CliHelp& help) {
    std::cout << help.text;
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

}  // namespace stopal
