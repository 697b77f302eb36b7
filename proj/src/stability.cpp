#include "stopal/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stopal {
namespace {

constexpr double kInvE = 0.36787944117144232159552377016146087;
constexpr double kBranchClamp = 1e-12;

double halley_refine(double w, double x) {
  double best_w = w;
  double best_resid = std::abs(w * std::exp(w) - x);
  const double target = 1e-13 * std::max(1.0, std::abs(x));
  for (int i = 0; i < 12 && best_resid > target; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0));
    if (denom == 0.0 || !std::isfinite(denom)) break;
    const double next = w - f / denom;
    if (!std::isfinite(next)) break;
    w = next;
    const double resid = std::abs(w * std::exp(w) - x);
    if (resid < best_resid) {
      best_resid = resid;
      best_w = w;
    }
  }
  return best_w;
}

double validated_kl(double kl, const char* what) {
  if (!std::isfinite(kl)) {
    throw std::invalid_argument(std::string(what) + ": KL must be finite");
  }
  if (kl < 0.0) {
    if (kl < -1e-10) {
      throw std::invalid_argument(std::string(what) + ": KL is negative beyond roundoff: " +
                                  std::to_string(kl));
    }
    return 0.0;
  }
  return kl;
}

}  // namespace

double lambert_w0(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("lambert_w0: input must be finite");
  }
  if (x < -kInvE) {
    if (x < -kInvE - kBranchClamp) {
      throw std::domain_error("lambert_w0: input below -1/e: " + std::to_string(x));
    }
    return -1.0;
  }
  if (x == 0.0) return 0.0;

  double w;
  if (x < -0.25) {
    // Branch-point series in q = sqrt(2 (e x + 1)); the argument can round
    // fractionally negative at x = -1/e.
    const double q = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * x + 1.0)));
    w = -1.0 + q * (1.0 - q * (1.0 / 3.0) + q * q * (11.0 / 72.0));
    if (q < 1e-3) return w;
  } else if (x < std::numbers::e) {
    w = std::log1p(x) * 0.5 + x / (2.0 * (1.0 + x));
  } else {
    const double lx = std::log(x);
    w = lx - std::log(lx);
  }
  w = std::max(w, -1.0 + 1e-14);
  return halley_refine(w, x);
}

double stability_radius(double kl) {
  kl = validated_kl(kl, "stability_radius");
  if (kl == 0.0) return 0.0;
  const double u = (kl - 1.0) / std::numbers::e;
  const double r = std::exp(lambert_w0(u) + 1.0) - 1.0;
  return r < 0.0 ? 0.0 : r;
}

double stability_radius_general(double kl, double v, double range) {
  kl = validated_kl(kl, "stability_radius_general");
  if (!std::isfinite(v) || v <= 0.0) {
    throw std::invalid_argument("stability_radius_general: v must be positive");
  }
  if (!std::isfinite(range) || range <= 0.0) {
    throw std::invalid_argument("stability_radius_general: range must be positive");
  }
  if (kl == 0.0) return 0.0;
  const double u = (range * range * kl - v) / (v * std::numbers::e);
  const double r = (v / range) * (std::exp(lambert_w0(u) + 1.0) - 1.0);
  return r < 0.0 ? 0.0 : r;
}

double error_bound_width(const KlPair& kl) {
  return stability_radius(kl.forward) + stability_radius(kl.backward);
}

double theorem2_threshold(const MartingaleParams& params) {
  if (!std::isfinite(params.eta) || params.eta <= 0.0 || params.eta >= 1.0) {
    throw std::invalid_argument("theorem2_threshold: eta must lie in (0, 1)");
  }
  if (!std::isfinite(params.delta) || params.delta <= 0.0 || params.delta >= 1.0) {
    throw std::invalid_argument("theorem2_threshold: delta must lie in (0, 1)");
  }
  return std::sqrt(-2.0 / std::log(params.delta / 2.0)) * params.eta;
}

StoppingState::StoppingState(StoppingConfig config) : config_(config) {
  if (!std::isfinite(config_.threshold) || config_.threshold < 0.0 || config_.threshold > 1.0) {
    throw std::invalid_argument("StoppingState: threshold must lie in [0, 1]");
  }
  if (config_.warmup < 1) {
    throw std::invalid_argument("StoppingState: warmup must be at least 1");
  }
  if (config_.min_steps < 1) {
    throw std::invalid_argument("StoppingState: min_steps must be at least 1");
  }
}

StepOutcome step_stopping(StoppingState state, const KlPair& kl) {
  if (state.stopped_) {
    throw std::logic_error("step_stopping: state has already stopped");
  }
  const double r = error_bound_width(kl);
  state.radius_history_.push_back(r);
  const int t = state.step_count();
  const int m = state.config_.warmup;

  if (t == m) {
    double gamma = state.radius_history_[0];
    for (int i = 1; i < m; ++i) gamma = std::min(gamma, state.radius_history_[i]);
    if (gamma <= 0.0) {
      throw std::runtime_error(
          "step_stopping: warmup produced a zero normalizer (posteriors did not move)");
    }
    state.gamma_tilde_ = gamma;
    state.lambda_history_.reserve(m);
    for (int i = 0; i < m; ++i) {
      state.lambda_history_.push_back(state.radius_history_[i] / gamma);
    }
  } else if (t > m) {
    state.lambda_history_.push_back(r / *state.gamma_tilde_);
  }

  StopDecision decision = StopDecision::kContinue;
  std::optional<double> lambda_t;
  if (state.gamma_tilde_) {
    lambda_t = state.lambda_history_.back();
    if (t >= std::max(m, state.config_.min_steps) && *lambda_t <= state.config_.threshold) {
      state.stopped_ = true;
      decision = StopDecision::kStop;
    }
  }
  return StepOutcome{std::move(state), decision, lambda_t, r};
}

}  // namespace stopal
