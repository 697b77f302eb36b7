#pragma once

#include <optional>
#include <vector>

namespace stopal {

/// Principal branch W0 of the Lambert W function, w * exp(w) = x.
/// Domain x >= -1/e; inputs within 1e-12 below -1/e are clamped to the
/// branch point (result -1). Residual |w*e^w - x| <= 1e-12 * max(1, |x|).
double lambert_w0(double x);

/// Stability radius r(KL) = exp(W0((KL - 1)/e) + 1) - 1 for losses in [0, 1].
/// KL values in [-1e-10, 0) are treated as roundoff and clamped to 0.
double stability_radius(double kl);

/// Radius for losses in an interval of width `range` with second-moment
/// bound v: (v/range) * (exp(W0(u) + 1) - 1), u = (range^2 * KL - v)/(v e).
/// With v = range^2 this reduces to range * stability_radius(kl).
double stability_radius_general(double kl, double v, double range);

/// Forward/backward KL divergences between consecutive posteriors.
struct KlPair {
  double forward = 0.0;   // KL[p_t || p_{t-1}]
  double backward = 0.0;  // KL[p_{t-1} || p_t]
};

/// Width r_t of the expected-error interval: radius(forward) + radius(backward).
double error_bound_width(const KlPair& kl);

struct MartingaleParams {
  double eta = 0.0;    // tolerated error-change scale, in (0, 1)
  double delta = 0.0;  // failure probability, in (0, 1)
};

/// Threshold lambda = sqrt(-2 / log(delta / 2)) * eta.
double theorem2_threshold(const MartingaleParams& params);

enum class StopDecision { kContinue, kStop };

struct StoppingConfig {
  double threshold = 0.05;  // lambda in [0, 1]
  int warmup = 10;          // m: steps whose minimum r_t defines the normalizer
  int min_steps = 10;       // no stop before this step
};

class StoppingState;
struct StepOutcome;
StepOutcome step_stopping(StoppingState state, const KlPair& kl);

/**
 * State of the error-stability stopping rule.
 *
 * Feed one KlPair per acquisition through step_stopping. The normalizer
 * gamma_tilde = min of the first `warmup` widths r_t; from then on each
 * step's error ratio lambda_t = r_t / gamma_tilde is compared against the
 * threshold. The ratios for steps 1..warmup are backfilled once the
 * normalizer exists, so min over the first warmup ratios is exactly 1.
 */
class StoppingState {
 public:
  explicit StoppingState(StoppingConfig config);

  const StoppingConfig& config() const { return config_; }
  int step_count() const { return static_cast<int>(radius_history_.size()); }
  bool stopped() const { return stopped_; }
  std::optional<double> gamma_tilde() const { return gamma_tilde_; }
  const std::vector<double>& radius_history() const { return radius_history_; }
  /// Error ratios, parallel to radius_history; empty until the warmup
  /// completes, complete afterwards.
  const std::vector<double>& lambda_history() const { return lambda_history_; }

 private:
  StoppingConfig config_;
  std::vector<double> radius_history_;
  std::vector<double> lambda_history_;
  std::optional<double> gamma_tilde_;
  bool stopped_ = false;

  friend struct StepOutcome;
  friend StepOutcome step_stopping(StoppingState state, const KlPair& kl);
};

struct StepOutcome {
  StoppingState state;
  StopDecision decision = StopDecision::kContinue;
  std::optional<double> lambda_t;  // unset while the normalizer is undefined
  double radius = 0.0;             // r_t for this step
};

/// Advance the stopping rule by one acquisition. Throws if the state has
/// already stopped, or if the warmup produces gamma_tilde = 0.
StepOutcome step_stopping(StoppingState state, const KlPair& kl);

}  // namespace stopal
