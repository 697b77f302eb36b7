#pragma once

#include <Eigen/Dense>
#include <vector>

namespace stopal {

struct GpHyper {
  double lengthscale = 1.0;      // l in the squared-exponential kernel
  double noise_precision = 1.0;  // beta
};

/// k(x, x') = exp(-|x - x'|^2 / (2 l^2)); unit signal variance.
double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b, double lengthscale);

/// Kernel matrix between row sets A (n x D) and B (m x D).
Eigen::MatrixXd gaussian_kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                       const Eigen::Ref<const Eigen::MatrixXd>& b,
                                       double lengthscale);

/**
 * GP regression state: training set plus the lower Cholesky factor of
 * K + beta^{-1} I and the weight vector (K + beta^{-1} I)^{-1} y.
 *
 * A failed factorization retries once with 1e-10 jitter on the diagonal
 * (warning on stderr) and throws if that also fails.
 */
class GpState {
 public:
  GpState(GpHyper hyper, int input_dim);  // empty training set
  GpState(GpHyper hyper, Eigen::MatrixXd inputs, Eigen::VectorXd targets);

  int size() const { return static_cast<int>(targets_.size()); }
  int input_dim() const { return input_dim_; }
  const GpHyper& hyper() const { return hyper_; }
  const Eigen::MatrixXd& train_inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  /// Lower Cholesky factor of K + beta^{-1} I (0 x 0 when empty).
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  GpHyper hyper_;
  int input_dim_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd weights_;

  void factorize();
  friend GpState gp_extend(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x,
                           double y);
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;  // latent-function variance, no noise term
};

/// Posterior of the latent function at x; the empty state gives the prior
/// (0, k(x, x)). Variance is clamped to be nonnegative.
GpPrediction gp_posterior(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x);

/// KL[q_t || q_{t-1}] after observing (x, y), from the pre-acquisition
/// moments sigma = Var_{t-1}[f(x)], mu = E_{t-1}[f(x)]:
/// 0.5 log(1 + beta sigma) - 0.5 sigma/(sigma + 1/beta)
///   + 0.5 sigma (y - mu)^2 / (sigma + 1/beta)^2.
double gp_kl_forward_from_moments(double sigma, double mu, double beta, double y);

/// KL[q_{t-1} || q_t] from the same moments:
/// 0.5 beta sigma - 0.5 log(1 + beta sigma)
///   + 0.5 (beta sigma / (sigma + 1/beta)) (y - mu)^2.
double gp_kl_backward_from_moments(double sigma, double mu, double beta, double y);

/// Incremental posterior KLs for acquiring (x, y) on top of `state`.
double gp_incremental_kl_forward(const GpState& state,
                                 const Eigen::Ref<const Eigen::VectorXd>& x, double y);
double gp_incremental_kl_backward(const GpState& state,
                                  const Eigen::Ref<const Eigen::VectorXd>& x, double y);

/// Exact log marginal likelihood of (inputs, targets) under hyper.
double gp_log_marginal(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                       const GpHyper& hyper);

/// Candidate grid: lengthscale in {0.1, 0.2, 0.5, 1, 2, 5} * sqrt(D),
/// noise precision in {0.1, 1, 10, 100}, lengthscale-major order.
std::vector<GpHyper> default_gp_grid(int input_dim);

/// Grid search maximizing the exact log marginal likelihood; ties keep the
/// earliest candidate. Candidates whose factorization fails are skipped;
/// throws if every candidate fails.
GpHyper gp_fit_hyper(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                     const std::vector<GpHyper>& grid);

/// Index of the candidate row with the largest posterior variance; ties go
/// to the lowest index.
Eigen::Index gp_acquisition(const GpState& state, const Eigen::MatrixXd& candidates);

/// State extended by one observation via a rank-one Cholesky append;
/// rebuilds from scratch if the appended pivot is not positive.
GpState gp_extend(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x, double y);

/// Mean posterior-predictive squared error over a test set:
/// mean_i[(y_i - mu(x_i))^2 + var(x_i)].
double gp_test_error(const GpState& state, const Eigen::MatrixXd& inputs,
                     const Eigen::VectorXd& targets);

}  // namespace stopal
