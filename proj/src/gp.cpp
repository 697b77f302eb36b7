#include "stopal/gp.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace stopal {
namespace {

void check_hyper(const GpHyper& hyper, const char* what) {
  if (!std::isfinite(hyper.lengthscale) || hyper.lengthscale <= 0.0) {
    throw std::invalid_argument(std::string(what) + ": lengthscale must be positive");
  }
  if (!std::isfinite(hyper.noise_precision) || hyper.noise_precision <= 0.0) {
    throw std::invalid_argument(std::string(what) + ": noise precision must be positive");
  }
}

double clamp_nonneg(double v) { return v < 0.0 ? 0.0 : v; }

}  // namespace

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b, double lengthscale) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  }
  return std::exp(-(a - b).squaredNorm() / (2.0 * lengthscale * lengthscale));
}

Eigen::MatrixXd gaussian_kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                       const Eigen::Ref<const Eigen::MatrixXd>& b,
                                       double lengthscale) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("gaussian_kernel_matrix: dimension mismatch");
  }
  const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd sq = a2.replicate(1, b.rows()) + b2.transpose().replicate(a.rows(), 1);
  sq.noalias() -= 2.0 * a * b.transpose();
  return (-sq.cwiseMax(0.0) / (2.0 * lengthscale * lengthscale)).array().exp();
}

GpState::GpState(GpHyper hyper, int input_dim)
    : hyper_(hyper), input_dim_(input_dim), inputs_(0, input_dim), targets_(0), chol_(0, 0),
      weights_(0) {
  check_hyper(hyper_, "GpState");
  if (input_dim < 1) {
    throw std::invalid_argument("GpState: input dimension must be positive");
  }
}

GpState::GpState(GpHyper hyper, Eigen::MatrixXd inputs, Eigen::VectorXd targets)
    : hyper_(hyper), input_dim_(static_cast<int>(inputs.cols())), inputs_(std::move(inputs)),
      targets_(std::move(targets)) {
  check_hyper(hyper_, "GpState");
  if (input_dim_ < 1) {
    throw std::invalid_argument("GpState: input dimension must be positive");
  }
  if (inputs_.rows() != targets_.size()) {
    throw std::invalid_argument("GpState: inputs/targets length mismatch");
  }
  if (!inputs_.allFinite() || !targets_.allFinite()) {
    throw std::invalid_argument("GpState: non-finite data");
  }
  factorize();
}

void GpState::factorize() {
  const Eigen::Index n = targets_.size();
  if (n == 0) {
    chol_.resize(0, 0);
    weights_.resize(0);
    return;
  }
  Eigen::MatrixXd a = gaussian_kernel_matrix(inputs_, inputs_, hyper_.lengthscale);
  a.diagonal().array() += 1.0 / hyper_.noise_precision;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    std::cerr << "gp: kernel factorization failed, retrying with 1e-10 jitter\n";
    a.diagonal().array() += 1e-10;
    llt.compute(a);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("gp: kernel matrix is not positive definite");
    }
  }
  chol_ = llt.matrixL();
  weights_ = llt.solve(targets_);
}

GpPrediction gp_posterior(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != state.input_dim()) {
    throw std::invalid_argument("gp_posterior: input dimension mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("gp_posterior: non-finite input");
  }
  const double prior_var = 1.0;  // k(x, x)
  if (state.size() == 0) {
    return GpPrediction{0.0, prior_var};
  }
  const Eigen::VectorXd k =
      gaussian_kernel_matrix(state.train_inputs(), x.transpose(), state.hyper().lengthscale);
  const double mean = k.dot(state.weights());
  const Eigen::VectorXd v = state.chol().triangularView<Eigen::Lower>().solve(k);
  const double variance = clamp_nonneg(prior_var - v.squaredNorm());
  return GpPrediction{mean, variance};
}

double gp_kl_forward_from_moments(double sigma, double mu, double beta, double y) {
  if (!std::isfinite(sigma) || sigma < 0.0 || !std::isfinite(beta) || beta <= 0.0 ||
      !std::isfinite(mu) || !std::isfinite(y)) {
    throw std::invalid_argument("gp_kl_forward_from_moments: invalid arguments");
  }
  if (sigma == 0.0) return 0.0;
  const double noise_var = 1.0 / beta;
  const double denom = sigma + noise_var;
  const double resid = y - mu;
  const double kl = 0.5 * std::log1p(beta * sigma) - 0.5 * sigma / denom +
                    0.5 * sigma * resid * resid / (denom * denom);
  return clamp_nonneg(kl);
}

double gp_kl_backward_from_moments(double sigma, double mu, double beta, double y) {
  if (!std::isfinite(sigma) || sigma < 0.0 || !std::isfinite(beta) || beta <= 0.0 ||
      !std::isfinite(mu) || !std::isfinite(y)) {
    throw std::invalid_argument("gp_kl_backward_from_moments: invalid arguments");
  }
  if (sigma == 0.0) return 0.0;
  const double noise_var = 1.0 / beta;
  const double denom = sigma + noise_var;
  const double resid = y - mu;
  const double kl = 0.5 * beta * sigma - 0.5 * std::log1p(beta * sigma) +
                    0.5 * (beta * sigma / denom) * resid * resid;
  return clamp_nonneg(kl);
}

double gp_incremental_kl_forward(const GpState& state,
                                 const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
  const GpPrediction pred = gp_posterior(state, x);
  return gp_kl_forward_from_moments(pred.variance, pred.mean, state.hyper().noise_precision, y);
}

double gp_incremental_kl_backward(const GpState& state,
                                  const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
  const GpPrediction pred = gp_posterior(state, x);
  return gp_kl_backward_from_moments(pred.variance, pred.mean, state.hyper().noise_precision, y);
}

double gp_log_marginal(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                       const GpHyper& hyper) {
  check_hyper(hyper, "gp_log_marginal");
  if (inputs.rows() != targets.size() || inputs.rows() == 0) {
    throw std::invalid_argument("gp_log_marginal: bad data shapes");
  }
  const Eigen::Index n = targets.size();
  Eigen::MatrixXd a = gaussian_kernel_matrix(inputs, inputs, hyper.lengthscale);
  a.diagonal().array() += 1.0 / hyper.noise_precision;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("gp_log_marginal: factorization failed");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double quad = targets.dot(llt.solve(targets));
  return -0.5 * quad - 0.5 * log_det -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

std::vector<GpHyper> default_gp_grid(int input_dim) {
  if (input_dim < 1) {
    throw std::invalid_argument("default_gp_grid: input dimension must be positive");
  }
  const double base = std::sqrt(static_cast<double>(input_dim));
  std::vector<GpHyper> grid;
  for (double mult : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0}) {
    for (double beta : {0.1, 1.0, 10.0, 100.0}) {
      grid.push_back(GpHyper{mult * base, beta});
    }
  }
  return grid;
}

GpHyper gp_fit_hyper(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                     const std::vector<GpHyper>& grid) {
  if (grid.empty()) {
    throw std::invalid_argument("gp_fit_hyper: empty candidate grid");
  }
  bool found = false;
  GpHyper best;
  double best_lml = 0.0;
  for (const GpHyper& candidate : grid) {
    double lml;
    try {
      lml = gp_log_marginal(inputs, targets, candidate);
    } catch (const std::runtime_error&) {
      continue;
    }
    if (!std::isfinite(lml)) continue;
    if (!found || lml > best_lml) {
      found = true;
      best = candidate;
      best_lml = lml;
    }
  }
  if (!found) {
    throw std::runtime_error("gp_fit_hyper: every candidate failed to factorize");
  }
  return best;
}

Eigen::Index gp_acquisition(const GpState& state, const Eigen::MatrixXd& candidates) {
  if (candidates.rows() == 0) {
    throw std::invalid_argument("gp_acquisition: empty candidate set");
  }
  if (candidates.cols() != state.input_dim()) {
    throw std::invalid_argument("gp_acquisition: input dimension mismatch");
  }
  if (state.size() == 0) {
    return 0;  // prior variance is uniform
  }
  const Eigen::MatrixXd k =
      gaussian_kernel_matrix(state.train_inputs(), candidates, state.hyper().lengthscale);
  const Eigen::MatrixXd v = state.chol().triangularView<Eigen::Lower>().solve(k);
  Eigen::Index best = 0;
  double best_var = -1.0;
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    const double var = clamp_nonneg(1.0 - v.col(i).squaredNorm());
    if (var > best_var) {
      best_var = var;
      best = i;
    }
  }
  return best;
}

GpState gp_extend(const GpState& state, const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
  if (x.size() != state.input_dim()) {
    throw std::invalid_argument("gp_extend: input dimension mismatch");
  }
  if (!x.allFinite() || !std::isfinite(y)) {
    throw std::invalid_argument("gp_extend: non-finite observation");
  }
  const int n = state.size();
  GpState next(state.hyper(), state.input_dim());
  next.inputs_.resize(n + 1, state.input_dim());
  next.inputs_.topRows(n) = state.train_inputs();
  next.inputs_.row(n) = x.transpose();
  next.targets_.resize(n + 1);
  next.targets_.head(n) = state.targets();
  next.targets_(n) = y;

  const double d = 1.0 + 1.0 / state.hyper().noise_precision;
  if (n == 0) {
    next.chol_.resize(1, 1);
    next.chol_(0, 0) = std::sqrt(d);
  } else {
    const Eigen::VectorXd k =
        gaussian_kernel_matrix(state.train_inputs(), x.transpose(), state.hyper().lengthscale);
    const Eigen::VectorXd c = state.chol().triangularView<Eigen::Lower>().solve(k);
    const double pivot_sq = d - c.squaredNorm();
    if (!(pivot_sq > 1e-12 * d)) {
      next.factorize();
      return next;
    }
    next.chol_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
    next.chol_.topLeftCorner(n, n) = state.chol();
    next.chol_.row(n).head(n) = c.transpose();
    next.chol_(n, n) = std::sqrt(pivot_sq);
  }
  next.weights_ = next.chol_.triangularView<Eigen::Lower>().solve(next.targets_);
  next.chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(next.weights_);
  return next;
}

double gp_test_error(const GpState& state, const Eigen::MatrixXd& inputs,
                     const Eigen::VectorXd& targets) {
  if (inputs.rows() == 0) {
    throw std::invalid_argument("gp_test_error: empty test set");
  }
  if (inputs.rows() != targets.size()) {
    throw std::invalid_argument("gp_test_error: inputs/targets length mismatch");
  }
  if (inputs.cols() != state.input_dim()) {
    throw std::invalid_argument("gp_test_error: input dimension mismatch");
  }
  if (state.size() == 0) {
    return (targets.array().square() + 1.0).mean();
  }
  const Eigen::MatrixXd k =
      gaussian_kernel_matrix(state.train_inputs(), inputs, state.hyper().lengthscale);
  const Eigen::VectorXd means = k.transpose() * state.weights();
  const Eigen::MatrixXd v = state.chol().triangularView<Eigen::Lower>().solve(k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const double var = clamp_nonneg(1.0 - v.col(i).squaredNorm());
    const double resid = targets(i) - means(i);
    total += resid * resid + var;
  }
  return total / static_cast<double>(inputs.rows());
}

}  // namespace stopal
