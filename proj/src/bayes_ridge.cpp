#include "stopal/bayes_ridge.hpp"

#include <cmath>
#include <stdexcept>

namespace stopal {
namespace {

constexpr double kHyperLo = 1e-8;
constexpr double kHyperHi = 1e8;

void check_data(const RbfBasis& basis, const Eigen::MatrixXd& inputs,
                const Eigen::VectorXd& targets, const char* what) {
  if (inputs.rows() != targets.size()) {
    throw std::invalid_argument(std::string(what) + ": inputs/targets length mismatch");
  }
  if (inputs.rows() > 0 && inputs.cols() != basis.dims()) {
    throw std::invalid_argument(std::string(what) + ": input dimension mismatch");
  }
  if (!inputs.allFinite() || !targets.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite data");
  }
}

void check_hyper(const BrrHyper& hyper, const char* what) {
  if (!std::isfinite(hyper.alpha) || hyper.alpha <= 0.0 || !std::isfinite(hyper.beta) ||
      hyper.beta <= 0.0) {
    throw std::invalid_argument(std::string(what) + ": alpha and beta must be positive");
  }
}

double clamp_hyper(double v) {
  if (!std::isfinite(v) || v > kHyperHi) return kHyperHi;
  if (v < kHyperLo) return kHyperLo;
  return v;
}

}  // namespace

GaussianPosterior brr_posterior(const RbfBasis& basis, const BrrHyper& hyper,
                                const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
  check_hyper(hyper, "brr_posterior");
  check_data(basis, inputs, targets, "brr_posterior");
  const int j = basis.size();
  Eigen::MatrixXd precision = hyper.alpha * Eigen::MatrixXd::Identity(j, j);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(j);
  if (inputs.rows() > 0) {
    const Eigen::MatrixXd psi = basis.design_matrix(inputs);
    precision.noalias() += hyper.beta * psi * psi.transpose();
    rhs.noalias() = hyper.beta * (psi * targets);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("brr_posterior: precision Cholesky failed");
  }
  return GaussianPosterior(llt.solve(rhs), std::move(precision));
}

BrrHyperFit brr_update_hyper(const RbfBasis& basis, const BrrHyper& init,
                             const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
  check_hyper(init, "brr_update_hyper");
  check_data(basis, inputs, targets, "brr_update_hyper");
  const Eigen::Index n = inputs.rows();
  if (n < 2) {
    throw std::invalid_argument("brr_update_hyper: needs at least two observations");
  }
  const Eigen::MatrixXd psi = basis.design_matrix(inputs);
  const Eigen::MatrixXd gram = psi * psi.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("brr_update_hyper: eigendecomposition failed");
  }
  const Eigen::VectorXd eigs = eig.eigenvalues().cwiseMax(0.0);

  BrrHyperFit fit;
  fit.hyper = init;
  for (int iter = 1; iter <= 100; ++iter) {
    fit.iterations = iter;
    const double alpha = fit.hyper.alpha;
    const double beta = fit.hyper.beta;

    Eigen::MatrixXd precision = beta * gram;
    precision.diagonal().array() += alpha;
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("brr_update_hyper: precision Cholesky failed");
    }
    const Eigen::VectorXd mu = llt.solve(beta * (psi * targets));

    double tau = 0.0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
      const double t = beta * eigs(i);
      tau += t / (t + alpha);
    }
    const double mu_sq = mu.squaredNorm();
    const double resid = (targets - psi.transpose() * mu).squaredNorm();
    const double denom = static_cast<double>(n) - tau;

    const double new_alpha = clamp_hyper(mu_sq > 0.0 ? tau / mu_sq : kHyperHi);
    const double new_beta = clamp_hyper(denom > 0.0 && resid > 0.0 ? denom / resid : kHyperHi);

    const double da = std::abs(new_alpha - alpha) / std::abs(alpha);
    const double db = std::abs(new_beta - beta) / std::abs(beta);
    fit.hyper = BrrHyper{new_alpha, new_beta};
    if (da < 1e-6 && db < 1e-6) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

Eigen::Index brr_acquisition(const GaussianPosterior& posterior, const RbfBasis& basis,
                             const Eigen::MatrixXd& candidates) {
  if (candidates.rows() == 0) {
    throw std::invalid_argument("brr_acquisition: empty candidate set");
  }
  if (posterior.dim() != basis.size()) {
    throw std::invalid_argument("brr_acquisition: posterior/basis size mismatch");
  }
  const Eigen::MatrixXd psi = basis.design_matrix(candidates);
  const Eigen::VectorXd variances =
      (posterior.cov_cholesky().transpose() * psi).colwise().squaredNorm();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < variances.size(); ++i) {
    if (variances(i) > variances(best)) best = i;
  }
  return best;
}

double brr_test_error(const GaussianPosterior& posterior, const RbfBasis& basis,
                      const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
  check_data(basis, inputs, targets, "brr_test_error");
  if (inputs.rows() == 0) {
    throw std::invalid_argument("brr_test_error: empty test set");
  }
  if (posterior.dim() != basis.size()) {
    throw std::invalid_argument("brr_test_error: posterior/basis size mismatch");
  }
  const Eigen::MatrixXd psi = basis.design_matrix(inputs);
  const Eigen::VectorXd mean_pred = psi.transpose() * posterior.mean();
  const Eigen::VectorXd variances =
      (posterior.cov_cholesky().transpose() * psi).colwise().squaredNorm();
  return ((targets - mean_pred).array().square() + variances.array()).mean();
}

}  // namespace stopal
