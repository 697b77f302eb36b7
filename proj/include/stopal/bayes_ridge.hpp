#pragma once

#include <Eigen/Dense>

#include "stopal/gaussian.hpp"
#include "stopal/rbf_basis.hpp"

namespace stopal {

struct BrrHyper {
  double alpha = 1.0;  // prior precision on the weights
  double beta = 1.0;   // observation noise precision
};

/// Weight posterior for ridge regression on basis features:
/// precision = beta * Psi Psi^T + alpha I, mean = beta * Cov * Psi y.
/// Empty data yields the prior N(0, alpha^{-1} I).
GaussianPosterior brr_posterior(const RbfBasis& basis, const BrrHyper& hyper,
                                const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets);

struct BrrHyperFit {
  BrrHyper hyper;
  bool converged = false;
  int iterations = 0;
};

/// Evidence fixed point for (alpha, beta): tau_i = beta * eig_i(Psi Psi^T),
/// tau = sum tau_i / (tau_i + alpha), alpha = tau / |mu|^2,
/// 1/beta = |y - Psi^T mu|^2 / (n - tau). Iterates until both relative
/// changes fall below 1e-6 (at most 100 iterations); values are clamped to
/// [1e-8, 1e8]. Non-convergence is reported, not thrown.
BrrHyperFit brr_update_hyper(const RbfBasis& basis, const BrrHyper& init,
                             const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets);

/// Index of the candidate row with the largest predictive weight-space
/// variance phi^T Cov phi; ties go to the lowest index.
Eigen::Index brr_acquisition(const GaussianPosterior& posterior, const RbfBasis& basis,
                             const Eigen::MatrixXd& candidates);

/// Mean posterior-predictive squared error over a test set:
/// mean_i[(y_i - mu^T phi_i)^2 + phi_i^T Cov phi_i].
double brr_test_error(const GaussianPosterior& posterior, const RbfBasis& basis,
                      const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets);

}  // namespace stopal
