#pragma once

#include <Eigen/Dense>

#include "stopal/gaussian.hpp"
#include "stopal/rbf_basis.hpp"

namespace stopal {

/// MAP weights of L2-penalized logistic regression on basis features,
/// found by damped Newton iteration from w = 0. Labels must be 0/1.
/// Converges when the gradient norm falls below 1e-8 * max(1, |w|);
/// throws after 200 iterations without convergence.
Eigen::VectorXd blr_map(const RbfBasis& basis, double alpha, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& labels);

/// Laplace approximation at the MAP: mean w_MAP, precision
/// alpha I + sum_i s_i (1 - s_i) phi_i phi_i^T with s_i = sigmoid(w^T phi_i).
/// With no data this is the prior N(0, alpha^{-1} I).
GaussianPosterior blr_laplace_posterior(const RbfBasis& basis, double alpha,
                                        const Eigen::MatrixXd& inputs,
                                        const Eigen::VectorXd& labels);

/// Index of the candidate row whose plug-in predictive probability has the
/// largest Bernoulli entropy; ties go to the lowest index.
Eigen::Index entropy_acquisition(const GaussianPosterior& posterior, const RbfBasis& basis,
                                 const Eigen::MatrixXd& candidates);

/// Mean cross-entropy of plug-in predictive probabilities against 0/1
/// labels; probabilities are clipped to [1e-12, 1 - 1e-12].
double blr_test_error(const GaussianPosterior& posterior, const RbfBasis& basis,
                      const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels);

}  // namespace stopal
