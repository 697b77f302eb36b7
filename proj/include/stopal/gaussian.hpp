#pragma once

#include <Eigen/Dense>

namespace stopal {

/**
 * Multivariate Gaussian stored as mean + precision, with covariance and
 * factorizations cached at construction.
 *
 * The precision must be symmetric positive definite; construction verifies
 * covariance * precision = I to 1e-8 in max-norm and throws otherwise.
 */
class GaussianPosterior {
 public:
  GaussianPosterior(Eigen::VectorXd mean, Eigen::MatrixXd precision);

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  /// Lower Cholesky factor of the covariance.
  const Eigen::MatrixXd& cov_cholesky() const { return cov_chol_; }
  double log_det_covariance() const { return log_det_cov_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd cov_chol_;
  double log_det_cov_;
};

/// KL[p || q] between Gaussians of equal dimension. Nonnegative up to
/// roundoff; tiny negative results are clamped to 0.
double gaussian_kl(const GaussianPosterior& p, const GaussianPosterior& q);

}  // namespace stopal
