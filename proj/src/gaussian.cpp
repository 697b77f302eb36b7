#include "stopal/gaussian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stopal {

GaussianPosterior::GaussianPosterior(Eigen::VectorXd mean, Eigen::MatrixXd precision)
    : mean_(std::move(mean)), precision_(std::move(precision)) {
  const Eigen::Index d = mean_.size();
  if (d == 0) {
    throw std::invalid_argument("GaussianPosterior: dimension must be positive");
  }
  if (precision_.rows() != d || precision_.cols() != d) {
    throw std::invalid_argument("GaussianPosterior: precision shape does not match mean");
  }
  if (!mean_.allFinite() || !precision_.allFinite()) {
    throw std::invalid_argument("GaussianPosterior: non-finite entries");
  }
  const double scale = precision_.cwiseAbs().maxCoeff();
  if ((precision_ - precision_.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(scale, 1.0)) {
    throw std::invalid_argument("GaussianPosterior: precision is not symmetric");
  }
  precision_ = ((precision_ + precision_.transpose()) / 2.0).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(precision_);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("GaussianPosterior: precision is not positive definite");
  }
  covariance_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
  covariance_ = ((covariance_ + covariance_.transpose()) / 2.0).eval();

  const double identity_err =
      (covariance_ * precision_ - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (!(identity_err <= 1e-8)) {
    throw std::runtime_error(
        "GaussianPosterior: covariance * precision deviates from identity by " +
        std::to_string(identity_err));
  }

  Eigen::LLT<Eigen::MatrixXd> cov_llt(covariance_);
  if (cov_llt.info() != Eigen::Success) {
    throw std::runtime_error("GaussianPosterior: covariance is not positive definite");
  }
  cov_chol_ = cov_llt.matrixL();
  log_det_cov_ = 2.0 * cov_chol_.diagonal().array().log().sum();
}

double gaussian_kl(const GaussianPosterior& p, const GaussianPosterior& q) {
  const Eigen::Index d = p.dim();
  if (q.dim() != d) {
    throw std::invalid_argument("gaussian_kl: dimension mismatch");
  }
  const double trace_term = (q.precision().cwiseProduct(p.covariance())).sum();
  const Eigen::VectorXd diff = q.mean() - p.mean();
  const double quad = diff.dot(q.precision() * diff);
  const double log_det_ratio = q.log_det_covariance() - p.log_det_covariance();
  double kl = 0.5 * (trace_term + log_det_ratio + quad - static_cast<double>(d));
  if (kl < 0.0) {
    if (kl < -1e-10) {
      throw std::runtime_error("gaussian_kl: negative KL beyond roundoff: " + std::to_string(kl));
    }
    kl = 0.0;
  }
  return kl;
}

}  // namespace stopal
