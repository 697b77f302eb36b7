#pragma once

#include <Eigen/Dense>

namespace stopal {

/**
 * Additive Gaussian RBF features: for each input dimension d a grid of M
 * centers xi_{d,1} < ... < xi_{d,M} with bandwidth l_d equal to the grid
 * spacing. The feature vector stacks all D*M activations
 * exp(-(x_d - xi_{d,m})^2 / (2 l_d^2)), dimension-major.
 */
class RbfBasis {
 public:
  /// centers is D x M (row d = grid for dimension d, strictly increasing);
  /// bandwidths has one positive entry per dimension.
  RbfBasis(Eigen::MatrixXd centers, Eigen::VectorXd bandwidths);

  /// Grids spanning [lo_d, hi_d] with centers_per_dim equally spaced points.
  static RbfBasis from_feature_ranges(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                      int centers_per_dim);
  /// Ranges taken from the observed min/max of each column of inputs (n x D).
  static RbfBasis from_data(const Eigen::MatrixXd& inputs, int centers_per_dim);

  int dims() const { return static_cast<int>(centers_.rows()); }
  int centers_per_dim() const { return static_cast<int>(centers_.cols()); }
  int size() const { return dims() * centers_per_dim(); }
  const Eigen::MatrixXd& centers() const { return centers_; }
  const Eigen::VectorXd& bandwidths() const { return bandwidths_; }

  /// Feature vector of length size() for one input point.
  Eigen::VectorXd feature_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Design matrix, size() x n, column i = feature_vector(row i of inputs).
  Eigen::MatrixXd design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;

 private:
  Eigen::MatrixXd centers_;
  Eigen::VectorXd bandwidths_;
};

}  // namespace stopal
