#include "stopal/rbf_basis.hpp"

#include <cmath>
#include <stdexcept>

namespace stopal {

RbfBasis::RbfBasis(Eigen::MatrixXd centers, Eigen::VectorXd bandwidths)
    : centers_(std::move(centers)), bandwidths_(std::move(bandwidths)) {
  if (centers_.rows() == 0 || centers_.cols() == 0) {
    throw std::invalid_argument("RbfBasis: centers must be nonempty");
  }
  if (bandwidths_.size() != centers_.rows()) {
    throw std::invalid_argument("RbfBasis: one bandwidth per dimension required");
  }
  if (!centers_.allFinite() || !bandwidths_.allFinite()) {
    throw std::invalid_argument("RbfBasis: non-finite parameters");
  }
  if ((bandwidths_.array() <= 0.0).any()) {
    throw std::invalid_argument("RbfBasis: bandwidths must be positive");
  }
  for (Eigen::Index d = 0; d < centers_.rows(); ++d) {
    for (Eigen::Index m = 1; m < centers_.cols(); ++m) {
      if (!(centers_(d, m) > centers_(d, m - 1))) {
        throw std::invalid_argument("RbfBasis: centers must be strictly increasing per dimension");
      }
    }
  }
}

RbfBasis RbfBasis::from_feature_ranges(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                       int centers_per_dim) {
  const Eigen::Index d = lo.size();
  if (d == 0 || hi.size() != d) {
    throw std::invalid_argument("RbfBasis: lo/hi must be nonempty and equal length");
  }
  if (centers_per_dim < 1) {
    throw std::invalid_argument("RbfBasis: centers_per_dim must be at least 1");
  }
  Eigen::MatrixXd centers(d, centers_per_dim);
  Eigen::VectorXd bandwidths(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(hi(i) >= lo(i))) {
      throw std::invalid_argument("RbfBasis: range upper bound below lower bound");
    }
    const double range = hi(i) - lo(i);
    // Degenerate grids fall back to unit spacing about the midpoint.
    if (centers_per_dim == 1) {
      centers(i, 0) = (lo(i) + hi(i)) / 2.0;
      bandwidths(i) = range > 0.0 ? range : 1.0;
      continue;
    }
    double spacing = range / (centers_per_dim - 1);
    double start = lo(i);
    if (!(spacing > 0.0)) {
      spacing = 1.0;
      start = (lo(i) + hi(i)) / 2.0 - spacing * (centers_per_dim - 1) / 2.0;
    }
    for (int m = 0; m < centers_per_dim; ++m) {
      centers(i, m) = start + spacing * m;
    }
    centers(i, centers_per_dim - 1) = start + spacing * (centers_per_dim - 1);
    bandwidths(i) = spacing;
  }
  return RbfBasis(std::move(centers), std::move(bandwidths));
}

RbfBasis RbfBasis::from_data(const Eigen::MatrixXd& inputs, int centers_per_dim) {
  if (inputs.rows() == 0 || inputs.cols() == 0) {
    throw std::invalid_argument("RbfBasis: inputs must be nonempty");
  }
  return from_feature_ranges(inputs.colwise().minCoeff().transpose(),
                             inputs.colwise().maxCoeff().transpose(), centers_per_dim);
}

Eigen::VectorXd RbfBasis::feature_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != centers_.rows()) {
    throw std::invalid_argument("RbfBasis: input dimension mismatch");
  }
  const int m = centers_per_dim();
  Eigen::VectorXd phi(size());
  for (Eigen::Index d = 0; d < centers_.rows(); ++d) {
    const double inv_two_l2 = 1.0 / (2.0 * bandwidths_(d) * bandwidths_(d));
    for (int j = 0; j < m; ++j) {
      const double diff = x(d) - centers_(d, j);
      phi(d * m + j) = std::exp(-diff * diff * inv_two_l2);
    }
  }
  return phi;
}

Eigen::MatrixXd RbfBasis::design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
  if (inputs.cols() != centers_.rows()) {
    throw std::invalid_argument("RbfBasis: input dimension mismatch");
  }
  Eigen::MatrixXd psi(size(), inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    psi.col(i) = feature_vector(inputs.row(i).transpose());
  }
  return psi;
}

}  // namespace stopal
