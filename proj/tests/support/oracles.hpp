#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "stopal/bdnn_kl.hpp"
#include "stopal/gaussian.hpp"

namespace stopal::oracle {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// W0 by bracketed bisection in long double. Shares no code path with the
/// library routine (no series, no Halley step).
long double lambert_w0_bisect(long double x);

struct DenseGaussian {
  VectorXld mean;
  MatrixXld cov;
};

/// KL[p || q] from means and covariances, evaluated in long double.
long double gaussian_kl_dense(const DenseGaussian& p, const DenseGaussian& q);

/// Discrete bound instance: strictly positive distributions over k states
/// and a loss table with values in [lo, hi].
struct DiscreteInstance {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> loss;
};

DiscreteInstance random_discrete_instance(std::mt19937_64& rng, int max_states, double lo,
                                          double hi);
double discrete_kl(const std::vector<double>& p, const std::vector<double>& q);
double expected_value(const std::vector<double>& dist, const std::vector<double>& values);

/// One draw from a Gaussian posterior via its covariance Cholesky factor.
Eigen::VectorXd sample_gaussian(const GaussianPosterior& g, std::mt19937_64& rng);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo KL[p || q] as the sample mean of log p(x) - log q(x), x ~ p.
McEstimate mc_gaussian_kl(const GaussianPosterior& p, const GaussianPosterior& q, int samples,
                          std::mt19937_64& rng);

/// Monte-Carlo estimate of the exact mixture KL between dropout posteriors.
McEstimate mc_bdnn_kl(const BdnnPosterior& p, const BdnnPosterior& q, int samples,
                      std::mt19937_64& rng);

/// Exact joint-distribution KL sum: per weight bundle the kept/dropped
/// indicator is paired identically across posteriors, giving
/// sum_z p_z (KL of the conditional Gaussians + log p_z/q_z); bias bundles
/// contribute their plain Gaussian KL.
double bdnn_joint_kl_sum(const BdnnPosterior& p, const BdnnPosterior& q);

/// Squared-exponential kernel matrix in long double.
MatrixXld se_kernel_ld(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double lengthscale);

/// Dense GP posterior of the latent function over all rows of z after
/// observing the first n_train rows with targets y (n_train 0 = prior).
DenseGaussian gp_dense_posterior(const Eigen::MatrixXd& z, int n_train, const Eigen::VectorXd& y,
                                 double lengthscale, double beta);

/// Random GP training sequence over jittered lattice inputs, resampled until
/// the kernel matrix has smallest eigenvalue >= 0.05 so dense KLs stay well
/// conditioned.
struct GpSequence {
  Eigen::MatrixXd inputs;  // n x dim, acquisition order
  Eigen::VectorXd targets;
  double lengthscale = 1.0;
  double beta = 1.0;
};

GpSequence random_gp_sequence(std::mt19937_64& rng, int dim, int n);

}  // namespace stopal::oracle
