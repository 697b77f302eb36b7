#include "stopal/gaussian.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "stopal/random.hpp"
#include "support/oracles.hpp"

using namespace stopal;

namespace {

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal_draw(rng);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd random_vec(std::mt19937_64& rng, int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = normal_draw(rng);
  return v;
}

}  // namespace

TEST_CASE("gaussian_kl of a distribution with itself is zero up to roundoff") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + static_cast<int>(uniform_below(rng, 6));
    GaussianPosterior p(random_vec(rng, d), random_spd(rng, d));
    const double kl = gaussian_kl(p, p);
    CHECK(kl >= 0.0);
    CHECK(kl <= 1e-12);
  }
}

TEST_CASE("unit-variance mean shift") {
  GaussianPosterior p(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  GaussianPosterior q(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1));
  CHECK(std::abs(gaussian_kl(p, q) - 0.5) <= 1e-14);
  CHECK(std::abs(gaussian_kl(q, p) - 0.5) <= 1e-14);
}

TEST_CASE("matches the dense long-double oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(uniform_below(rng, 5));
    const Eigen::VectorXd mp = random_vec(rng, d);
    const Eigen::VectorXd mq = random_vec(rng, d);
    const Eigen::MatrixXd prec_p = random_spd(rng, d);
    const Eigen::MatrixXd prec_q = random_spd(rng, d);
    GaussianPosterior p(mp, prec_p);
    GaussianPosterior q(mq, prec_q);

    oracle::DenseGaussian op{mp.cast<long double>(),
                             prec_p.cast<long double>().inverse()};
    oracle::DenseGaussian oq{mq.cast<long double>(),
                             prec_q.cast<long double>().inverse()};
    const double expected = static_cast<double>(oracle::gaussian_kl_dense(op, oq));
    CHECK(std::abs(gaussian_kl(p, q) - expected) <= 1e-9 * std::max(1.0, expected));
  }
}

TEST_CASE("Monte Carlo agreement in four dimensions") {
  std::mt19937_64 rng(13);
  const int d = 4;
  GaussianPosterior p(random_vec(rng, d), random_spd(rng, d));
  GaussianPosterior q(random_vec(rng, d), random_spd(rng, d));
  const double kl = gaussian_kl(p, q);
  const oracle::McEstimate est = oracle::mc_gaussian_kl(p, q, 400000, rng);
  CHECK(std::abs(kl - est.mean) <= 3.0 * est.std_error);
}

TEST_CASE("asymmetry and positivity") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(uniform_below(rng, 3));
    GaussianPosterior p(random_vec(rng, d), random_spd(rng, d));
    GaussianPosterior q(random_vec(rng, d), random_spd(rng, d));
    const double fwd = gaussian_kl(p, q);
    const double bwd = gaussian_kl(q, p);
    CHECK(fwd > 0.0);
    CHECK(bwd > 0.0);
    CHECK(fwd != bwd);
  }
}

TEST_CASE("construction validation") {
  CHECK_THROWS_AS(GaussianPosterior(Eigen::VectorXd(), Eigen::MatrixXd()),
                  std::invalid_argument);
  CHECK_THROWS_AS(GaussianPosterior(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(3, 3)),
                  std::invalid_argument);

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(GaussianPosterior(Eigen::VectorXd::Zero(2), asym), std::invalid_argument);

  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(GaussianPosterior(Eigen::VectorXd::Zero(2), indef), std::runtime_error);

  Eigen::VectorXd bad(1);
  bad << std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(GaussianPosterior(bad, Eigen::MatrixXd::Identity(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("dimension mismatch in the divergence") {
  GaussianPosterior p(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  GaussianPosterior q(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(gaussian_kl(p, q), std::invalid_argument);
}

TEST_CASE("cached covariance inverts the precision") {
  std::mt19937_64 rng(15);
  const int d = 5;
  const Eigen::MatrixXd prec = random_spd(rng, d);
  GaussianPosterior p(random_vec(rng, d), prec);
  const Eigen::MatrixXd identity = p.covariance() * p.precision();
  CHECK((identity - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8);
  const Eigen::MatrixXd chol_product =
      p.cov_cholesky() * p.cov_cholesky().transpose();
  CHECK((chol_product - p.covariance()).cwiseAbs().maxCoeff() <= 1e-10);
  const double expected_logdet =
      std::log(p.covariance().determinant());
  CHECK(std::abs(p.log_det_covariance() - expected_logdet) <= 1e-8 * std::max(1.0, std::abs(expected_logdet)));
}
