#include "stopal/bayes_logistic.hpp"

#include <cmath>
#include <stdexcept>

namespace stopal {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_inputs(const RbfBasis& basis, double alpha, const Eigen::MatrixXd& inputs,
                  const Eigen::VectorXd& labels, const char* what) {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw std::invalid_argument(std::string(what) + ": alpha must be positive");
  }
  if (inputs.rows() != labels.size()) {
    throw std::invalid_argument(std::string(what) + ": inputs/labels length mismatch");
  }
  if (inputs.rows() > 0 && inputs.cols() != basis.dims()) {
    throw std::invalid_argument(std::string(what) + ": input dimension mismatch");
  }
  if (!inputs.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite inputs");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) {
      throw std::invalid_argument(std::string(what) + ": labels must be exactly 0 or 1");
    }
  }
}

/// Penalized negative log likelihood: sum softplus terms + alpha/2 |w|^2.
double penalized_nll(const Eigen::VectorXd& w, double alpha, const Eigen::MatrixXd& psi,
                     const Eigen::VectorXd& labels) {
  double nll = 0.5 * alpha * w.squaredNorm();
  const Eigen::VectorXd z = psi.transpose() * w;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    nll += softplus(z(i)) - labels(i) * z(i);
  }
  return nll;
}

}  // namespace

Eigen::VectorXd blr_map(const RbfBasis& basis, double alpha, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& labels) {
  check_inputs(basis, alpha, inputs, labels, "blr_map");
  if (inputs.rows() == 0) {
    throw std::invalid_argument("blr_map: needs at least one observation");
  }
  const int j = basis.size();
  const Eigen::MatrixXd psi = basis.design_matrix(inputs);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(j);
  double objective = penalized_nll(w, alpha, psi, labels);

  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd z = psi.transpose() * w;
    Eigen::VectorXd probs(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) probs(i) = sigmoid(z(i));

    const Eigen::VectorXd grad = psi * (probs - labels) + alpha * w;
    if (grad.norm() <= 1e-8 * std::max(1.0, w.norm())) {
      return w;
    }

    Eigen::MatrixXd hessian = alpha * Eigen::MatrixXd::Identity(j, j);
    const Eigen::VectorXd weights = probs.array() * (1.0 - probs.array());
    hessian.noalias() += psi * weights.asDiagonal() * psi.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("blr_map: Hessian Cholesky failed");
    }
    const Eigen::VectorXd direction = llt.solve(grad);

    // Halve the step until the penalized objective stops increasing.
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < 50; ++h) {
      const Eigen::VectorXd trial = w - step * direction;
      const double trial_obj = penalized_nll(trial, alpha, psi, labels);
      if (trial_obj <= objective) {
        w = trial;
        objective = trial_obj;
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (!accepted) {
      break;
    }
  }

  const Eigen::VectorXd z = psi.transpose() * w;
  Eigen::VectorXd probs(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) probs(i) = sigmoid(z(i));
  const Eigen::VectorXd grad = psi * (probs - labels) + alpha * w;
  if (grad.norm() <= 1e-8 * std::max(1.0, w.norm())) {
    return w;
  }
  throw std::runtime_error("blr_map: Newton iteration did not converge");
}

GaussianPosterior blr_laplace_posterior(const RbfBasis& basis, double alpha,
                                        const Eigen::MatrixXd& inputs,
                                        const Eigen::VectorXd& labels) {
  check_inputs(basis, alpha, inputs, labels, "blr_laplace_posterior");
  const int j = basis.size();
  if (inputs.rows() == 0) {
    return GaussianPosterior(Eigen::VectorXd::Zero(j),
                             alpha * Eigen::MatrixXd::Identity(j, j));
  }
  const Eigen::VectorXd w = blr_map(basis, alpha, inputs, labels);
  const Eigen::MatrixXd psi = basis.design_matrix(inputs);
  const Eigen::VectorXd z = psi.transpose() * w;
  Eigen::VectorXd weights(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = sigmoid(z(i));
    weights(i) = s * (1.0 - s);
  }
  Eigen::MatrixXd precision = alpha * Eigen::MatrixXd::Identity(j, j);
  precision.noalias() += psi * weights.asDiagonal() * psi.transpose();
  return GaussianPosterior(w, std::move(precision));
}

Eigen::Index entropy_acquisition(const GaussianPosterior& posterior, const RbfBasis& basis,
                                 const Eigen::MatrixXd& candidates) {
  if (candidates.rows() == 0) {
    throw std::invalid_argument("entropy_acquisition: empty candidate set");
  }
  if (posterior.dim() != basis.size()) {
    throw std::invalid_argument("entropy_acquisition: posterior/basis size mismatch");
  }
  const Eigen::MatrixXd psi = basis.design_matrix(candidates);
  const Eigen::VectorXd z = psi.transpose() * posterior.mean();
  Eigen::Index best = 0;
  double best_entropy = -1.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double p = sigmoid(z(i));
    double entropy = 0.0;  // 0 log 0 := 0
    if (p > 0.0 && p < 1.0) {
      entropy = -p * std::log(p) - (1.0 - p) * std::log1p(-p);
    }
    if (entropy > best_entropy) {
      best_entropy = entropy;
      best = i;
    }
  }
  return best;
}

double blr_test_error(const GaussianPosterior& posterior, const RbfBasis& basis,
                      const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels) {
  check_inputs(basis, 1.0, inputs, labels, "blr_test_error");
  if (inputs.rows() == 0) {
    throw std::invalid_argument("blr_test_error: empty test set");
  }
  if (posterior.dim() != basis.size()) {
    throw std::invalid_argument("blr_test_error: posterior/basis size mismatch");
  }
  const Eigen::MatrixXd psi = basis.design_matrix(inputs);
  const Eigen::VectorXd z = psi.transpose() * posterior.mean();
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double p = sigmoid(z(i));
    p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
    total += labels(i) == 1.0 ? -std::log(p) : -std::log1p(-p);
  }
  return total / static_cast<double>(z.size());
}

}  // namespace stopal
