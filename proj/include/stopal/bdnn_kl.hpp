#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace stopal {

/**
 * One layer of a dropout network's variational posterior: each input unit h
 * carries a Gaussian weight bundle N(m_h, sigma^2 I) over the H_out outgoing
 * weights, kept with probability keep_prob; biases are N(bias_mean, sigma^2 I).
 */
struct DropoutLayerParams {
  Eigen::MatrixXd weight_means;  // H_in x H_out, row h = m_h
  Eigen::VectorXd bias_mean;     // H_out
  double variance = 1.0;         // sigma^2, shared within the layer
  double keep_prob = 0.5;

  int input_width() const { return static_cast<int>(weight_means.rows()); }
  int output_width() const { return static_cast<int>(weight_means.cols()); }
};

struct BdnnPosterior {
  std::vector<DropoutLayerParams> layers;
};

/// Shape/finiteness/width-chain validation shared by the bound functions;
/// also requires variance > 0 and keep_prob in [0, 1].
void validate_bdnn(const BdnnPosterior& posterior);

/// KL[p || q] <= 0.5 sum_l { (p_l/s'_l) |M_l - M'_l|_F^2 + (1/s'_l) |nu_l - nu'_l|^2
///   + H_{l-1} d_B(p_l, q_l) }
///   + sum_l ((1 + p_l H_{l-1}) H_l / 2) (s_l/s'_l - log(s_l/s'_l) - 1),
/// with s_l = sigma_l^2 and d_B the Bernoulli KL. Degenerate keep
/// probabilities (0 or 1, differing across posteriors) give +inf rather
/// than an exception.
double bdnn_kl_bound(const BdnnPosterior& p, const BdnnPosterior& q);

/// Matched-variance, matched-keep-probability form:
/// 0.5 sum_l (1/s_l) { p_l |M_l - M'_l|_F^2 + |nu_l - nu'_l|^2 }.
/// Throws unless variances and keep probabilities agree per layer.
double bdnn_kl_bound_simplified(const BdnnPosterior& p, const BdnnPosterior& q);

/// Bernoulli KL with the 0 log 0 := 0 convention; +inf when q is degenerate
/// and p differs. Arguments must lie in [0, 1].
double bernoulli_kl(double p, double q);

/// Loads a posterior from CSV, one row per layer:
/// layer,H_in,H_out,keep_prob,variance,nu_1..nu_{H_out},m_11..m_{H_in*H_out}
/// (weight means row-major). A header line is detected and skipped.
BdnnPosterior load_bdnn_csv(const std::string& path);

}  // namespace stopal
