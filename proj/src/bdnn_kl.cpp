#include "stopal/bdnn_kl.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace stopal {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_architecture_match(const BdnnPosterior& p, const BdnnPosterior& q) {
  if (p.layers.size() != q.layers.size()) {
    throw std::invalid_argument("bdnn_kl: layer count mismatch");
  }
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    if (p.layers[l].input_width() != q.layers[l].input_width() ||
        p.layers[l].output_width() != q.layers[l].output_width()) {
      throw std::invalid_argument("bdnn_kl: layer width mismatch");
    }
  }
}

}  // namespace

void validate_bdnn(const BdnnPosterior& posterior) {
  if (posterior.layers.empty()) {
    throw std::invalid_argument("bdnn: posterior must have at least one layer");
  }
  for (std::size_t l = 0; l < posterior.layers.size(); ++l) {
    const DropoutLayerParams& layer = posterior.layers[l];
    if (layer.input_width() < 1 || layer.output_width() < 1) {
      throw std::invalid_argument("bdnn: layer widths must be positive");
    }
    if (layer.bias_mean.size() != layer.output_width()) {
      throw std::invalid_argument("bdnn: bias length must equal the output width");
    }
    if (!layer.weight_means.allFinite() || !layer.bias_mean.allFinite()) {
      throw std::invalid_argument("bdnn: non-finite layer means");
    }
    if (!std::isfinite(layer.variance) || layer.variance <= 0.0) {
      throw std::invalid_argument("bdnn: layer variance must be positive");
    }
    if (!std::isfinite(layer.keep_prob) || layer.keep_prob < 0.0 || layer.keep_prob > 1.0) {
      throw std::invalid_argument("bdnn: keep probability must lie in [0, 1]");
    }
    if (l + 1 < posterior.layers.size() &&
        layer.output_width() != posterior.layers[l + 1].input_width()) {
      throw std::invalid_argument("bdnn: layer width chain is inconsistent");
    }
  }
}

double bernoulli_kl(double p, double q) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0 || !std::isfinite(q) || q < 0.0 || q > 1.0) {
    throw std::invalid_argument("bernoulli_kl: probabilities must lie in [0, 1]");
  }
  if (p == q) return 0.0;
  if (q == 0.0 || q == 1.0) return kInf;
  double kl = 0.0;
  if (p > 0.0) kl += p * std::log(p / q);
  if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return kl;
}

double bdnn_kl_bound(const BdnnPosterior& p, const BdnnPosterior& q) {
  validate_bdnn(p);
  validate_bdnn(q);
  check_architecture_match(p, q);

  double total = 0.0;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const DropoutLayerParams& pl = p.layers[l];
    const DropoutLayerParams& ql = q.layers[l];
    const double h_in = pl.input_width();
    const double h_out = pl.output_width();
    const double s_p = pl.variance;
    const double s_q = ql.variance;

    total += 0.5 * (pl.keep_prob / s_q) * (pl.weight_means - ql.weight_means).squaredNorm();
    total += 0.5 * (1.0 / s_q) * (pl.bias_mean - ql.bias_mean).squaredNorm();
    const double bern = bernoulli_kl(pl.keep_prob, ql.keep_prob);
    if (bern == kInf) return kInf;
    total += 0.5 * h_in * bern;

    const double ratio = s_p / s_q;
    total += ((1.0 + pl.keep_prob * h_in) * h_out / 2.0) * (ratio - std::log(ratio) - 1.0);
  }
  return total < 0.0 ? 0.0 : total;
}

double bdnn_kl_bound_simplified(const BdnnPosterior& p, const BdnnPosterior& q) {
  validate_bdnn(p);
  validate_bdnn(q);
  check_architecture_match(p, q);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    if (p.layers[l].variance != q.layers[l].variance) {
      throw std::invalid_argument("bdnn_kl_bound_simplified: variances must match per layer");
    }
    if (p.layers[l].keep_prob != q.layers[l].keep_prob) {
      throw std::invalid_argument(
          "bdnn_kl_bound_simplified: keep probabilities must match per layer");
    }
  }
  double total = 0.0;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const DropoutLayerParams& pl = p.layers[l];
    const DropoutLayerParams& ql = q.layers[l];
    total += 0.5 / pl.variance *
             (pl.keep_prob * (pl.weight_means - ql.weight_means).squaredNorm() +
              (pl.bias_mean - ql.bias_mean).squaredNorm());
  }
  return total;
}

BdnnPosterior load_bdnn_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_bdnn_csv: cannot open " + path);
  }
  BdnnPosterior posterior;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);

    auto parse = [&](const std::string& text) {
      std::size_t pos = 0;
      double value;
      try {
        value = std::stod(text, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("load_bdnn_csv: unparseable cell '" + text + "' on line " +
                                 std::to_string(line_no));
      }
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos != text.size() || !std::isfinite(value)) {
        throw std::runtime_error("load_bdnn_csv: unparseable cell '" + text + "' on line " +
                                 std::to_string(line_no));
      }
      return value;
    };

    if (line_no == 1) {
      bool numeric = true;
      try {
        parse(cells.at(0));
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) continue;  // header
    }

    if (cells.size() < 5) {
      throw std::runtime_error("load_bdnn_csv: too few cells on line " + std::to_string(line_no));
    }
    const int h_in = static_cast<int>(parse(cells[1]));
    const int h_out = static_cast<int>(parse(cells[2]));
    if (h_in < 1 || h_out < 1) {
      throw std::runtime_error("load_bdnn_csv: bad layer widths on line " +
                               std::to_string(line_no));
    }
    const std::size_t expected = 5 + static_cast<std::size_t>(h_out) +
                                 static_cast<std::size_t>(h_in) * static_cast<std::size_t>(h_out);
    if (cells.size() != expected) {
      throw std::runtime_error("load_bdnn_csv: expected " + std::to_string(expected) +
                               " cells on line " + std::to_string(line_no) + ", got " +
                               std::to_string(cells.size()));
    }

    DropoutLayerParams layer;
    layer.keep_prob = parse(cells[3]);
    layer.variance = parse(cells[4]);
    if (layer.keep_prob <= 0.0 || layer.keep_prob >= 1.0) {
      throw std::runtime_error("load_bdnn_csv: keep probability outside (0, 1) on line " +
                               std::to_string(line_no));
    }
    layer.bias_mean.resize(h_out);
    for (int i = 0; i < h_out; ++i) layer.bias_mean(i) = parse(cells[5 + i]);
    layer.weight_means.resize(h_in, h_out);
    std::size_t k = 5 + static_cast<std::size_t>(h_out);
    for (int r = 0; r < h_in; ++r) {
      for (int c = 0; c < h_out; ++c) {
        layer.weight_means(r, c) = parse(cells[k++]);
      }
    }
    posterior.layers.push_back(std::move(layer));
  }
  validate_bdnn(posterior);
  return posterior;
}

}  // namespace stopal
