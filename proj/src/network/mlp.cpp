// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/network/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lowrank/errors.hpp"
#include "lowrank/linalg/decompositions.hpp"

namespace lowrank::network {

MlpPass mlp_forward_backward(const DeepLinearNet& net, const Matrix& x, const Matrix& y,
                             LossKind loss, const std::vector<Matrix>* masks) {
  net.validate();
  const std::size_t L = net.depth();
  const std::size_t n = x.cols();
  if (x.rows() != net.input_dim()) throw std::invalid_argument("mlp_forward_backward: input rows");
  if (y.rows() != net.output_dim() || y.cols() != n) {
    throw std::invalid_argument("mlp_forward_backward: target shape " + y.shape_string());
  }
  if (n == 0) throw std::invalid_argument("mlp_forward_backward: no samples");
  if (masks != nullptr) {
    if (net.dropout_keep.size() + 1 != L || masks->size() + 1 != L) {
      throw std::invalid_argument("mlp_forward_backward: need one mask and keep value per hidden layer");
    }
    for (std::size_t l = 0; l + 1 < L; ++l) {
      const double mu = net.dropout_keep[l];
      if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("mlp_forward_backward: mu not in (0, 1]");
      if ((*masks)[l].rows() != net.weights[l].rows() || (*masks)[l].cols() != n) {
        throw std::invalid_argument("mlp_forward_backward: mask shape mismatch");
      }
    }
  }

  MlpPass pass;
  std::vector<Matrix> inputs;  // input to each layer
  inputs.push_back(x);
  for (std::size_t l = 0; l < L; ++l) {
    Matrix z = net.weights[l] * inputs.back();
    pass.preactivations.push_back(z);
    if (l + 1 == L) break;
    if (net.activation == Activation::relu) {
      for (double& v : z.data()) v = std::max(v, 0.0);
    }
    if (masks != nullptr) {
      const double scale = 1.0 / net.dropout_keep[l];
      const auto& m = (*masks)[l].data();
      for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] *= m[i] * scale;
    }
    pass.hidden.push_back(z);
    inputs.push_back(std::move(z));
  }

  const Matrix& out = pass.preactivations.back();
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix delta(out.rows(), n);
  if (loss == LossKind::mse) {
    delta = out - y;
    pass.loss = 0.5 * delta.squared_norm() * inv_n;
    delta *= inv_n;
  } else {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double zmax = -INFINITY;
      for (std::size_t i = 0; i < out.rows(); ++i) zmax = std::max(zmax, out(i, j));
      double denom = 0.0;
      for (std::size_t i = 0; i < out.rows(); ++i) denom += std::exp(out(i, j) - zmax);
      const double log_denom = std::log(denom);
      double ysum = 0.0;
      for (std::size_t i = 0; i < out.rows(); ++i) ysum += y(i, j);
      for (std::size_t i = 0; i < out.rows(); ++i) {
        const double logp = out(i, j) - zmax - log_denom;
        total -= y(i, j) * logp;
        delta(i, j) = (std::exp(logp) * ysum - y(i, j)) * inv_n;
      }
    }
    pass.loss = total * inv_n;
  }

  pass.grads.resize(L);
  for (std::size_t l = L; l-- > 0;) {
    pass.grads[l] = linalg::matmul_nt(delta, inputs[l]);
    if (l == 0) break;
    Matrix back = linalg::matmul_tn(net.weights[l], delta);
    const Matrix& z = pass.preactivations[l - 1];
    const double scale = masks != nullptr ? 1.0 / net.dropout_keep[l - 1] : 1.0;
    for (std::size_t i = 0; i < back.size(); ++i) {
      double g = back.data()[i];
      if (net.activation == Activation::relu && !(z.data()[i] > 0.0)) g = 0.0;
      if (masks != nullptr) g *= (*masks)[l - 1].data()[i] * scale;
      back.data()[i] = g;
    }
    delta = std::move(back);
  }
  return pass;
}

std::vector<Matrix> sample_dropout_masks(const DeepLinearNet& net, std::size_t n,
                                         linalg::Rng& rng) {
  net.validate();
  if (net.dropout_keep.empty()) throw std::invalid_argument("sample_dropout_masks: no dropout");
  std::vector<Matrix> masks;
  for (std::size_t l = 0; l + 1 < net.depth(); ++l) {
    Matrix m(net.weights[l].rows(), n);
    for (double& v : m.data()) v = rng.bernoulli(net.dropout_keep[l]) ? 1.0 : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

DropoutRankResult run_dropout_rank_experiment(const DropoutRankConfig& cfg) {
  if (!(cfg.mu > 0.0 && cfg.mu <= 1.0)) throw std::invalid_argument("dropout experiment: mu not in (0, 1]");
  if (cfg.hidden_layers < 1) throw std::invalid_argument("dropout experiment: need a hidden layer");
  if (cfg.target_rank < 1 || cfg.target_rank > std::min(cfg.d, cfg.k)) {
    throw std::invalid_argument("dropout experiment: target rank out of range");
  }
  if (!(cfg.eta > 0.0) || cfg.steps < 0 || cfg.record_every < 1 || cfg.n == 0) {
    throw std::invalid_argument("dropout experiment: invalid schedule");
  }
  linalg::Rng rng(cfg.seed);
  const Matrix x = rng.gaussian_matrix(cfg.d, cfg.n);
  Matrix t = rng.gaussian_matrix(cfg.k, cfg.target_rank) * rng.gaussian_matrix(cfg.target_rank, cfg.d);
  t *= 1.0 / linalg::singular_values(t)[0];
  const Matrix y = t * x;

  DeepLinearNet net;
  net.activation = Activation::relu;
  for (std::size_t l = 0; l <= cfg.hidden_layers; ++l) {
    const std::size_t rows = l == cfg.hidden_layers ? cfg.k : cfg.d;
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    net.weights.push_back(rng.uniform_matrix(rows, cfg.d, -bound, bound));
  }
  const bool dropout = cfg.mu < 1.0;
  if (dropout) net.dropout_keep.assign(cfg.hidden_layers, cfg.mu);

  DropoutRankResult res;
  const std::size_t last_hidden = cfg.hidden_layers;
  auto record = [&](long iter) {
    DeepLinearNet plain = net;
    plain.dropout_keep.clear();
    const MlpPass eval = mlp_forward_backward(plain, x, y, LossKind::mse);
    const Matrix& act = eval.hidden.back();
    const auto s = linalg::singular_values(act);
    std::size_t rank = 0;
    if (!s.empty() && s[0] > 0.0)
      rank = static_cast<std::size_t>(
          std::count_if(s.begin(), s.end(), [&](double v) { return v > cfg.rank_tol * s[0]; }));
    res.iters.push_back(iter);
    res.ranks.push_back(rank);
    res.losses.push_back(eval.loss);
    res.trace.add_values(last_hidden, iter, TraceKind::act_sv, s);
  };

  record(0);
  for (long step = 1; step <= cfg.steps; ++step) {
    std::vector<Matrix> masks;
    if (dropout) masks = sample_dropout_masks(net, cfg.n, rng);
    const MlpPass pass = mlp_forward_backward(net, x, y, LossKind::mse, dropout ? &masks : nullptr);
    if (!std::isfinite(pass.loss) || pass.loss > kDivergenceLoss) {
      throw DivergenceError("dropout experiment: loss diverged at step " + std::to_string(step),
                            step, pass.loss);
    }
    for (std::size_t l = 0; l < net.depth(); ++l) {
      auto& w = net.weights[l].data();
      const auto& g = pass.grads[l].data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.eta * g[i];
    }
    if (step % cfg.record_every == 0 || step == cfg.steps) record(step);
  }
  res.initial_rank = res.ranks.front();
  res.final_rank = res.ranks.back();
  return res;
}

}  // namespace lowrank::network
