// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/network/deep_linear_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lowrank/linalg/decompositions.hpp"

namespace lowrank::network {

void DeepLinearNet::validate() const {
  if (weights.empty()) throw std::invalid_argument("DeepLinearNet: needs at least one layer");
  for (std::size_t l = 1; l < weights.size(); ++l) {
    if (weights[l].cols() != weights[l - 1].rows()) {
      throw std::invalid_argument("DeepLinearNet: layer " + std::to_string(l + 1) + " has shape " +
                                  weights[l].shape_string() + " but layer " + std::to_string(l) +
                                  " outputs " + std::to_string(weights[l - 1].rows()));
    }
  }
  if (!dropout_keep.empty()) {
    if (dropout_keep.size() + 1 != weights.size()) {
      throw std::invalid_argument("DeepLinearNet: dropout_keep needs one value per hidden layer");
    }
    for (double mu : dropout_keep) {
      if (!(mu > 0.0 && mu <= 1.0)) {
        throw std::invalid_argument("DeepLinearNet: keep probability must lie in (0, 1]");
      }
    }
  }
}

Matrix DeepLinearNet::product() const { return linalg::chain_product(weights, 0, weights.size()); }

Matrix DeepLinearNet::forward(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = weights[l] * h;
    if (activation == Activation::relu && l + 1 < weights.size()) {
      for (double& v : h.data()) v = std::max(v, 0.0);
    }
  }
  return h;
}

Matrix make_low_rank_target(const TargetSpec& spec) {
  if (spec.r < 1 || spec.r > std::min(spec.k, spec.d)) {
    throw std::invalid_argument("make_low_rank_target: need 1 <= r <= min(k, d)");
  }
  linalg::Rng rng(spec.seed);
  const Matrix g1 = rng.gaussian_matrix(spec.k, spec.r);
  const Matrix g2 = rng.gaussian_matrix(spec.r, spec.d);
  Matrix phi = (g1 * g2) * (1.0 / std::sqrt(static_cast<double>(spec.r)));
  if (linalg::numerical_rank(phi) != spec.r) {
    throw std::runtime_error("make_low_rank_target: generated target lost rank");
  }
  return phi;
}

DeepLinearNet make_orthogonal_dln(std::size_t d, std::size_t k, const std::vector<double>& eps,
                                  linalg::Rng& rng) {
  if (eps.empty()) throw std::invalid_argument("make_orthogonal_dln: need at least one layer");
  if (k < 1 || k > d) throw std::invalid_argument("make_orthogonal_dln: need 1 <= k <= d");
  DeepLinearNet net;
  for (std::size_t l = 0; l < eps.size(); ++l) {
    Matrix w = linalg::random_scaled_orthogonal(d, eps[l], rng);
    if (l + 1 == eps.size() && k < d) w = w.row_range(0, k);
    net.weights.push_back(std::move(w));
  }
  return net;
}

namespace {

void require_linear(const DeepLinearNet& net, const Matrix& phi, const char* op) {
  net.validate();
  if (net.activation != Activation::identity) {
    throw std::invalid_argument(std::string(op) + ": requires identity activation");
  }
  if (phi.rows() != net.output_dim() || phi.cols() != net.input_dim()) {
    throw std::invalid_argument(std::string(op) + ": target shape " + phi.shape_string() +
                                " does not match network product");
  }
}

}  // namespace

double dln_loss(const DeepLinearNet& net, const Matrix& phi) {
  require_linear(net, phi, "dln_loss");
  return 0.5 * (net.product() - phi).squared_norm();
}

std::vector<Matrix> dln_gradients(const DeepLinearNet& net, const Matrix& phi) {
  require_linear(net, phi, "dln_gradients");
  const std::size_t L = net.depth();
  // prefix[l] = W_l ⋯ W_1 (prefix[0] = I).
  std::vector<Matrix> prefix(L + 1);
  prefix[0] = Matrix::identity(net.input_dim());
  for (std::size_t l = 0; l < L; ++l) prefix[l + 1] = net.weights[l] * prefix[l];
  const Matrix residual = prefix[L] - phi;

  std::vector<Matrix> grads(L);
  // back = (W_L ⋯ W_{l+1})ᵀ residual, built from the top down.
  Matrix back = residual;
  for (std::size_t l = L; l-- > 0;) {
    grads[l] = linalg::matmul_nt(back, prefix[l]);
    if (l > 0) back = linalg::matmul_tn(net.weights[l], back);
  }
  return grads;
}

}  // namespace lowrank::network
