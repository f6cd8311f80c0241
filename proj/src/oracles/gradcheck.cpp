// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/oracles/gradcheck.hpp"

#include <cmath>
#include <limits>

#include "lowrank/oracles/finite_difference.hpp"

namespace lowrank::oracles {

using network::DeepLinearNet;

namespace {

std::size_t draw(linalg::Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.next() % (hi - lo + 1));
}

DeepLinearNet random_net(linalg::Rng& rng, std::size_t depth, std::size_t in, std::size_t out) {
  DeepLinearNet net;
  std::size_t prev = in;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t rows = l + 1 == depth ? out : draw(rng, 2, 6);
    net.weights.push_back(rng.gaussian_matrix(rows, prev, 1.0 / std::sqrt(double(prev))));
    prev = rows;
  }
  return net;
}

}  // namespace

GradcheckOutcome dln_gradcheck(linalg::Rng& rng, double h) {
  const std::size_t depth = draw(rng, 1, 4);
  const std::size_t d = draw(rng, 1, 6);
  const std::size_t k = draw(rng, 1, 6);
  DeepLinearNet net = random_net(rng, depth, d, k);
  const Matrix phi = rng.gaussian_matrix(k, d);
  const auto analytic = network::dln_gradients(net, phi);
  const auto numeric = finite_difference_gradient(
      [&](const std::vector<Matrix>& ws) {
        DeepLinearNet probe = net;
        probe.weights = ws;
        return network::dln_loss(probe, phi);
      },
      net.weights, h);
  return {relative_error(analytic, numeric), 0};
}

GradcheckOutcome mlp_gradcheck(linalg::Rng& rng, network::Activation act, network::LossKind loss,
                               double h, double kink_margin) {
  GradcheckOutcome outcome;
  for (;;) {
    const std::size_t depth = draw(rng, 2, 4);
    const std::size_t d = draw(rng, 2, 6);
    const std::size_t k = draw(rng, 2, 5);
    const std::size_t n = draw(rng, 2, 6);
    DeepLinearNet net = random_net(rng, depth, d, k);
    net.activation = act;
    Matrix x = rng.gaussian_matrix(d, n);
    x += rng.gaussian_matrix(d, n, 1e-4);
    Matrix y(k, n);
    if (loss == network::LossKind::mse) {
      y = rng.gaussian_matrix(k, n);
    } else {
      for (std::size_t j = 0; j < n; ++j) y(rng.next() % k, j) = 1.0;
    }
    std::vector<Matrix> masks;
    const bool dropout = rng.bernoulli(0.5);
    if (dropout) {
      net.dropout_keep.assign(depth - 1, rng.uniform(0.3, 1.0));
      masks = network::sample_dropout_masks(net, n, rng);
    }
    const auto* mask_ptr = dropout ? &masks : nullptr;
    const auto pass = network::mlp_forward_backward(net, x, y, loss, mask_ptr);
    if (act == network::Activation::relu) {
      double closest = std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l + 1 < pass.preactivations.size(); ++l)
        for (double z : pass.preactivations[l].data()) closest = std::min(closest, std::abs(z));
      if (closest < kink_margin) {
        ++outcome.resamples;
        continue;
      }
    }
    const auto numeric = finite_difference_gradient(
        [&](const std::vector<Matrix>& ws) {
          DeepLinearNet probe = net;
          probe.weights = ws;
          return network::mlp_forward_backward(probe, x, y, loss, mask_ptr).loss;
        },
        net.weights, h);
    outcome.relative_error = relative_error(pass.grads, numeric);
    return outcome;
  }
}

}  // namespace lowrank::oracles
