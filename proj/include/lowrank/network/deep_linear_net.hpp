// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lowrank/linalg/matrix.hpp"
#include "lowrank/linalg/rng.hpp"

namespace lowrank::network {

using linalg::Matrix;

enum class Activation { identity, relu };

// W_L σ(W_{L-1} σ(... σ(W_1 x))). weights[l] is W_{l+1} with shape d_{l+1} x d_l.
struct DeepLinearNet {
  std::vector<Matrix> weights;
  Activation activation = Activation::identity;
  // Keep probability per hidden layer (size L-1), or empty for no dropout.
  std::vector<double> dropout_keep;

  std::size_t depth() const { return weights.size(); }
  std::size_t input_dim() const { return weights.front().cols(); }
  std::size_t output_dim() const { return weights.back().rows(); }

  // Throws std::invalid_argument on broken dimension chains or bad keep values.
  void validate() const;

  // W_L ... W_1.
  Matrix product() const;

  // Inference pass (no dropout) on the columns of x.
  Matrix forward(const Matrix& x) const;
};

struct TargetSpec {
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t r = 0;
  std::uint64_t seed = 0;
};

// Φ = G₁ G₂ / √r with Gaussian G₁ (k x r) and G₂ (r x d).
Matrix make_low_rank_target(const TargetSpec& spec);

// L layers of size d x d, except the last which is k x d; W_l built from a
// d x d random scaled orthogonal matrix with scale eps[l] (last layer keeps
// its first k rows).
DeepLinearNet make_orthogonal_dln(std::size_t d, std::size_t k, const std::vector<double>& eps,
                                  linalg::Rng& rng);

// ½‖W_L⋯W_1 − Φ‖_F².
double dln_loss(const DeepLinearNet& net, const Matrix& phi);

// ∇_{W_l} = (W_L⋯W_{l+1})ᵀ (W_L⋯W_1 − Φ) (W_{l-1}⋯W_1)ᵀ.
std::vector<Matrix> dln_gradients(const DeepLinearNet& net, const Matrix& phi);

}  // namespace lowrank::network
