// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lowrank/network/training.hpp"

namespace lowrank::network {

enum class LossKind { mse, cross_entropy };

struct MlpPass {
  double loss = 0.0;
  std::vector<Matrix> grads;           // one per layer
  std::vector<Matrix> hidden;          // post-activation (masked, rescaled) per hidden layer
  std::vector<Matrix> preactivations;  // per layer, including the output layer
};

// Columns of x (d x n) are samples; y is k x n.
//   mse:           ½‖f(X) − Y‖_F² / n
//   cross_entropy: −(1/n) Σ_j Σ_i y_ij log softmax(f(x_j))_i, max-subtracted
// Masks (one 0/1 matrix per hidden layer) multiply hidden activations by
// mask / μ_l using net.dropout_keep.
MlpPass mlp_forward_backward(const DeepLinearNet& net, const Matrix& x, const Matrix& y,
                             LossKind loss, const std::vector<Matrix>* masks = nullptr);

// Bernoulli(μ_l) masks shaped like the hidden activations for n samples.
std::vector<Matrix> sample_dropout_masks(const DeepLinearNet& net, std::size_t n,
                                         linalg::Rng& rng);

struct DropoutRankConfig {
  std::size_t d = 20;            // input and hidden width
  std::size_t hidden_layers = 2;
  std::size_t k = 20;            // output width
  std::size_t target_rank = 15;
  std::size_t n = 256;
  double mu = 0.4;
  double eta = 0.01;
  long steps = 2000;
  long record_every = 100;
  double rank_tol = 1e-6;
  std::uint64_t seed = 0;
};

struct DropoutRankResult {
  std::vector<long> iters;
  std::vector<std::size_t> ranks;  // numerical rank of the last hidden activations
  std::vector<double> losses;      // dropout-free training loss at each record
  SpectrumTrace trace;             // act_sv rows, layer = last hidden layer index
  std::size_t initial_rank = 0;
  std::size_t final_rank = 0;
};

// ReLU MLP regression on Y = T X with a rank-limited linear T (unit spectral
// norm) and Gaussian X, trained by full-batch GD on the mse loss with fresh
// dropout masks every step. Activation ranks are measured without dropout.
DropoutRankResult run_dropout_rank_experiment(const DropoutRankConfig& cfg);

}  // namespace lowrank::network
