// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "lowrank/linalg/matrix.hpp"
#include "lowrank/linalg/rng.hpp"

namespace lowrank::adapters {

using linalg::Matrix;

enum class LoraVariant { vanilla, plus, deep };

// Frozen base W̄ (m x n) plus a trainable low-rank update.
//   vanilla / plus: W = W̄ + B A with B (m x r), A (r x n)
//   deep:           W = W̄ + C B A with C (m x r), B (r x r), A (r x n)
// gamma is the LoRA+ rate multiplier on B, or the slow rate multiplier on
// the outer factors C and A for deep adapters.
struct LoraAdapter {
  Matrix base;
  Matrix c;  // deep only
  Matrix b;
  Matrix a;
  LoraVariant variant = LoraVariant::vanilla;
  double gamma = 1.0;

  std::size_t rank() const { return a.rows(); }
  Matrix delta() const;
  Matrix effective_weight() const { return base + delta(); }
};

struct LoraGradients {
  Matrix c;  // empty unless deep
  Matrix b;
  Matrix a;
};

// B = 0, A ~ N(0, 1/n). Variant plus requires gamma > 0.
LoraAdapter lora_init(const Matrix& base, std::size_t r, linalg::Rng& rng,
                      LoraVariant variant = LoraVariant::vanilla, double gamma = 1.0);

// Chain rule from the gradient with respect to the effective weight.
LoraGradients lora_factor_gradients(const LoraAdapter& adapter, const Matrix& grad_w);

// vanilla: B −= η∇B, A −= η∇A
// plus:    B −= γη∇B, A −= η∇A
// deep:    B −= η∇B, C −= γη∇C, A −= γη∇A
LoraAdapter lora_step(const LoraAdapter& adapter, const Matrix& grad_w, double eta);

enum class GradientSubspace { top, bottom };

struct DeepLoraOptions {
  double eps = 1e-3;
  double gamma_outer = 1e-2;
  GradientSubspace subspace = GradientSubspace::top;
};

// C = ε·(r left singular vectors of grad_at_init), A = ε·(matching right
// vectors)ᵀ, B = ε·I_r. Singular directions with zero singular value are
// replaced by random orthonormal directions outside the gradient's range.
LoraAdapter deep_lora_init(const Matrix& base, std::size_t r, const Matrix& grad_at_init,
                           linalg::Rng& rng, const DeepLoraOptions& opts = {});

// Synthetic fine-tuning task ½‖W_eff − T‖² with T = W̄ + Δ + N: Δ has rank
// true_rank, N is small dense noise.
struct LoraTaskConfig {
  std::size_t d = 64;
  std::size_t r = 8;
  std::size_t true_rank = 2;
  double noise = 0.05;
  double eta = 0.1;           // vanilla LoRA rate
  double deep_eta = 0.5;      // deep LoRA inner rate
  double gamma_outer = 1e-2;
  double eps = 1e-3;
  long steps = 10000;
  double rank_tol = 1e-6;
  std::uint64_t seed = 0;
};

struct LoraTask {
  Matrix base;
  Matrix signal;  // Δ
  Matrix target;  // T
};

LoraTask make_lora_task(const LoraTaskConfig& cfg);

struct LoraTaskResult {
  std::size_t vanilla_rank = 0;
  std::size_t deep_rank = 0;
  double vanilla_loss = 0.0;
  double deep_loss = 0.0;
  double deep_signal_error = 0.0;  // ‖CBA − Δ‖_F
  std::vector<double> vanilla_spectrum;
  std::vector<double> deep_spectrum;
};

LoraTaskResult run_lora_rank_experiment(const LoraTaskConfig& cfg);

}  // namespace lowrank::adapters
