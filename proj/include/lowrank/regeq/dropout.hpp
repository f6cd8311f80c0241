// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "lowrank/linalg/matrix.hpp"
#include "lowrank/linalg/rng.hpp"

namespace lowrank::regeq {

using linalg::Matrix;

// One-hidden-layer linear model Y ≈ W₂ W₁ X trained with dropout on the
// d_h hidden units, keep probability mu.
struct DropoutProblem {
  Matrix x;  // d x n
  Matrix y;  // k x n
  std::size_t d_h = 1;
  double mu = 1.0;

  void validate() const;
  void validate_factors(const Matrix& w1, const Matrix& w2) const;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Sample mean and standard error of ‖Y − (1/μ) W₂ Diag(z) W₁ X‖_F² over
// n_samples fresh Bernoulli(μ) masks.
MonteCarloEstimate dropout_mc_objective(const DropoutProblem& p, const Matrix& w1, const Matrix& w2,
                                        std::size_t n_samples, linalg::Rng& rng);

// ‖Y − W₂W₁X‖_F² + ((1−μ)/μ)·Σ_i ‖(W₂)_{:,i}‖²·‖Xᵀ(W₁)_{i,:}‖².
double dropout_deterministic_objective(const DropoutProblem& p, const Matrix& w1, const Matrix& w2);

// Weight on ‖Z‖_*² that makes the factorized problem (X = I) equal to the
// squared-nuclear problem: (1−μ)/(μ·d_h).
double dropout_nuclear_weight(const DropoutProblem& p);

struct DropoutEquivalenceOptions {
  int restarts = 20;
  int steps = 20000;
  double init_scale = 0.5;
  std::uint64_t seed = 0;
};

struct DropoutEquivalenceReport {
  double factor_objective = 0.0;  // best deterministic objective over restarts
  double prox_objective = 0.0;    // ‖Y − Z*‖² + c‖Z*‖_*² at the prox solution
  double objective_gap = 0.0;     // factor_objective − prox_objective
  double frobenius_gap = 0.0;     // ‖W₂W₁ − Z*‖_F for the best restart
  double nuclear_weight = 0.0;    // c used for the prox side
  Matrix product;                 // best W₂W₁
  Matrix prox;                    // Z*
};

// Gradient descent on the deterministic objective from several random
// starts (X must be the identity), compared against
// squared_nuclear_prox(Y, c) with c = nuclear_weight. A negative
// nuclear_weight selects dropout_nuclear_weight(p).
DropoutEquivalenceReport dropout_global_equivalence(const DropoutProblem& p,
                                                    const DropoutEquivalenceOptions& opts = {},
                                                    double nuclear_weight = -1.0);

}  // namespace lowrank::regeq
