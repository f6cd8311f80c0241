// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "lowrank/linalg/matrix.hpp"
#include "lowrank/linalg/rng.hpp"

namespace lowrank::optim {

using linalg::Matrix;

struct AdamState {
  Matrix m;
  Matrix v;
  long t = 0;  // completed steps
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_stab = 1e-8;
};

// Advances the moments with g and returns N = M̂ / (√V̂ + ε). Bias correction
// uses the step count after the increment, so the first step divides by 1 − β.
// Moments are allocated on first use.
Matrix adam_direction(AdamState& state, const Matrix& g);

std::pair<Matrix, AdamState> adam_step(const Matrix& w, const Matrix& grad, const AdamState& state,
                                       double eta);

enum class ProjectionSide { left, right, two_sided };

struct GaloreState {
  Matrix p;  // m x r, left projector
  Matrix q;  // n x r, right projector
  std::size_t rank = 1;
  long period = 1;
  double alpha = 1.0;
  long t = 0;  // counts from 0; refresh when t mod period = 0
  bool two_sided = false;
  std::optional<AdamState> inner;  // empty = GD mode
};

GaloreState galore_init(std::size_t r, long period, double alpha = 1.0, bool adam = false,
                        bool two_sided = false);

// Left projection when m ≤ n, right projection otherwise; both when two_sided.
ProjectionSide galore_side(const GaloreState& state, std::size_t m, std::size_t n);

// Descent form: W ← W − η·α·P·N with N the (Adam-transformed) projected gradient.
std::pair<Matrix, GaloreState> galore_step(const Matrix& w, const Matrix& grad,
                                           const GaloreState& state, double eta);

using GradFn = std::function<Matrix(const Matrix&)>;

struct ReloraState {
  Matrix merged;
  Matrix b;  // m x r, frozen between resets
  Matrix a;  // r x n
  std::size_t rank = 1;
  long period = 1;
  bool random_b = false;  // Gaussian reinit instead of gradient SVD
  std::optional<AdamState> inner;

  Matrix effective() const;
};

ReloraState relora_init(const Matrix& w0, std::size_t r, long period, bool adam = false,
                        bool random_b = false);

// At t mod T = 0: merged += B·A, B ← top-r left singular vectors of
// grad_fn(merged), A ← 0. Every step then takes A ← A − η·Bᵀ∇_W (Adam-
// transformed in Adam mode). rng is required when random_b is set.
ReloraState relora_step(const ReloraState& state, const GradFn& grad_fn, double eta, long t,
                        linalg::Rng* rng = nullptr);

// φ(W) = ½ tr((W − Φ)ᵀ A (W − Φ)) with A symmetric positive definite.
struct QuadraticProblem {
  Matrix a;
  Matrix phi;
  Matrix w0;

  double loss(const Matrix& w) const;
  Matrix gradient(const Matrix& w) const;
};

// A = Q diag(λ) Qᵀ with λ ~ U(0.5, 1.5); Φ and W⁽⁰⁾ standard Gaussian.
QuadraticProblem make_quadratic_problem(std::size_t m, std::size_t n, linalg::Rng& rng);

struct EquivalenceConfig {
  std::size_t r = 2;
  long period = 5;
  double eta = 0.1;
  long steps = 15;
  bool adam = false;
  bool random_b = false;
  std::uint64_t seed = 0;  // random-B draws
};

struct EquivalenceReport {
  double max_deviation = 0.0;      // max_t ‖W_galore − W_relora‖_max
  double max_subspace_angle = 0.0;  // max_t angle(span P, span B)
  double tolerance = 0.0;           // 1e−10·(1 + ‖W⁽⁰⁾‖_max)
  bool pass() const { return max_deviation <= tolerance && max_subspace_angle <= 1e-8; }
};

EquivalenceReport verify_galore_relora_equivalence(const QuadraticProblem& problem,
                                                   const EquivalenceConfig& cfg);

struct MemoryReport {
  std::string layer;
  std::size_t full_adam_floats = 0;
  std::size_t galore_floats = 0;
  double ratio = 0.0;  // galore / full
};

// Full Adam keeps 2mn floats; GaLore-Adam keeps two r-wide moments along the
// long side plus the projector along the short side.
MemoryReport galore_memory(const std::string& layer, std::size_t m, std::size_t n, std::size_t r);

std::string memory_report_json(const std::vector<MemoryReport>& layers);

}  // namespace lowrank::optim
