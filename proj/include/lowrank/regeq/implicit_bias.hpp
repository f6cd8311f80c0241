// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lowrank/linalg/matrix.hpp"
#include "lowrank/linalg/rng.hpp"

namespace lowrank::regeq {

using linalg::Matrix;

struct LeastSquaresReport {
  double max_rowspan_residual = 0.0;  // max_t ‖(I − Π)(w_t − w_0)‖_max, Π the row-space projector
  double limit_error = 0.0;           // ‖w_T − (w_0 + Xᵀ(XXᵀ)⁻¹(y − Xw_0))‖_max
  double min_norm_error = 0.0;        // ‖Πw_T − Xᵀ(XXᵀ)⁻¹y‖_max
  Matrix final_w;                     // d x 1
  Matrix limit;
};

// Runs w ← w − ηXᵀ(Xw − y) from w0 on an underdetermined system (X is n x d,
// n < d, rank n). Row-span confinement is measured at every iterate.
LeastSquaresReport least_squares_bias_check(const Matrix& x, const Matrix& y, const Matrix& w0,
                                            double eta, long steps);

// Xᵀ(XXᵀ)⁻¹y.
Matrix min_norm_solution(const Matrix& x, const Matrix& y);

struct LabeledPoint {
  std::vector<double> x;
  int y = 1;
};

// Linear classification through the origin; d ≤ 3, n ≤ 6, ‖x‖ ≤ 10.
struct MarginProblem {
  std::vector<LabeledPoint> points;

  std::size_t dim() const { return points.empty() ? 0 : points.front().x.size(); }
  void validate() const;
  MarginProblem scaled(double c) const;
};

struct MaxMarginSolution {
  std::vector<double> w;          // min-norm w with y_i wᵀx_i ≥ 1
  std::vector<double> direction;  // w / ‖w‖
  double norm = 0.0;
  std::size_t candidates = 0;     // feasible active sets examined
};

// Exact solution by enumerating active sets of size ≤ d: each solves
// K α = 1 with K_ij = y_i y_j x_iᵀx_j and w = Σ α_j y_j x_j. Throws
// std::invalid_argument when the points are not separable through the origin.
MaxMarginSolution max_margin_oracle(const MarginProblem& p);

struct ExpLossOptions {
  std::size_t depth = 1;
  std::size_t width = 3;  // hidden width for depth ≥ 2
  double eta = 0.1;
  long steps = 100000;
  double init_scale = 0.02;
  double clip = 1e6;
  std::uint64_t seed = 0;
};

struct ExpLossResult {
  std::vector<double> direction;  // W_L⋯W_1 normalized to unit norm
  long separated_at = -1;         // first step with every y_i f(x_i) > 0; −1 if never
  double final_loss = 0.0;
  bool conclusive() const { return separated_at >= 0; }
};

// Gradient descent on Σ_i exp(−y_i W_L⋯W_1 x_i) with each exponential clipped
// at opts.clip. Zero init for depth 1, Gaussian(init_scale) otherwise.
// eta must not exceed 0.5 / max_i ‖x_i‖². Non-separable problems are rejected
// before training.
ExpLossResult exp_loss_trainer(const MarginProblem& p, const ExpLossOptions& opts);

// Angle in radians between two nonzero vectors.
double vector_angle(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lowrank::regeq
