// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lowrank/linalg/matrix.hpp"
#include "lowrank/linalg/rng.hpp"

namespace lowrank::regeq {

using linalg::Matrix;

// Σσ_i^p over the singular values of m.
double schatten_power(const Matrix& m, double p);

double nuclear_norm(const Matrix& m);

struct SchattenValue {
  double factor_min = 0.0;   // ½Σ‖W_l‖_F² at the balanced factorization
  double closed_form = 0.0;  // (2/L)·Σσ^{2/L}
  double balanced_form = 0.0;  // (L/2)·Σσ^{2/L}
};

// Balanced factors: W_L = U S^{1/L}, W_1 = S^{1/L} Vᵀ, inner W_l = S^{1/L},
// padded with zeros to width d_inner. Factors are listed W_1 first.
std::vector<Matrix> balanced_factorization(const Matrix& m, std::size_t depth, std::size_t d_inner);

SchattenValue variational_schatten_value(const Matrix& m, std::size_t depth, std::size_t d_inner);

struct FactorDescentOptions {
  double perturbation = 0.1;  // relative size of the random kick off the balanced point
  int max_iters = 20000;
  double grad_tol = 1e-10;
};

struct FactorDescentResult {
  double value = 0.0;                // ½Σ‖W_l‖_F²
  double constraint_residual = 0.0;  // ‖W_L⋯W_1 − M‖_F
  int iterations = 0;
  std::vector<Matrix> factors;       // W_1 first
};

// Minimizes ½Σ‖W_l‖_F² subject to W_L⋯W_1 = M by gradient descent over the
// inner factors W_1 … W_{L−1} (square, width min(m, n)) with the outer factor
// eliminated as W_L = M (W_{L−1}⋯W_1)⁻¹, so every iterate is feasible. Starts
// from a perturbed balanced factorization; wide M is handled through Mᵀ.
FactorDescentResult schatten_factor_descent(const Matrix& m, std::size_t depth, linalg::Rng& rng,
                                            const FactorDescentOptions& opts = {});

// U (S − λI)₊ Vᵀ, the minimizer of ½‖M − Φ‖_F² + λ‖M‖_*.
Matrix nuclear_prox(const Matrix& phi, double lam);

double nuclear_prox_objective(const Matrix& m, const Matrix& phi, double lam);

struct ProxCertificate {
  double min_improvement = 0.0;  // min over probes of objective(probe) − objective(prox)
  int probes = 0;
  bool pass() const { return min_improvement >= -1e-12; }
};

// Objective at the prox point against random perturbations at scales
// 1e-6 … 1 (count probes in total).
ProxCertificate nuclear_prox_certificate(const Matrix& phi, double lam, linalg::Rng& rng,
                                         int probes = 1000);

// Minimizer of ‖Y − Z‖_F² + c‖Z‖_*², computed on the singular values by the
// active-set recursion.
Matrix squared_nuclear_prox(const Matrix& y, double c);

// The recursion on a descending vector of singular values.
std::vector<double> squared_nuclear_shrink(const std::vector<double>& s, double c);

double squared_nuclear_objective(const Matrix& z, const Matrix& y, double c);

}  // namespace lowrank::regeq
