// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "lowrank/network/training.hpp"

namespace lowrank::network {

struct SubspacePair {
  Matrix u;  // left basis, orthonormal columns
  Matrix v;  // right basis, orthonormal columns
};

// Two-layer form: V₁ = N(Φ) ∩ N(Φᵀ W₂ W₁), U₁ = orth(W₁ V₁).
SubspacePair construct_null_intersection(const Matrix& phi, const Matrix& w1, const Matrix& w2,
                                         std::size_t r);

// Depth-L form: V₁ = N(Φ) ∩ N(Φᵀ W_L⋯W₁), U_l = orth(W_l V_l), V_{l+1} = U_l.
// Returns one pair per layer in `layers` (all layers if 0). Throws
// NumericalError when the intersection has fewer than d − 2r columns.
std::vector<SubspacePair> construct_null_intersection(const Matrix& phi,
                                                      const std::vector<Matrix>& weights,
                                                      std::size_t r, std::size_t layers = 0);

struct InvariantThresholds {
  double spread = 1e-8;
  double angle = 1e-6;
  double align = 1e-6;
  double rho = 1e-8;
};

struct InvariantCheckConfig {
  std::size_t r = 0;
  std::vector<double> eps;  // initial scale per layer
  double eta = 0.0;
  double lambda = 0.0;
  // Output dimension k < d: only layers 1..L−1 carry the block and the
  // repeated value is compared with eps·(1 − ηλ)^t.
  bool wide = false;
  InvariantThresholds thresholds;
};

struct InvariantEntry {
  std::size_t layer;  // 1-based
  long iter;
  std::size_t block_start;    // index of the first repeated singular value
  double spread;              // max − min over the repeated block
  double angle_left;          // block left subspace vs reference
  double angle_right;         // block right subspace vs reference
  double align;               // V_{l+1} block vs U_l block; negative when not applicable
  double rho_measured;        // mean of the block
  double rho_recursion;       // simulated recursion
  double rho_closed_form;     // eps·(1 − ηλ)^t
  double rho_error;           // max |σ_i − predicted| over the block
};

struct VerificationReport {
  std::vector<InvariantEntry> entries;
  SpectrumTrace trace;  // input trace plus angle/align/rho rows
  double max_spread = 0.0;
  double max_angle_left = 0.0;
  double max_angle_right = 0.0;
  double max_align = 0.0;
  double max_rho_error = 0.0;
  double max_closed_form_error = 0.0;
  bool spread_ok = false;
  bool angle_ok = false;
  bool align_ok = false;
  bool rho_ok = false;

  bool pass() const { return spread_ok && angle_ok && align_ok && rho_ok; }
};

// Checks the repeated-singular-value structure along a recorded trajectory.
// The repeated block is located as the window of d − 2r consecutive sorted
// singular values with the smallest spread; reference subspaces come from
// construct_null_intersection on the t = 0 snapshot.
VerificationReport verify_invariant_subspaces(const SpectrumTrace& trace,
                                              const std::vector<Snapshot>& snapshots,
                                              const Matrix& phi, const InvariantCheckConfig& cfg);

// ρ_l(t) = ρ_l(t−1)(1 − ηλ − η ∏_{k≠l} ρ_k(t−1)²), ρ_l(0) = eps_l; returns [t][l].
std::vector<std::vector<double>> simulate_rho(const std::vector<double>& eps, double eta,
                                              double lambda, long steps);

}  // namespace lowrank::network
