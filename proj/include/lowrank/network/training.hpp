// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lowrank/network/deep_linear_net.hpp"

namespace lowrank::network {

struct TrainConfig {
  double eta = 0.01;
  double lambda = 0.0;
  long steps = 0;
  long record_every = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class TraceKind { sv, angle_left, angle_right, align, rho_pred, act_sv };

const char* trace_kind_name(TraceKind kind);

struct TraceRow {
  std::size_t layer;
  long iter;
  TraceKind kind;
  std::size_t index;
  double value;
};

// Long-format spectrum records; CSV header `layer,iter,kind,index,value`.
class SpectrumTrace {
 public:
  void add(std::size_t layer, long iter, TraceKind kind, std::size_t index, double value);
  void add_values(std::size_t layer, long iter, TraceKind kind, const std::vector<double>& values);
  void append(const SpectrumTrace& other);

  // Rows ordered by (layer, iter, kind, index).
  std::vector<TraceRow> sorted_rows() const;
  const std::vector<TraceRow>& rows() const { return rows_; }

  // Values of one (layer, iter, kind) series ordered by index.
  std::vector<double> series(std::size_t layer, long iter, TraceKind kind) const;
  std::vector<long> iterations(std::size_t layer, TraceKind kind) const;

  void write_csv(std::ostream& out) const;

 private:
  std::vector<TraceRow> rows_;
};

struct Snapshot {
  long iter;
  std::vector<Matrix> weights;
};

struct TrainResult {
  DeepLinearNet net;
  SpectrumTrace trace;
  std::vector<Snapshot> snapshots;
  std::vector<double> losses;  // losses[t] after t steps
  bool lr_warning = false;     // loss rose during the first 10 steps
};

// One step of W_l ← (1 − ηλ) W_l − η ∇_{W_l}.
DeepLinearNet gd_step(const DeepLinearNet& net, const Matrix& phi, double eta, double lambda);

// Full-batch gradient descent on ½‖W_L⋯W_1 − Φ‖². Records singular values of
// every layer (1-based layer index) at t = 0, every record_every steps and the
// final step. Throws DivergenceError once the loss exceeds 1e12.
TrainResult train_gd(const DeepLinearNet& net, const Matrix& phi, const TrainConfig& cfg);

constexpr double kDivergenceLoss = 1e12;

}  // namespace lowrank::network
