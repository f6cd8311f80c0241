// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/network/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "lowrank/errors.hpp"
#include "lowrank/linalg/decompositions.hpp"

namespace lowrank::network {

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("TrainConfig: eta must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
  if (steps < 0) throw std::invalid_argument("TrainConfig: steps must be >= 0");
  if (record_every < 1) throw std::invalid_argument("TrainConfig: record_every must be >= 1");
}

const char* trace_kind_name(TraceKind kind) {
  switch (kind) {
    case TraceKind::sv: return "sv";
    case TraceKind::angle_left: return "angle_left";
    case TraceKind::angle_right: return "angle_right";
    case TraceKind::align: return "align";
    case TraceKind::rho_pred: return "rho_pred";
    case TraceKind::act_sv: return "act_sv";
  }
  return "unknown";
}

void SpectrumTrace::add(std::size_t layer, long iter, TraceKind kind, std::size_t index,
                        double value) {
  rows_.push_back({layer, iter, kind, index, value});
}

void SpectrumTrace::add_values(std::size_t layer, long iter, TraceKind kind,
                               const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) add(layer, iter, kind, i, values[i]);
}

void SpectrumTrace::append(const SpectrumTrace& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::vector<TraceRow> SpectrumTrace::sorted_rows() const {
  std::vector<TraceRow> out = rows_;
  std::stable_sort(out.begin(), out.end(), [](const TraceRow& a, const TraceRow& b) {
    return std::tie(a.layer, a.iter, a.kind, a.index) < std::tie(b.layer, b.iter, b.kind, b.index);
  });
  return out;
}

std::vector<double> SpectrumTrace::series(std::size_t layer, long iter, TraceKind kind) const {
  std::vector<std::pair<std::size_t, double>> hits;
  for (const auto& r : rows_)
    if (r.layer == layer && r.iter == iter && r.kind == kind) hits.emplace_back(r.index, r.value);
  std::stable_sort(hits.begin(), hits.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> values;
  for (const auto& h : hits) values.push_back(h.second);
  return values;
}

std::vector<long> SpectrumTrace::iterations(std::size_t layer, TraceKind kind) const {
  std::vector<long> iters;
  for (const auto& r : rows_)
    if (r.layer == layer && r.kind == kind) iters.push_back(r.iter);
  std::sort(iters.begin(), iters.end());
  iters.erase(std::unique(iters.begin(), iters.end()), iters.end());
  return iters;
}

void SpectrumTrace::write_csv(std::ostream& out) const {
  out << "layer,iter,kind,index,value\n";
  char buf[64];
  for (const auto& r : sorted_rows()) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << r.layer << ',' << r.iter << ',' << trace_kind_name(r.kind) << ',' << r.index << ','
        << buf << '\n';
  }
}

DeepLinearNet gd_step(const DeepLinearNet& net, const Matrix& phi, double eta, double lambda) {
  const std::vector<Matrix> grads = dln_gradients(net, phi);
  const double decay = 1.0 - eta * lambda;
  DeepLinearNet next = net;
  for (std::size_t l = 0; l < next.depth(); ++l) {
    auto& w = next.weights[l].data();
    const auto& g = grads[l].data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = decay * w[k] - eta * g[k];
  }
  return next;
}

namespace {

void record(TrainResult& res, long iter) {
  for (std::size_t l = 0; l < res.net.depth(); ++l) {
    res.trace.add_values(l + 1, iter, TraceKind::sv, linalg::singular_values(res.net.weights[l]));
  }
  res.snapshots.push_back({iter, res.net.weights});
}

}  // namespace

TrainResult train_gd(const DeepLinearNet& net, const Matrix& phi, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult res;
  res.net = net;
  res.losses.push_back(dln_loss(net, phi));
  record(res, 0);
  for (long t = 1; t <= cfg.steps; ++t) {
    res.net = gd_step(res.net, phi, cfg.eta, cfg.lambda);
    const double loss = dln_loss(res.net, phi);
    if (!std::isfinite(loss) || loss > kDivergenceLoss) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", loss);
      throw DivergenceError("train_gd: loss " + std::string(buf) + " at step " + std::to_string(t) +
                                " exceeds divergence threshold",
                            t, loss);
    }
    if (t <= 10 && loss > res.losses.back()) res.lr_warning = true;
    res.losses.push_back(loss);
    if (t % cfg.record_every == 0 || t == cfg.steps) record(res, t);
  }
  return res;
}

}  // namespace lowrank::network
