// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/network/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lowrank/errors.hpp"
#include "lowrank/linalg/decompositions.hpp"

namespace lowrank::network {

using linalg::max_principal_angle;
using linalg::orthonormal_basis;

SubspacePair construct_null_intersection(const Matrix& phi, const Matrix& w1, const Matrix& w2,
                                         std::size_t r) {
  return construct_null_intersection(phi, {w1, w2}, r, 1).front();
}

std::vector<SubspacePair> construct_null_intersection(const Matrix& phi,
                                                      const std::vector<Matrix>& weights,
                                                      std::size_t r, std::size_t layers) {
  if (weights.empty()) throw std::invalid_argument("construct_null_intersection: no layers");
  const std::size_t d = weights.front().cols();
  const Matrix product = linalg::chain_product(weights, 0, weights.size());
  if (product.rows() != phi.rows() || product.cols() != phi.cols()) {
    throw std::invalid_argument("construct_null_intersection: target shape mismatch");
  }
  const Matrix stacked = linalg::vstack(phi, linalg::matmul_tn(phi, product));
  Matrix v = linalg::nullspace(stacked);
  const std::size_t need = d > 2 * r ? d - 2 * r : 0;
  if (v.cols() < need) {
    throw NumericalError("construct_null_intersection: intersection has " +
                         std::to_string(v.cols()) + " columns, fewer than d - 2r = " +
                         std::to_string(need));
  }
  const std::size_t count = layers == 0 ? weights.size() : layers;
  std::vector<SubspacePair> pairs;
  for (std::size_t l = 0; l < count; ++l) {
    Matrix u = v.cols() == 0 ? Matrix(weights[l].rows(), 0) : orthonormal_basis(weights[l] * v);
    if (u.cols() != v.cols()) {
      throw NumericalError("construct_null_intersection: layer " + std::to_string(l + 1) +
                           " collapses the invariant subspace");
    }
    pairs.push_back({u, v});
    v = u;
  }
  return pairs;
}

std::vector<std::vector<double>> simulate_rho(const std::vector<double>& eps, double eta,
                                              double lambda, long steps) {
  std::vector<std::vector<double>> rho(static_cast<std::size_t>(steps) + 1);
  rho[0] = eps;
  for (long t = 1; t <= steps; ++t) {
    const auto& prev = rho[static_cast<std::size_t>(t - 1)];
    auto& cur = rho[static_cast<std::size_t>(t)];
    cur.resize(prev.size());
    for (std::size_t l = 0; l < prev.size(); ++l) {
      double others = 1.0;
      for (std::size_t k = 0; k < prev.size(); ++k)
        if (k != l) others *= prev[k] * prev[k];
      cur[l] = prev[l] * (1.0 - eta * lambda - eta * others);
    }
  }
  return rho;
}

namespace {

struct BlockView {
  std::size_t start = 0;
  double spread = 0.0;
  std::vector<double> values;
  Matrix u;
  Matrix v;
  bool degenerate = false;
};

BlockView locate_block(const Matrix& w, std::size_t nb) {
  const linalg::SvdResult f = linalg::svd(w);
  const std::size_t k = f.s.size();
  if (nb == 0 || nb > k) throw std::invalid_argument("verify_invariant_subspaces: bad block size");
  BlockView b;
  b.spread = std::numeric_limits<double>::infinity();
  for (std::size_t start = k - nb + 1; start-- > 0;) {
    const double spread = f.s[start] - f.s[start + nb - 1];
    if (spread < b.spread) {
      b.spread = spread;
      b.start = start;
    }
  }
  b.values.assign(f.s.begin() + static_cast<std::ptrdiff_t>(b.start),
                  f.s.begin() + static_cast<std::ptrdiff_t>(b.start + nb));
  const double inf = std::numeric_limits<double>::infinity();
  const double gap_above = b.start > 0 ? f.s[b.start - 1] - f.s[b.start] : inf;
  const double gap_below = b.start + nb < k ? f.s[b.start + nb - 1] - f.s[b.start + nb] : inf;
  b.degenerate = std::min(gap_above, gap_below) <= 1e-10 * f.s[0];
  b.u = f.u.col_range(b.start, nb);
  b.v = f.v.col_range(b.start, nb);
  return b;
}

}  // namespace

VerificationReport verify_invariant_subspaces(const SpectrumTrace& trace,
                                              const std::vector<Snapshot>& snapshots,
                                              const Matrix& phi, const InvariantCheckConfig& cfg) {
  if (snapshots.empty()) throw std::invalid_argument("verify_invariant_subspaces: no snapshots");
  const auto& w0 = snapshots.front().weights;
  const std::size_t L = w0.size();
  if (cfg.eps.size() != L) throw std::invalid_argument("verify_invariant_subspaces: eps size");
  const std::size_t checked = cfg.wide ? L - 1 : L;
  const std::size_t d = w0.front().cols();
  if (d <= 2 * cfg.r) throw std::invalid_argument("verify_invariant_subspaces: need d > 2r");
  const std::size_t nb = d - 2 * cfg.r;

  const auto refs = construct_null_intersection(phi, w0, cfg.r, checked);
  const long last_iter = snapshots.back().iter;
  const auto rho = simulate_rho(cfg.eps, cfg.eta, cfg.lambda, last_iter);

  VerificationReport rep;
  rep.trace = trace;
  for (const auto& snap : snapshots) {
    const long t = snap.iter;
    std::vector<BlockView> blocks;
    for (std::size_t l = 0; l < checked; ++l) {
      const Matrix& w = snap.weights[l];
      BlockView b = locate_block(w, nb);
      InvariantEntry e{};
      e.layer = l + 1;
      e.iter = t;
      e.block_start = b.start;
      e.spread = b.spread;
      if (b.degenerate) {
        // Every subspace is singular for a flat spectrum; test that the
        // reference pair is mapped onto itself instead.
        e.angle_left = max_principal_angle(orthonormal_basis(w * refs[l].v), refs[l].u);
        e.angle_right =
            max_principal_angle(orthonormal_basis(linalg::matmul_tn(w, refs[l].u)), refs[l].v);
        b.u = refs[l].u;
        b.v = refs[l].v;
      } else {
        e.angle_left = max_principal_angle(b.u, refs[l].u);
        e.angle_right = max_principal_angle(b.v, refs[l].v);
      }
      double sum = 0.0;
      for (double x : b.values) sum += x;
      e.rho_measured = sum / static_cast<double>(b.values.size());
      e.rho_closed_form = cfg.eps[l] * std::pow(1.0 - cfg.eta * cfg.lambda, static_cast<double>(t));
      e.rho_recursion = cfg.wide ? e.rho_closed_form : rho[static_cast<std::size_t>(t)][l];
      e.rho_error = 0.0;
      double cf_error = 0.0;
      for (double x : b.values) {
        e.rho_error = std::max(e.rho_error, std::abs(x - e.rho_recursion));
        cf_error = std::max(cf_error, std::abs(x - e.rho_closed_form));
      }
      e.align = -1.0;
      rep.max_spread = std::max(rep.max_spread, e.spread);
      rep.max_angle_left = std::max(rep.max_angle_left, e.angle_left);
      rep.max_angle_right = std::max(rep.max_angle_right, e.angle_right);
      rep.max_rho_error = std::max(rep.max_rho_error, e.rho_error);
      rep.max_closed_form_error = std::max(rep.max_closed_form_error, cf_error);
      rep.trace.add(e.layer, t, TraceKind::angle_left, 0, e.angle_left);
      rep.trace.add(e.layer, t, TraceKind::angle_right, 0, e.angle_right);
      rep.trace.add(e.layer, t, TraceKind::rho_pred, 0, e.rho_recursion);
      rep.trace.add(e.layer, t, TraceKind::rho_pred, 1, e.rho_closed_form);
      rep.entries.push_back(e);
      blocks.push_back(std::move(b));
    }
    const std::size_t first = rep.entries.size() - checked;
    for (std::size_t l = 0; l + 1 < checked; ++l) {
      const double a = max_principal_angle(blocks[l + 1].v, blocks[l].u);
      rep.entries[first + l].align = a;
      rep.max_align = std::max(rep.max_align, a);
      rep.trace.add(l + 1, t, TraceKind::align, 0, a);
    }
  }
  const auto& th = cfg.thresholds;
  rep.spread_ok = rep.max_spread <= th.spread;
  rep.angle_ok = rep.max_angle_left <= th.angle && rep.max_angle_right <= th.angle;
  rep.align_ok = rep.max_align <= th.align;
  rep.rho_ok = rep.max_rho_error <= th.rho;
  return rep;
}

}  // namespace lowrank::network
