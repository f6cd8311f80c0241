// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/adapters/lora.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lowrank/errors.hpp"
#include "lowrank/linalg/decompositions.hpp"

namespace lowrank::adapters {

using linalg::matmul_nt;
using linalg::matmul_tn;

Matrix LoraAdapter::delta() const {
  if (variant == LoraVariant::deep) return c * (b * a);
  return b * a;
}

LoraAdapter lora_init(const Matrix& base, std::size_t r, linalg::Rng& rng, LoraVariant variant,
                      double gamma) {
  if (variant == LoraVariant::deep) {
    throw std::invalid_argument("lora_init: use deep_lora_init for deep adapters");
  }
  if (r < 1 || r >= std::min(base.rows(), base.cols())) {
    throw std::invalid_argument("lora_init: need 1 <= r < d");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("lora_init: gamma must be > 0");
  LoraAdapter ad;
  ad.base = base;
  ad.variant = variant;
  ad.gamma = gamma;
  ad.b = Matrix(base.rows(), r);
  ad.a = rng.gaussian_matrix(r, base.cols(), 1.0 / std::sqrt(static_cast<double>(base.cols())));
  return ad;
}

LoraGradients lora_factor_gradients(const LoraAdapter& ad, const Matrix& grad_w) {
  if (grad_w.rows() != ad.base.rows() || grad_w.cols() != ad.base.cols()) {
    throw std::invalid_argument("lora_factor_gradients: gradient shape " + grad_w.shape_string() +
                                " does not match base " + ad.base.shape_string());
  }
  LoraGradients g;
  if (ad.variant == LoraVariant::deep) {
    const Matrix ba = ad.b * ad.a;
    const Matrix cb = ad.c * ad.b;
    g.c = matmul_nt(grad_w, ba);
    g.b = matmul_nt(matmul_tn(ad.c, grad_w), ad.a);
    g.a = matmul_tn(cb, grad_w);
  } else {
    g.b = matmul_nt(grad_w, ad.a);
    g.a = matmul_tn(ad.b, grad_w);
  }
  return g;
}

namespace {

void descend(Matrix& w, const Matrix& g, double rate) {
  for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= rate * g.data()[i];
}

}  // namespace

LoraAdapter lora_step(const LoraAdapter& adapter, const Matrix& grad_w, double eta) {
  const LoraGradients g = lora_factor_gradients(adapter, grad_w);
  LoraAdapter next = adapter;
  switch (adapter.variant) {
    case LoraVariant::vanilla:
      descend(next.b, g.b, eta);
      descend(next.a, g.a, eta);
      break;
    case LoraVariant::plus:
      descend(next.b, g.b, adapter.gamma * eta);
      descend(next.a, g.a, eta);
      break;
    case LoraVariant::deep:
      descend(next.b, g.b, eta);
      descend(next.c, g.c, adapter.gamma * eta);
      descend(next.a, g.a, adapter.gamma * eta);
      break;
  }
  return next;
}

namespace {

// Columns `pick` of `basis`; columns listed in `fill` are replaced by random
// unit vectors orthogonal to every column of `avoid` and to each other.
Matrix select_columns(const Matrix& basis, const std::vector<std::size_t>& pick,
                      const std::vector<bool>& fill, const Matrix& avoid, linalg::Rng& rng) {
  const std::size_t m = basis.rows();
  Matrix out(m, pick.size());
  std::vector<std::vector<double>> taken;
  for (std::size_t j = 0; j < avoid.cols(); ++j) taken.push_back(avoid.col(j));
  for (std::size_t k = 0; k < pick.size(); ++k) {
    if (!fill[k]) {
      for (std::size_t i = 0; i < m; ++i) out(i, k) = basis(i, pick[k]);
      continue;
    }
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100) throw NumericalError("deep_lora_init: cannot complete subspace");
      std::vector<double> w(m);
      for (double& x : w) x = rng.gaussian();
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& t : taken) {
          double proj = 0.0;
          for (std::size_t i = 0; i < m; ++i) proj += t[i] * w[i];
          for (std::size_t i = 0; i < m; ++i) w[i] -= proj * t[i];
        }
      }
      double nw = 0.0;
      for (double x : w) nw += x * x;
      nw = std::sqrt(nw);
      if (nw < 1e-6) continue;
      for (double& x : w) x /= nw;
      for (std::size_t i = 0; i < m; ++i) out(i, k) = w[i];
      taken.push_back(std::move(w));
      break;
    }
  }
  return out;
}

}  // namespace

LoraAdapter deep_lora_init(const Matrix& base, std::size_t r, const Matrix& grad_at_init,
                           linalg::Rng& rng, const DeepLoraOptions& opts) {
  if (grad_at_init.rows() != base.rows() || grad_at_init.cols() != base.cols()) {
    throw std::invalid_argument("deep_lora_init: gradient shape does not match base");
  }
  const std::size_t kmax = std::min(base.rows(), base.cols());
  if (r < 1 || r > kmax) throw std::invalid_argument("deep_lora_init: r exceeds matrix dimensions");
  if (!(opts.eps > 0.0) || !(opts.gamma_outer > 0.0)) {
    throw std::invalid_argument("deep_lora_init: eps and gamma_outer must be > 0");
  }
  const linalg::SvdResult f = linalg::svd(grad_at_init);
  const double cut = f.s.empty() ? 0.0 : 1e-12 * f.s[0];
  std::size_t rank = 0;
  while (rank < f.s.size() && f.s[rank] > cut && f.s[rank] > 0.0) ++rank;

  std::vector<std::size_t> pick(r);
  for (std::size_t k = 0; k < r; ++k) {
    pick[k] = opts.subspace == GradientSubspace::top ? k : kmax - r + k;
  }
  std::vector<bool> fill(r);
  for (std::size_t k = 0; k < r; ++k) fill[k] = pick[k] >= rank;

  // Completed directions stay outside the gradient's range.
  const Matrix u_range = f.u.col_range(0, rank);
  const Matrix v_range = f.v.col_range(0, rank);

  LoraAdapter ad;
  ad.base = base;
  ad.variant = LoraVariant::deep;
  ad.gamma = opts.gamma_outer;
  ad.c = select_columns(f.u, pick, fill, u_range, rng) * opts.eps;
  ad.a = select_columns(f.v, pick, fill, v_range, rng).transpose() * opts.eps;
  ad.b = Matrix::identity(r) * opts.eps;
  return ad;
}

LoraTask make_lora_task(const LoraTaskConfig& cfg) {
  if (cfg.true_rank < 1 || cfg.true_rank > cfg.r || cfg.r >= cfg.d) {
    throw std::invalid_argument("make_lora_task: need 1 <= true_rank <= r < d");
  }
  linalg::Rng rng(cfg.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d));
  LoraTask task;
  task.base = rng.gaussian_matrix(cfg.d, cfg.d, scale);
  task.signal = (rng.gaussian_matrix(cfg.d, cfg.true_rank) * rng.gaussian_matrix(cfg.true_rank, cfg.d)) * scale;
  task.target = task.base + task.signal + rng.gaussian_matrix(cfg.d, cfg.d, cfg.noise * scale);
  return task;
}

LoraTaskResult run_lora_rank_experiment(const LoraTaskConfig& cfg) {
  const LoraTask task = make_lora_task(cfg);
  linalg::Rng rng(cfg.seed ^ 0x5deece66dULL);

  LoraAdapter vanilla = lora_init(task.base, cfg.r, rng);
  const Matrix grad0 = task.base - task.target;
  LoraAdapter deep = deep_lora_init(task.base, cfg.r, grad0, rng,
                                    {cfg.eps, cfg.gamma_outer, GradientSubspace::top});
  for (long t = 0; t < cfg.steps; ++t) {
    vanilla = lora_step(vanilla, vanilla.effective_weight() - task.target, cfg.eta);
    deep = lora_step(deep, deep.effective_weight() - task.target, cfg.deep_eta);
    if (!vanilla.b.all_finite() || !deep.b.all_finite()) {
      throw DivergenceError("run_lora_rank_experiment: adapter diverged", t, INFINITY);
    }
  }
  LoraTaskResult res;
  const Matrix dv = vanilla.delta();
  const Matrix dd = deep.delta();
  res.vanilla_spectrum = linalg::singular_values(dv);
  res.deep_spectrum = linalg::singular_values(dd);
  res.vanilla_rank = linalg::numerical_rank(dv, cfg.rank_tol);
  res.deep_rank = linalg::numerical_rank(dd, cfg.rank_tol);
  res.vanilla_loss = 0.5 * (vanilla.effective_weight() - task.target).squared_norm();
  res.deep_loss = 0.5 * (deep.effective_weight() - task.target).squared_norm();
  res.deep_signal_error = (dd - task.signal).frobenius_norm();
  return res;
}

}  // namespace lowrank::adapters
