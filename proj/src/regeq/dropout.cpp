// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/regeq/dropout.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lowrank/linalg/decompositions.hpp"
#include "lowrank/regeq/schatten.hpp"

namespace lowrank::regeq {

using linalg::matmul_nt;
using linalg::matmul_tn;

void DropoutProblem::validate() const {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("DropoutProblem: mu not in (0, 1]");
  if (d_h < 1) throw std::invalid_argument("DropoutProblem: d_h must be >= 1");
  if (x.empty() || y.empty()) throw std::invalid_argument("DropoutProblem: empty data");
  if (x.cols() != y.cols()) {
    throw std::invalid_argument("DropoutProblem: X " + x.shape_string() + " and Y " +
                                y.shape_string() + " disagree on sample count");
  }
  if (!x.all_finite() || !y.all_finite()) throw std::invalid_argument("DropoutProblem: non-finite data");
}

void DropoutProblem::validate_factors(const Matrix& w1, const Matrix& w2) const {
  validate();
  if (w1.rows() != d_h || w1.cols() != x.rows() || w2.rows() != y.rows() || w2.cols() != d_h) {
    throw std::invalid_argument("DropoutProblem: factor shapes " + w1.shape_string() + ", " +
                                w2.shape_string() + " do not match the problem");
  }
}

MonteCarloEstimate dropout_mc_objective(const DropoutProblem& p, const Matrix& w1, const Matrix& w2,
                                        std::size_t n_samples, linalg::Rng& rng) {
  p.validate_factors(w1, w2);
  if (n_samples < 1) throw std::invalid_argument("dropout_mc_objective: need at least one sample");
  const Matrix h = w1 * p.x;
  const std::size_t k = p.y.rows(), n = p.y.cols();
  const double inv_mu = 1.0 / p.mu;
  std::vector<double> z(p.d_h);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (double& v : z) v = rng.bernoulli(p.mu) ? inv_mu : 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double pred = 0.0;
        for (std::size_t u = 0; u < p.d_h; ++u) pred += w2(i, u) * z[u] * h(u, j);
        const double e = p.y(i, j) - pred;
        loss += e * e;
      }
    }
    // Welford update.
    const double delta = loss - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (loss - mean);
  }
  MonteCarloEstimate est;
  est.mean = mean;
  if (n_samples > 1) {
    const double var = m2 / static_cast<double>(n_samples - 1);
    est.stderr_ = std::sqrt(var / static_cast<double>(n_samples));
  }
  return est;
}

namespace {

struct Objective {
  const DropoutProblem& p;
  double reg;  // (1−μ)/μ

  double value(const Matrix& w1, const Matrix& w2) const {
    const Matrix h = w1 * p.x;
    double f = (p.y - w2 * h).squared_norm();
    if (reg == 0.0) return f;
    for (std::size_t u = 0; u < p.d_h; ++u) {
      double a2 = 0.0, b2 = 0.0;
      for (std::size_t i = 0; i < w2.rows(); ++i) a2 += w2(i, u) * w2(i, u);
      for (std::size_t j = 0; j < h.cols(); ++j) b2 += h(u, j) * h(u, j);
      f += reg * a2 * b2;
    }
    return f;
  }

  void gradient(const Matrix& w1, const Matrix& w2, Matrix& g1, Matrix& g2) const {
    const Matrix h = w1 * p.x;
    const Matrix r = w2 * h - p.y;
    g2 = matmul_nt(r, h) * 2.0;
    Matrix gh = matmul_tn(w2, r) * 2.0;
    for (std::size_t u = 0; u < p.d_h; ++u) {
      double a2 = 0.0, b2 = 0.0;
      for (std::size_t i = 0; i < w2.rows(); ++i) a2 += w2(i, u) * w2(i, u);
      for (std::size_t j = 0; j < h.cols(); ++j) b2 += h(u, j) * h(u, j);
      for (std::size_t i = 0; i < w2.rows(); ++i) g2(i, u) += 2.0 * reg * b2 * w2(i, u);
      for (std::size_t j = 0; j < h.cols(); ++j) gh(u, j) += 2.0 * reg * a2 * h(u, j);
    }
    g1 = matmul_nt(gh, p.x);
  }
};

}  // namespace

double dropout_deterministic_objective(const DropoutProblem& p, const Matrix& w1, const Matrix& w2) {
  p.validate_factors(w1, w2);
  return Objective{p, (1.0 - p.mu) / p.mu}.value(w1, w2);
}

double dropout_nuclear_weight(const DropoutProblem& p) {
  p.validate();
  return (1.0 - p.mu) / (p.mu * static_cast<double>(p.d_h));
}

DropoutEquivalenceReport dropout_global_equivalence(const DropoutProblem& p,
                                                    const DropoutEquivalenceOptions& opts,
                                                    double nuclear_weight) {
  p.validate();
  if (p.x.rows() != p.x.cols() || linalg::max_abs_diff(p.x, Matrix::identity(p.x.rows())) != 0.0) {
    throw std::invalid_argument("dropout_global_equivalence: X must be the identity");
  }
  const std::size_t rank = linalg::numerical_rank(p.y, 1e-10);
  if (p.d_h < rank) {
    throw std::invalid_argument("dropout_global_equivalence: d_h below rank(Y)");
  }
  if (opts.restarts < 1 || opts.steps < 1) {
    throw std::invalid_argument("dropout_global_equivalence: need restarts and steps >= 1");
  }
  const Objective obj{p, (1.0 - p.mu) / p.mu};
  linalg::Rng rng(opts.seed);
  DropoutEquivalenceReport rep;
  rep.factor_objective = std::numeric_limits<double>::infinity();
  const double scale = opts.init_scale / std::sqrt(static_cast<double>(p.d_h));
  for (int restart = 0; restart < opts.restarts; ++restart) {
    Matrix w1 = rng.gaussian_matrix(p.d_h, p.x.rows(), scale);
    Matrix w2 = rng.gaussian_matrix(p.y.rows(), p.d_h, scale);
    double f = obj.value(w1, w2);
    double step = 1e-2;
    Matrix g1, g2;
    for (int it = 0; it < opts.steps; ++it) {
      obj.gradient(w1, w2, g1, g2);
      const double gg = g1.squared_norm() + g2.squared_norm();
      if (gg < 1e-26) break;
      bool moved = false;
      for (int back = 0; back < 60; ++back) {
        const Matrix t1 = w1 - g1 * step;
        const Matrix t2 = w2 - g2 * step;
        const double ft = obj.value(t1, t2);
        if (ft <= f - 0.5 * step * gg) {
          w1 = t1;
          w2 = t2;
          f = ft;
          step *= 1.5;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (f < rep.factor_objective) {
      rep.factor_objective = f;
      rep.product = w2 * w1;
    }
  }
  rep.nuclear_weight = nuclear_weight >= 0.0 ? nuclear_weight : dropout_nuclear_weight(p);
  rep.prox = squared_nuclear_prox(p.y, rep.nuclear_weight);
  rep.prox_objective = squared_nuclear_objective(rep.prox, p.y, rep.nuclear_weight);
  rep.objective_gap = rep.factor_objective - rep.prox_objective;
  rep.frobenius_gap = (rep.product - rep.prox).frobenius_norm();
  return rep;
}

}  // namespace lowrank::regeq
