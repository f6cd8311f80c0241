// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/regeq/implicit_bias.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lowrank/errors.hpp"
#include "lowrank/linalg/decompositions.hpp"

namespace lowrank::regeq {

using linalg::matmul_nt;
using linalg::matmul_tn;

Matrix min_norm_solution(const Matrix& x, const Matrix& y) {
  return matmul_tn(x, linalg::solve(matmul_nt(x, x), y));
}

LeastSquaresReport least_squares_bias_check(const Matrix& x, const Matrix& y, const Matrix& w0,
                                            double eta, long steps) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n >= d) throw std::invalid_argument("least_squares_bias_check: need n < d");
  if (y.rows() != n || y.cols() != 1 || w0.rows() != d || w0.cols() != 1) {
    throw std::invalid_argument("least_squares_bias_check: y must be n x 1 and w0 d x 1");
  }
  if (linalg::numerical_rank(x, 1e-10) != n) {
    throw std::invalid_argument("least_squares_bias_check: X is rank deficient");
  }
  const double s1 = linalg::singular_values(x)[0];
  if (!(eta > 0.0 && eta < 2.0 / (s1 * s1))) {
    throw std::invalid_argument("least_squares_bias_check: need 0 < eta < 2/σ₁(X)²");
  }
  if (steps < 0) throw std::invalid_argument("least_squares_bias_check: negative step count");

  const Matrix gram = matmul_nt(x, x);
  // Π = Xᵀ(XXᵀ)⁻¹X; the complement (I − Π) is what must stay fixed.
  const Matrix proj = matmul_tn(x, linalg::solve(gram, x));
  const Matrix comp = Matrix::identity(d) - proj;

  LeastSquaresReport rep;
  Matrix w = w0;
  for (long t = 0; t < steps; ++t) {
    const Matrix resid = x * w - y;
    w -= matmul_tn(x, resid) * eta;
    rep.max_rowspan_residual = std::max(rep.max_rowspan_residual, (comp * (w - w0)).max_abs());
  }
  rep.limit = w0 + matmul_tn(x, linalg::solve(gram, y - x * w0));
  rep.limit_error = linalg::max_abs_diff(w, rep.limit);
  rep.min_norm_error = linalg::max_abs_diff(proj * w, min_norm_solution(x, y));
  rep.final_w = std::move(w);
  return rep;
}

void MarginProblem::validate() const {
  if (points.empty()) throw std::invalid_argument("MarginProblem: no points");
  if (points.size() > 6) throw std::invalid_argument("MarginProblem: at most 6 points");
  const std::size_t d = dim();
  if (d < 1 || d > 3) throw std::invalid_argument("MarginProblem: dimension must be 1..3");
  for (const LabeledPoint& p : points) {
    if (p.x.size() != d) throw std::invalid_argument("MarginProblem: inconsistent dimensions");
    if (p.y != 1 && p.y != -1) throw std::invalid_argument("MarginProblem: labels must be ±1");
    double sq = 0.0;
    for (double v : p.x) {
      if (!std::isfinite(v)) throw std::invalid_argument("MarginProblem: non-finite coordinate");
      sq += v * v;
    }
    if (sq > 100.0) throw std::invalid_argument("MarginProblem: ‖x‖ must be ≤ 10");
  }
}

MarginProblem MarginProblem::scaled(double c) const {
  MarginProblem out = *this;
  for (LabeledPoint& p : out.points) {
    for (double& v : p.x) v *= c;
  }
  return out;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void normalize_into(const std::vector<double>& w, std::vector<double>& out, double& norm) {
  norm = std::sqrt(dot(w, w));
  out = w;
  for (double& v : out) v /= norm;
}

}  // namespace

double vector_angle(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector_angle: size mismatch");
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("vector_angle: zero vector");
  // atan2 of |a×b| and a·b stays accurate for tiny angles.
  double cross2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double c = a[i] * b[j] - a[j] * b[i];
      cross2 += c * c;
    }
  }
  return std::atan2(std::sqrt(cross2), dot(a, b));
}

MaxMarginSolution max_margin_oracle(const MarginProblem& p) {
  p.validate();
  const std::size_t n = p.points.size(), d = p.dim();
  const std::size_t kmax = std::min(n, d);
  MaxMarginSolution best;
  best.norm = INFINITY;
  std::vector<std::vector<double>> winners;

  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    if (idx.size() > kmax) continue;
    const std::size_t s = idx.size();
    Matrix stacked(s, d);
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t j = 0; j < d; ++j) stacked(a, j) = p.points[idx[a]].x[j];
    }
    if (linalg::numerical_rank(stacked, 1e-10) != s) continue;
    Matrix k(s, s);
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = 0; b < s; ++b) {
        k(a, b) = p.points[idx[a]].y * p.points[idx[b]].y * dot(p.points[idx[a]].x, p.points[idx[b]].x);
      }
    }
    Matrix alpha;
    try {
      Matrix ones(s, 1);
      for (double& v : ones.data()) v = 1.0;
      alpha = linalg::solve(k, ones);
    } catch (const NumericalError&) {
      continue;
    }
    std::vector<double> w(d, 0.0);
    for (std::size_t a = 0; a < s; ++a) {
      const LabeledPoint& pt = p.points[idx[a]];
      for (std::size_t j = 0; j < d; ++j) w[j] += alpha(a, 0) * pt.y * pt.x[j];
    }
    bool feasible = true;
    for (const LabeledPoint& pt : p.points) {
      if (pt.y * dot(w, pt.x) < 1.0 - 1e-10) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    ++best.candidates;
    const double norm = std::sqrt(dot(w, w));
    if (norm < best.norm - 1e-9 * (1.0 + norm)) {
      best.norm = norm;
      best.w = w;
      winners.assign(1, w);
    } else if (norm <= best.norm + 1e-9 * (1.0 + norm)) {
      winners.push_back(w);
    }
  }
  if (best.candidates == 0) {
    throw std::invalid_argument("max_margin_oracle: points are not separable through the origin");
  }
  for (const auto& w : winners) {
    if (vector_angle(w, best.w) > 1e-8) {
      throw NumericalError("max_margin_oracle: minimum-norm direction is not unique");
    }
  }
  normalize_into(best.w, best.direction, best.norm);
  return best;
}

ExpLossResult exp_loss_trainer(const MarginProblem& p, const ExpLossOptions& opts) {
  max_margin_oracle(p);  // rejects non-separable input
  if (opts.depth < 1) throw std::invalid_argument("exp_loss_trainer: depth must be >= 1");
  if (opts.depth > 1 && opts.width < 1) throw std::invalid_argument("exp_loss_trainer: width must be >= 1");
  if (opts.steps < 0) throw std::invalid_argument("exp_loss_trainer: negative step count");
  double max_sq = 0.0;
  for (const LabeledPoint& pt : p.points) max_sq = std::max(max_sq, dot(pt.x, pt.x));
  if (!(opts.eta > 0.0) || (max_sq > 0.0 && opts.eta > 0.5 / max_sq)) {
    throw std::invalid_argument("exp_loss_trainer: need 0 < eta <= 0.5/max‖x‖²");
  }
  const std::size_t d = p.dim(), n = p.points.size(), depth = opts.depth;
  linalg::Rng rng(opts.seed);
  std::vector<Matrix> ws;
  if (depth == 1) {
    ws.emplace_back(1, d);
  } else {
    ws.push_back(rng.gaussian_matrix(opts.width, d, opts.init_scale));
    for (std::size_t l = 1; l + 1 < depth; ++l) {
      ws.push_back(rng.gaussian_matrix(opts.width, opts.width, opts.init_scale));
    }
    ws.push_back(rng.gaussian_matrix(1, opts.width, opts.init_scale));
  }
  Matrix xs(d, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) xs(j, i) = p.points[i].x[j];
  }

  ExpLossResult res;
  for (long t = 0; t <= opts.steps; ++t) {
    const Matrix v = linalg::chain_product(ws, 0, depth);  // 1 x d
    const Matrix f = v * xs;                                // 1 x n
    bool separated = true;
    double loss = 0.0;
    Matrix coeff(1, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double margin = p.points[i].y * f(0, i);
      if (!(margin > 0.0)) separated = false;
      const double e = std::min(std::exp(-margin), opts.clip);
      loss += e;
      coeff(0, i) = -p.points[i].y * e;
    }
    if (separated && res.separated_at < 0) res.separated_at = t;
    res.final_loss = loss;
    if (t == opts.steps) break;
    const Matrix g = matmul_nt(coeff, xs);  // ∂loss/∂v, 1 x d
    std::vector<Matrix> grads(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      const Matrix left = linalg::chain_product(ws, l + 1, depth);
      const Matrix right = linalg::chain_product(ws, 0, l);
      grads[l] = matmul_nt(matmul_tn(left, g), right);
    }
    for (std::size_t l = 0; l < depth; ++l) ws[l] -= grads[l] * opts.eta;
    if (!ws.back().all_finite()) {
      throw DivergenceError("exp_loss_trainer: weights diverged", t, loss);
    }
  }
  const Matrix v = linalg::chain_product(ws, 0, depth);
  double norm = 0.0;
  normalize_into(v.data(), res.direction, norm);
  if (!(norm > 0.0)) res.direction.assign(d, 0.0);
  return res;
}

}  // namespace lowrank::regeq
