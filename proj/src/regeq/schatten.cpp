// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/regeq/schatten.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lowrank/errors.hpp"
#include "lowrank/linalg/decompositions.hpp"

namespace lowrank::regeq {

using linalg::chain_product;
using linalg::matmul_nt;
using linalg::matmul_tn;

double schatten_power(const Matrix& m, double p) {
  double s = 0.0;
  for (double v : linalg::singular_values(m)) {
    if (v > 0.0) s += std::pow(v, p);
  }
  return s;
}

double nuclear_norm(const Matrix& m) {
  const auto s = linalg::singular_values(m);
  return std::accumulate(s.begin(), s.end(), 0.0);
}

std::vector<Matrix> balanced_factorization(const Matrix& m, std::size_t depth, std::size_t d_inner) {
  if (depth < 2) throw std::invalid_argument("balanced_factorization: depth must be >= 2");
  const linalg::SvdResult f = linalg::svd(m);
  const std::size_t rank = linalg::numerical_rank(m, 1e-12);
  if (d_inner < rank) {
    throw std::invalid_argument("balanced_factorization: d_inner " + std::to_string(d_inner) +
                                " is below rank " + std::to_string(rank));
  }
  const double inv_l = 1.0 / static_cast<double>(depth);
  const std::size_t keep = std::min(d_inner, f.s.size());
  std::vector<double> root(d_inner, 0.0);
  for (std::size_t i = 0; i < keep; ++i) root[i] = std::pow(f.s[i], inv_l);

  Matrix first(d_inner, m.cols());
  Matrix last(m.rows(), d_inner);
  for (std::size_t i = 0; i < keep; ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) first(i, j) = root[i] * f.v(j, i);
    for (std::size_t j = 0; j < m.rows(); ++j) last(j, i) = f.u(j, i) * root[i];
  }
  std::vector<Matrix> factors;
  factors.push_back(std::move(first));
  for (std::size_t l = 1; l + 1 < depth; ++l) factors.push_back(Matrix::diag(root));
  factors.push_back(std::move(last));
  return factors;
}

namespace {

double half_squared_norm(const std::vector<Matrix>& ws) {
  double s = 0.0;
  for (const Matrix& w : ws) s += w.squared_norm();
  return 0.5 * s;
}

}  // namespace

SchattenValue variational_schatten_value(const Matrix& m, std::size_t depth, std::size_t d_inner) {
  const std::vector<Matrix> ws = balanced_factorization(m, depth, d_inner);
  const double l = static_cast<double>(depth);
  const double sp = schatten_power(m, 2.0 / l);
  SchattenValue out;
  out.factor_min = half_squared_norm(ws);
  out.closed_form = (2.0 / l) * sp;
  out.balanced_form = (l / 2.0) * sp;
  return out;
}

namespace {

struct Eliminated {
  const Matrix& target;  // m x n with n ≤ m

  // Inner factors W_1 … W_{L−1}; returns false when the product is singular.
  bool outer(const std::vector<Matrix>& inner, Matrix& w_last, Matrix& p_inv) const {
    const Matrix p = chain_product(inner, 0, inner.size());
    try {
      p_inv = linalg::solve(p, Matrix::identity(p.rows()));
    } catch (const NumericalError&) {
      return false;
    }
    w_last = target * p_inv;
    return w_last.all_finite();
  }

  double value(const std::vector<Matrix>& inner) const {
    Matrix w_last, p_inv;
    if (!outer(inner, w_last, p_inv)) return INFINITY;
    return half_squared_norm(inner) + 0.5 * w_last.squared_norm();
  }

  std::vector<Matrix> gradient(const std::vector<Matrix>& inner) const {
    Matrix w_last, p_inv;
    if (!outer(inner, w_last, p_inv)) throw NumericalError("schatten_factor_descent: singular product");
    // ∂/∂P of ½‖M P⁻¹‖² is −W_Lᵀ W_L P⁻ᵀ.
    const Matrix gp = matmul_nt(matmul_tn(w_last, w_last), p_inv) * -1.0;
    std::vector<Matrix> g(inner.size());
    for (std::size_t l = 0; l < inner.size(); ++l) {
      const Matrix left = chain_product(inner, l + 1, inner.size());
      const Matrix right = chain_product(inner, 0, l);
      g[l] = inner[l] + matmul_nt(matmul_tn(left, gp), right);
    }
    return g;
  }
};

double grad_sq(const std::vector<Matrix>& g) {
  double s = 0.0;
  for (const Matrix& x : g) s += x.squared_norm();
  return s;
}

}  // namespace

FactorDescentResult schatten_factor_descent(const Matrix& m, std::size_t depth, linalg::Rng& rng,
                                            const FactorDescentOptions& opts) {
  if (depth < 2) throw std::invalid_argument("schatten_factor_descent: depth must be >= 2");
  const bool wide = m.rows() < m.cols();
  const Matrix target = wide ? m.transpose() : m;
  const std::size_t width = target.cols();

  std::vector<Matrix> inner = balanced_factorization(target, depth, width);
  inner.pop_back();
  const auto s = linalg::singular_values(target);
  const double scale = s.empty() || s[0] == 0.0 ? 1.0 : std::pow(s[0], 1.0 / static_cast<double>(depth));
  for (Matrix& w : inner) w += rng.gaussian_matrix(w.rows(), w.cols(), opts.perturbation * scale);

  const Eliminated obj{target};
  double f = obj.value(inner);
  if (!std::isfinite(f)) throw NumericalError("schatten_factor_descent: singular starting point");
  FactorDescentResult res;
  double step = 1e-2;
  for (; res.iterations < opts.max_iters; ++res.iterations) {
    const std::vector<Matrix> g = obj.gradient(inner);
    const double gg = grad_sq(g);
    if (gg < opts.grad_tol * opts.grad_tol) break;
    bool moved = false;
    for (int back = 0; back < 60; ++back) {
      std::vector<Matrix> trial = inner;
      for (std::size_t l = 0; l < inner.size(); ++l) trial[l] -= g[l] * step;
      const double ft = obj.value(trial);
      if (ft <= f - 0.5 * step * gg) {
        inner = std::move(trial);
        f = ft;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  Matrix w_last, p_inv;
  obj.outer(inner, w_last, p_inv);
  std::vector<Matrix> factors = inner;
  factors.push_back(w_last);
  if (wide) {
    // (W_L⋯W_1)ᵀ = W_1ᵀ⋯W_Lᵀ: reverse and transpose.
    std::vector<Matrix> flipped;
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) flipped.push_back(it->transpose());
    factors = std::move(flipped);
  }
  res.value = half_squared_norm(factors);
  res.constraint_residual = (chain_product(factors, 0, factors.size()) - m).frobenius_norm();
  res.factors = std::move(factors);
  return res;
}

Matrix nuclear_prox(const Matrix& phi, double lam) {
  if (!(lam >= 0.0)) throw std::invalid_argument("nuclear_prox: lambda must be >= 0");
  const linalg::SvdResult f = linalg::svd(phi);
  std::vector<double> shrunk(f.s.size());
  for (std::size_t i = 0; i < f.s.size(); ++i) shrunk[i] = std::max(f.s[i] - lam, 0.0);
  return f.u * matmul_nt(Matrix::diag(shrunk), f.v);
}

double nuclear_prox_objective(const Matrix& m, const Matrix& phi, double lam) {
  return 0.5 * (m - phi).squared_norm() + lam * nuclear_norm(m);
}

ProxCertificate nuclear_prox_certificate(const Matrix& phi, double lam, linalg::Rng& rng, int probes) {
  const Matrix opt = nuclear_prox(phi, lam);
  const double f0 = nuclear_prox_objective(opt, phi, lam);
  ProxCertificate cert;
  cert.min_improvement = INFINITY;
  const double scales[] = {1e-6, 1e-4, 1e-2, 1.0};
  for (int k = 0; k < probes; ++k) {
    const double sc = scales[k % 4];
    const Matrix probe = opt + rng.gaussian_matrix(phi.rows(), phi.cols(), sc);
    cert.min_improvement = std::min(cert.min_improvement, nuclear_prox_objective(probe, phi, lam) - f0);
    ++cert.probes;
  }
  return cert;
}

std::vector<double> squared_nuclear_shrink(const std::vector<double>& s, double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("squared_nuclear_prox: c must be >= 0");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[i - 1]) throw std::invalid_argument("squared_nuclear_shrink: values not descending");
  }
  std::vector<double> z(s.size(), 0.0);
  double prefix_total = std::accumulate(s.begin(), s.end(), 0.0);
  for (std::size_t k = s.size(); k >= 1; --k) {
    const double t = prefix_total / (1.0 + c * static_cast<double>(k));
    if (s[k - 1] > c * t) {
      for (std::size_t i = 0; i < k; ++i) z[i] = std::max(s[i] - c * t, 0.0);
      return z;
    }
    prefix_total -= s[k - 1];
  }
  return z;
}

Matrix squared_nuclear_prox(const Matrix& y, double c) {
  const linalg::SvdResult f = linalg::svd(y);
  const std::vector<double> z = squared_nuclear_shrink(f.s, c);
  return f.u * matmul_nt(Matrix::diag(z), f.v);
}

double squared_nuclear_objective(const Matrix& z, const Matrix& y, double c) {
  const double nn = nuclear_norm(z);
  return (y - z).squared_norm() + c * nn * nn;
}

}  // namespace lowrank::regeq
