// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/linalg/decompositions.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lowrank/errors.hpp"

namespace lowrank::linalg {

namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

// Jacobi on a tall matrix (m >= n). Works on the transposes so that columns
// are contiguous rows.
SvdResult jacobi_tall(const Matrix& a, const SvdOptions& opts) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix at = a.transpose();
  Matrix vt = Matrix::identity(n);
  const double tol = opts.pair_tol > 0.0 ? opts.pair_tol : static_cast<double>(m) * DBL_EPSILON;

  int sweep = 0;
  double worst = 0.0;
  for (;; ++sweep) {
    bool rotated = false;
    worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* ap = at.data().data() + p * m;
        double* aq = at.data().data() + q * m;
        const double alpha = dot(ap, ap, m);
        const double beta = dot(aq, aq, m);
        if (alpha == 0.0 || beta == 0.0) continue;
        const double gamma = dot(ap, aq, m);
        const double scale = std::sqrt(alpha) * std::sqrt(beta);
        const double rel = std::abs(gamma) / scale;
        worst = std::max(worst, rel);
        if (rel <= tol) continue;
        if (sweep >= opts.max_sweeps) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double sgn = zeta >= 0.0 ? 1.0 : -1.0;
        const double t = std::abs(zeta) > 1e150
                             ? 0.5 / zeta
                             : sgn / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = ap[i];
          const double y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        double* vp = vt.data().data() + p * n;
        double* vq = vt.data().data() + q * n;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }
  if (sweep >= opts.max_sweeps && worst > tol) {
    throw ConvergenceError("svd: Jacobi did not converge after " +
                               std::to_string(opts.max_sweeps) +
                               " sweeps, off-diagonal residual " + std::to_string(worst),
                           worst);
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* col = at.data().data() + j * m;
    norms[j] = std::sqrt(dot(col, col, m));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return norms[i] > norms[j]; });

  SvdResult res;
  res.sweeps = sweep;
  res.u = Matrix(m, n);
  res.v = Matrix(n, n);
  res.s.resize(n);
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    const double sigma = norms[j];
    for (std::size_t i = 0; i < n; ++i) res.v(i, k) = vt(j, i);
    if (sigma < DBL_MIN) {
      res.s[k] = 0.0;
      continue;
    }
    res.s[k] = sigma;
    filled[k] = true;
    for (std::size_t i = 0; i < m; ++i) res.u(i, k) = at(j, i) / sigma;
  }

  // Complete left vectors of exactly zero singular values by Gram-Schmidt on e_i.
  std::size_t next_e = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (filled[k]) continue;
    for (; next_e < m; ++next_e) {
      std::vector<double> w(m, 0.0);
      w[next_e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < n; ++c) {
          if (!filled[c]) continue;
          double proj = 0.0;
          for (std::size_t i = 0; i < m; ++i) proj += res.u(i, c) * w[i];
          for (std::size_t i = 0; i < m; ++i) w[i] -= proj * res.u(i, c);
        }
      }
      const double nw = std::sqrt(dot(w.data(), w.data(), m));
      if (nw > 1e-8) {
        for (std::size_t i = 0; i < m; ++i) res.u(i, k) = w[i] / nw;
        filled[k] = true;
        ++next_e;
        break;
      }
    }
  }
  return res;
}

void apply_sign_convention(SvdResult& res) {
  for (std::size_t k = 0; k < res.s.size(); ++k) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < res.u.rows(); ++i) {
      const double v = std::abs(res.u(i, k));
      if (v > best_abs) {
        best_abs = v;
        best = i;
      }
    }
    if (res.u(best, k) < 0.0) {
      for (std::size_t i = 0; i < res.u.rows(); ++i) res.u(i, k) = -res.u(i, k);
      for (std::size_t i = 0; i < res.v.rows(); ++i) res.v(i, k) = -res.v(i, k);
    }
  }
}

}  // namespace

Matrix SvdResult::reconstruct() const {
  Matrix us = u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t k = 0; k < s.size(); ++k) us(i, k) *= s[k];
  return matmul_nt(us, v);
}

SvdResult svd(const Matrix& a, const SvdOptions& opts) {
  if (!a.all_finite()) throw std::invalid_argument("svd: input has non-finite entries");
  SvdResult res;
  if (a.rows() >= a.cols()) {
    res = jacobi_tall(a, opts);
  } else {
    SvdResult t = jacobi_tall(a.transpose(), opts);
    res.u = std::move(t.v);
    res.v = std::move(t.u);
    res.s = std::move(t.s);
    res.sweeps = t.sweeps;
  }
  apply_sign_convention(res);
  return res;
}

std::vector<double> singular_values(const Matrix& a) { return svd(a).s; }

QrResult qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw std::invalid_argument("qr: requires rows >= cols");
  Matrix r = a;
  std::vector<std::vector<double>> reflectors(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> v(m - j);
    for (std::size_t i = j; i < m; ++i) v[i - j] = r(i, j);
    const double nx = std::sqrt(dot(v.data(), v.data(), v.size()));
    if (nx == 0.0) continue;
    const double alpha = v[0] >= 0.0 ? -nx : nx;
    v[0] -= alpha;
    const double nv = std::sqrt(dot(v.data(), v.data(), v.size()));
    for (double& x : v) x /= nv;
    for (std::size_t c = j; c < n; ++c) {
      double proj = 0.0;
      for (std::size_t i = j; i < m; ++i) proj += v[i - j] * r(i, c);
      for (std::size_t i = j; i < m; ++i) r(i, c) -= 2.0 * proj * v[i - j];
    }
    reflectors[j] = std::move(v);
  }
  Matrix q(m, n);
  for (std::size_t k = 0; k < n; ++k) q(k, k) = 1.0;
  for (std::size_t jj = n; jj-- > 0;) {
    const auto& v = reflectors[jj];
    if (v.empty()) continue;
    for (std::size_t c = 0; c < n; ++c) {
      double proj = 0.0;
      for (std::size_t i = jj; i < m; ++i) proj += v[i - jj] * q(i, c);
      for (std::size_t i = jj; i < m; ++i) q(i, c) -= 2.0 * proj * v[i - jj];
    }
  }
  QrResult out{std::move(q), Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out.r(i, j) = r(i, j);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.r(i, i) < 0.0) {
      for (std::size_t j = i; j < n; ++j) out.r(i, j) = -out.r(i, j);
      for (std::size_t k = 0; k < m; ++k) out.q(k, i) = -out.q(k, i);
    }
  }
  return out;
}

Matrix random_scaled_orthogonal(std::size_t d, double eps, Rng& rng) {
  if (d == 0) throw std::invalid_argument("random_scaled_orthogonal: d must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("random_scaled_orthogonal: eps must be > 0");
  return qr(rng.gaussian_matrix(d, d)).q * eps;
}

Matrix orthonormal_basis(const Matrix& a, double rel_tol) {
  const SvdResult res = svd(a);
  std::size_t k = 0;
  const double cut = res.s.empty() ? 0.0 : rel_tol * res.s[0];
  while (k < res.s.size() && res.s[k] > cut && res.s[k] > 0.0) ++k;
  return res.u.col_range(0, k);
}

Matrix nullspace(const Matrix& a, double tol) {
  const std::size_t n = a.cols();
  Matrix padded = a;
  if (a.rows() < n) padded = vstack(a, Matrix(n - a.rows(), n));
  const SvdResult res = svd(padded);
  const double cut = tol * (res.s.empty() ? 0.0 : res.s[0]);
  std::size_t first = 0;
  while (first < res.s.size() && res.s[first] > cut) ++first;
  return res.v.col_range(first, n - first);
}

std::size_t numerical_rank(const Matrix& a, double rel_tol) {
  if (a.empty()) return 0;
  const auto s = singular_values(a);
  if (s.empty() || s[0] == 0.0) return 0;
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [&](double x) { return x > rel_tol * s[0]; }));
}

double orthonormality_residual(const Matrix& q) {
  return max_abs_diff(matmul_tn(q, q), Matrix::identity(q.cols()));
}

std::vector<double> principal_angles(const Matrix& u1, const Matrix& u2) {
  if (u1.rows() != u2.rows()) throw std::invalid_argument("principal_angles: row counts differ");
  if (orthonormality_residual(u1) > 1e-6 || orthonormality_residual(u2) > 1e-6) {
    throw std::invalid_argument("principal_angles: bases are not orthonormal");
  }
  // Let s be the smaller basis; angles come from s against span(b).
  const Matrix& b = u1.cols() >= u2.cols() ? u1 : u2;
  const Matrix& s = u1.cols() >= u2.cols() ? u2 : u1;
  const std::size_t k = s.cols();
  if (k == 0) return {};
  const Matrix coupling = matmul_tn(b, s);
  std::vector<double> cosines = singular_values(coupling);
  cosines.resize(k, 0.0);
  const Matrix residual = s - b * coupling;
  std::vector<double> sines = singular_values(residual);
  std::sort(sines.begin(), sines.end());
  std::vector<double> angles(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double c = std::clamp(cosines[i], 0.0, 1.0);
    const double sn = std::clamp(sines[i], 0.0, 1.0);
    angles[i] = c * c < 0.5 ? std::acos(c) : std::asin(sn);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double max_principal_angle(const Matrix& u1, const Matrix& u2) {
  const auto angles = principal_angles(u1, u2);
  return angles.empty() ? 0.0 : angles.back();
}

Matrix solve(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n) throw std::invalid_argument("solve: shape mismatch");
  Matrix lu = a;
  Matrix x = b;
  const double scale = std::max(a.max_abs(), DBL_MIN);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (std::abs(lu(piv, k)) <= 1e-14 * scale) throw NumericalError("solve: matrix is singular");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      lu(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double acc = x(kk, j);
      for (std::size_t c = kk + 1; c < n; ++c) acc -= lu(kk, c) * x(c, j);
      x(kk, j) = acc / lu(kk, kk);
    }
  }
  return x;
}

}  // namespace lowrank::linalg
