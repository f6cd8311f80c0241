// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "lowrank/linalg/matrix.hpp"
#include "lowrank/linalg/rng.hpp"

namespace lowrank::linalg {

struct SvdResult {
  Matrix u;               // m x k
  std::vector<double> s;  // k values, descending
  Matrix v;               // n x k
  int sweeps = 0;

  Matrix reconstruct() const;
};

struct SvdOptions {
  int max_sweeps = 60;
  // A column pair is rotated while |a_p . a_q| > tol * |a_p| * |a_q|.
  double pair_tol = 0.0;  // 0 selects rows * machine epsilon
};

// Thin SVD by cyclic one-sided Jacobi. Each left vector is signed so that its
// largest-magnitude entry (lowest row index on ties) is non-negative; equal
// singular values keep the order of the Jacobi columns.
SvdResult svd(const Matrix& a, const SvdOptions& opts = {});

std::vector<double> singular_values(const Matrix& a);

struct QrResult {
  Matrix q;  // m x n, orthonormal columns
  Matrix r;  // n x n, upper triangular with non-negative diagonal
};

// Householder thin QR for m >= n.
QrResult qr(const Matrix& a);

// d x d matrix W with WᵀW = WWᵀ = eps² I from the QR of a Gaussian matrix.
Matrix random_scaled_orthogonal(std::size_t d, double eps, Rng& rng);

// Orthonormal basis of the column space: left singular vectors with
// singular value above rel_tol * s[0].
Matrix orthonormal_basis(const Matrix& a, double rel_tol = 1e-12);

// Orthonormal basis of {v : |Av| <= tol * s[0] * |v|}. May have zero columns.
Matrix nullspace(const Matrix& a, double tol = 1e-10);

std::size_t numerical_rank(const Matrix& a, double rel_tol = 1e-6);

// Principal angles in ascending order, length min(cols). Small angles are
// taken from the sines of the complement projection to keep full accuracy.
std::vector<double> principal_angles(const Matrix& u1, const Matrix& u2);

double max_principal_angle(const Matrix& u1, const Matrix& u2);

// Solves a x = b (b may have several columns) by LU with partial pivoting.
Matrix solve(const Matrix& a, const Matrix& b);

// max |QᵀQ - I|.
double orthonormality_residual(const Matrix& q);

}  // namespace lowrank::linalg
