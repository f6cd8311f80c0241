// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lowrank/checks.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/linalg/decompositions.hpp"
#include "lowrank/oracles/grid_search.hpp"
#include "lowrank/regeq/dropout.hpp"
#include "lowrank/regeq/implicit_bias.hpp"
#include "lowrank/regeq/schatten.hpp"

namespace lowrank::regeq {
namespace {

using linalg::max_abs_diff;
using linalg::Rng;

Matrix diag2(double a, double b) { return Matrix::diag({a, b}); }

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng.next() % n); }

// ---------------------------------------------------------------- Schatten

TEST(Schatten, ZeroMatrixGivesZero) {
  const SchattenValue v = variational_schatten_value(Matrix(3, 2), 3, 2);
  EXPECT_EQ(v.factor_min, 0.0);
  EXPECT_EQ(v.closed_form, 0.0);
  EXPECT_EQ(v.balanced_form, 0.0);
}

TEST(Schatten, DepthTwoIsNuclearNorm) {
  const SchattenValue v = variational_schatten_value(diag2(3, 1), 2, 2);
  EXPECT_NEAR(v.closed_form, 4.0, 1e-14);
  EXPECT_NEAR(v.factor_min, 4.0, 1e-14);
}

// min ½(a² + b² + c²) with abc = 8, by brute force over (a, b) with c = 8/(ab).
double scalar_depth3_bruteforce() {
  double best = INFINITY, ba = 1.0, bb = 1.0;
  double lo = 0.5, hi = 4.0;
  for (int round = 0; round < 6; ++round) {
    const double step = (hi - lo) / 400.0;
    for (double a = std::max(lo, 1e-3); a <= hi; a += step) {
      for (double b = std::max(lo, 1e-3); b <= hi; b += step) {
        const double c = 8.0 / (a * b);
        const double f = 0.5 * (a * a + b * b + c * c);
        if (f < best) {
          best = f;
          ba = a;
          bb = b;
        }
      }
    }
    lo = std::min(ba, bb) - 4 * step;
    hi = std::max(ba, bb) + 4 * step;
  }
  return best;
}

TEST(Schatten, DepthThreeScalarMatchesBruteForce) {
  const double oracle = scalar_depth3_bruteforce();
  const SchattenValue v = variational_schatten_value(Matrix::diag({8.0}), 3, 1);
  EXPECT_NEAR(oracle, 6.0, 1e-8);
  EXPECT_NEAR(v.factor_min, oracle, 1e-8);
  EXPECT_NEAR(v.balanced_form, oracle, 1e-8);
  // (2/L)Σσ^{2/L} = 8/3 sits strictly below the attainable minimum.
  EXPECT_NEAR(v.closed_form, 8.0 / 3.0, 1e-14);
  EXPECT_LT(v.closed_form, oracle - 1.0);
}

TEST(Schatten, TwoConstantsAgreeOnlyAtDepthTwo) {
  Rng rng(5);
  const Matrix m = rng.gaussian_matrix(4, 3);
  for (std::size_t depth = 2; depth <= 5; ++depth) {
    const SchattenValue v = variational_schatten_value(m, depth, 3);
    if (depth == 2) {
      EXPECT_NEAR(v.closed_form, v.balanced_form, 1e-12);
    } else {
      EXPECT_GT(std::abs(v.closed_form - v.balanced_form), 0.1);
    }
  }
}

TEST(Schatten, BalancedFactorsReproduceTarget) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + pick(rng, 6), n = 1 + pick(rng, 6);
    const std::size_t depth = 2 + pick(rng, 3);
    const Matrix target = rng.gaussian_matrix(m, n);
    const std::size_t width = std::min(m, n) + pick(rng, 3);
    const auto ws = balanced_factorization(target, depth, width);
    ASSERT_EQ(ws.size(), depth);
    EXPECT_LE(max_abs_diff(linalg::chain_product(ws, 0, depth), target), 1e-12);
    const SchattenValue v = variational_schatten_value(target, depth, width);
    EXPECT_NEAR(v.factor_min, v.balanced_form, 1e-10 * (1.0 + v.balanced_form));
  }
}

TEST(Schatten, InnerWidthBelowRankThrows) {
  Rng rng(7);
  EXPECT_THROW(variational_schatten_value(rng.gaussian_matrix(3, 3), 2, 2), std::invalid_argument);
  EXPECT_THROW(variational_schatten_value(rng.gaussian_matrix(3, 3), 1, 3), std::invalid_argument);
}

TEST(Schatten, FactorDescentAttainsBalancedValue) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + pick(rng, 5), n = 1 + pick(rng, 5);
    const std::size_t depth = 2 + pick(rng, 3);
    const Matrix target = rng.gaussian_matrix(m, n);
    const SchattenValue v = variational_schatten_value(target, depth, std::min(m, n));
    const FactorDescentResult r = schatten_factor_descent(target, depth, rng);
    EXPECT_LE(r.constraint_residual, 1e-9);
    EXPECT_GE(r.value, v.balanced_form - 1e-9);
    EXPECT_LE(r.value, v.balanced_form + 1e-3);
    EXPECT_GE(r.value, v.closed_form - 1e-9);
  }
}

// ------------------------------------------------------------ nuclear prox

TEST(NuclearProx, ZeroWeightReturnsInput) {
  Rng rng(10);
  const Matrix phi = rng.gaussian_matrix(3, 4);
  EXPECT_LE(max_abs_diff(nuclear_prox(phi, 0.0), phi), 1e-12);
}

TEST(NuclearProx, DiagonalExample) {
  EXPECT_EQ(nuclear_prox(diag2(3, 1), 2.0), diag2(1, 0));
}

TEST(NuclearProx, LargeWeightGivesZero) {
  Rng rng(11);
  const Matrix phi = rng.gaussian_matrix(4, 3);
  const double s1 = linalg::singular_values(phi)[0];
  EXPECT_EQ(nuclear_prox(phi, s1 * 1.01).max_abs(), 0.0);
}

TEST(NuclearProx, NegativeWeightRejected) {
  EXPECT_THROW(nuclear_prox(diag2(1, 1), -0.1), std::invalid_argument);
}

TEST(NuclearProx, CertificateHoldsOnRandomInputs) {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix phi = rng.gaussian_matrix(1 + pick(rng, 4), 1 + pick(rng, 4));
    const double lam = 2.0 * rng.uniform();
    const ProxCertificate c = nuclear_prox_certificate(phi, lam, rng, 200);
    EXPECT_TRUE(c.pass()) << c.min_improvement;
    EXPECT_EQ(c.probes, 200);
  }
}

TEST(NuclearProx, ObjectiveCatchesAWrongAnswer) {
  // The unshrunk input is beaten by the prox point whenever λ > 0.
  Rng rng(13);
  const Matrix phi = rng.gaussian_matrix(3, 3);
  EXPECT_LT(nuclear_prox_objective(nuclear_prox(phi, 0.5), phi, 0.5),
            nuclear_prox_objective(phi, phi, 0.5) - 1e-3);
}

// ------------------------------------------------------ squared nuclear prox

TEST(SquaredNuclearProx, ZeroWeightReturnsInput) {
  Rng rng(20);
  const Matrix y = rng.gaussian_matrix(3, 2);
  EXPECT_LE(max_abs_diff(squared_nuclear_prox(y, 0.0), y), 1e-12);
}

TEST(SquaredNuclearProx, SingleActiveValue) {
  EXPECT_LE(max_abs_diff(squared_nuclear_prox(diag2(2, 0), 1.0), diag2(1, 0)), 1e-15);
}

TEST(SquaredNuclearProx, HeavyWeightMatchesGrid) {
  const auto z = squared_nuclear_shrink({1.0, 1.0}, 10.0);
  const auto g = oracles::grid_search_squared_nuclear({1.0, 1.0}, 10.0);
  EXPECT_NEAR(z[0], 1.0 / 21.0, 1e-15);
  EXPECT_NEAR(z[1], 1.0 / 21.0, 1e-15);
  EXPECT_NEAR(z[0], g[0], 2e-3);
  EXPECT_NEAR(z[1], g[1], 2e-3);
}

TEST(SquaredNuclearProx, MatchesGridOnDiagonalInputs) {
  double worst = 0.0;
  for (double c : {0.1, 1.0, 10.0}) {
    for (int a = 0; a <= 6; ++a) {
      for (int b = 0; b <= a; ++b) {
        const std::vector<double> s = {0.5 * a, 0.5 * b};
        const auto z = squared_nuclear_shrink(s, c);
        const auto g = oracles::grid_search_squared_nuclear(s, c);
        for (std::size_t i = 0; i < 2; ++i) worst = std::max(worst, std::abs(z[i] - g[i]));
      }
    }
  }
  EXPECT_LE(worst, 2e-3);
}

TEST(SquaredNuclearProx, BeatsPerturbationsOnRandomInputs) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix y = rng.gaussian_matrix(3, 4);
    const double c = 3.0 * rng.uniform();
    const Matrix z = squared_nuclear_prox(y, c);
    const double f0 = squared_nuclear_objective(z, y, c);
    for (int k = 0; k < 100; ++k) {
      const Matrix probe = z + rng.gaussian_matrix(3, 4, k % 2 ? 1e-4 : 1e-1);
      EXPECT_GE(squared_nuclear_objective(probe, y, c) - f0, -1e-12);
    }
  }
}

TEST(SquaredNuclearProx, RejectsUnsortedOrNegativeWeight) {
  EXPECT_THROW(squared_nuclear_shrink({1.0, 2.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(squared_nuclear_shrink({2.0, 1.0}, -1.0), std::invalid_argument);
}

// ---------------------------------------------------------------- dropout

DropoutProblem random_dropout_problem(Rng& rng, double mu) {
  DropoutProblem p;
  p.x = rng.gaussian_matrix(3, 5);
  p.y = rng.gaussian_matrix(2, 5);
  p.d_h = 4;
  p.mu = mu;
  return p;
}

TEST(Dropout, FullKeepIsDeterministic) {
  Rng rng(30);
  const DropoutProblem p = random_dropout_problem(rng, 1.0);
  const Matrix w1 = rng.gaussian_matrix(4, 3), w2 = rng.gaussian_matrix(2, 4);
  const double plain = (p.y - w2 * w1 * p.x).squared_norm();
  const MonteCarloEstimate e = dropout_mc_objective(p, w1, w2, 50, rng);
  EXPECT_NEAR(e.mean, plain, 1e-12 * plain);
  EXPECT_EQ(e.stderr_, 0.0);
  EXPECT_NEAR(dropout_deterministic_objective(p, w1, w2), plain, 1e-12 * plain);
}

TEST(Dropout, ZeroFirstLayerGivesTargetNorm) {
  Rng rng(31);
  const DropoutProblem p = random_dropout_problem(rng, 0.3);
  const Matrix w2 = rng.gaussian_matrix(2, 4);
  const MonteCarloEstimate e = dropout_mc_objective(p, Matrix(4, 3), w2, 100, rng);
  EXPECT_EQ(e.mean, p.y.squared_norm());
  EXPECT_EQ(e.stderr_, 0.0);
}

TEST(Dropout, ScalarHandExpansion) {
  // E(y − (z/μ)·w2·w1·x)² with E z = E z² = μ.
  const double x = 1.3, y = -0.7, w1 = 0.9, w2 = 1.7;
  for (double mu : {0.2, 0.5, 0.9}) {
    DropoutProblem p;
    p.x = Matrix::diag({x});
    p.y = Matrix::diag({y});
    p.mu = mu;
    const double f = w2 * w1 * x;
    const double hand = y * y - 2.0 * y * f + f * f / mu;
    EXPECT_NEAR(dropout_deterministic_objective(p, Matrix::diag({w1}), Matrix::diag({w2})), hand, 1e-12);
  }
}

TEST(Dropout, MonteCarloAgreesWithExpectation) {
  Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const DropoutProblem p = random_dropout_problem(rng, 0.2 + 0.7 * rng.uniform());
    const Matrix w1 = rng.gaussian_matrix(4, 3, 0.5), w2 = rng.gaussian_matrix(2, 4, 0.5);
    const MonteCarloEstimate e = dropout_mc_objective(p, w1, w2, 20000, rng);
    const double z = (e.mean - dropout_deterministic_objective(p, w1, w2)) / e.stderr_;
    EXPECT_LE(std::abs(z), 4.0) << "trial " << trial;
  }
}

TEST(Dropout, ShapeAndRangeErrors) {
  Rng rng(33);
  DropoutProblem p = random_dropout_problem(rng, 0.5);
  EXPECT_THROW(dropout_deterministic_objective(p, Matrix(3, 3), Matrix(2, 4)), std::invalid_argument);
  p.mu = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.mu = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.mu = 0.5;
  EXPECT_THROW(dropout_mc_objective(p, Matrix(4, 3), Matrix(2, 4), 0, rng), std::invalid_argument);
}

DropoutEquivalenceOptions quick_options() {
  DropoutEquivalenceOptions o;
  o.restarts = 5;
  o.steps = 5000;
  o.seed = 1;
  return o;
}

TEST(DropoutEquivalence, FullKeepRecoversTarget) {
  Rng rng(40);
  DropoutProblem p;
  p.x = Matrix::identity(3);
  p.y = rng.gaussian_matrix(3, 3);
  p.d_h = 3;
  p.mu = 1.0;
  const DropoutEquivalenceReport r = dropout_global_equivalence(p, quick_options());
  EXPECT_LE(std::abs(r.objective_gap), 1e-8);
  EXPECT_LE(max_abs_diff(r.prox, p.y), 1e-12);
}

TEST(DropoutEquivalence, SingleUnitDiagonalExample) {
  DropoutProblem p;
  p.x = Matrix::identity(2);
  p.y = diag2(2, 0);
  p.d_h = 1;
  p.mu = 0.5;
  const DropoutEquivalenceReport r = dropout_global_equivalence(p, quick_options());
  EXPECT_DOUBLE_EQ(r.nuclear_weight, 1.0);
  EXPECT_LE(max_abs_diff(r.product, diag2(1, 0)), 1e-4);
  EXPECT_LE(std::abs(r.objective_gap), 1e-8);
}

TEST(DropoutEquivalence, WeightShrinksWithHiddenWidth) {
  // With d_h = 2 the factor minimum of 4 − 4a + a²(1 + c) over a = W₂W₁ on
  // the active direction is a = 2/(1 + c), c = (1−μ)/(μ d_h) = 1/2 → 4/3.
  DropoutProblem p;
  p.x = Matrix::identity(2);
  p.y = diag2(2, 0);
  p.d_h = 2;
  p.mu = 0.5;
  const DropoutEquivalenceReport r = dropout_global_equivalence(p, quick_options());
  EXPECT_DOUBLE_EQ(r.nuclear_weight, 0.5);
  EXPECT_LE(max_abs_diff(r.product, diag2(4.0 / 3.0, 0)), 1e-4);
  EXPECT_LE(std::abs(r.objective_gap), 1e-8);

  const DropoutEquivalenceReport unscaled = dropout_global_equivalence(p, quick_options(), 1.0);
  EXPECT_GT(std::abs(unscaled.objective_gap), 0.1);
}

TEST(DropoutEquivalence, RandomTargetsCloseGap) {
  Rng rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    DropoutProblem p;
    p.x = Matrix::identity(3);
    p.y = rng.gaussian_matrix(3, 3);
    p.d_h = 3;
    p.mu = 0.6;
    DropoutEquivalenceOptions o = quick_options();
    o.seed = static_cast<std::uint64_t>(trial);
    const DropoutEquivalenceReport r = dropout_global_equivalence(p, o);
    EXPECT_LE(std::abs(r.objective_gap), 1e-3);
    EXPECT_GE(r.objective_gap, -1e-9);  // the prox value is a lower bound
  }
}

TEST(DropoutEquivalence, Preconditions) {
  DropoutProblem p;
  p.x = diag2(1, 2);
  p.y = diag2(1, 1);
  p.d_h = 2;
  p.mu = 0.5;
  EXPECT_THROW(dropout_global_equivalence(p, quick_options()), std::invalid_argument);
  p.x = Matrix::identity(2);
  p.d_h = 1;
  EXPECT_THROW(dropout_global_equivalence(p, quick_options()), std::invalid_argument);
}

// ---------------------------------------------------------- least squares

TEST(LeastSquares, ZeroDataStaysAtZero) {
  Rng rng(50);
  const Matrix x = rng.gaussian_matrix(2, 5);
  const LeastSquaresReport r = least_squares_bias_check(x, Matrix(2, 1), Matrix(5, 1), 0.05, 200);
  EXPECT_EQ(r.final_w.max_abs(), 0.0);
  EXPECT_EQ(r.max_rowspan_residual, 0.0);
}

TEST(LeastSquares, ConvergesToPseudoinverseSolution) {
  Rng rng(51);
  const Matrix x = rng.gaussian_matrix(2, 5);
  const Matrix y = rng.gaussian_matrix(2, 1);
  const double s1 = linalg::singular_values(x)[0];
  const LeastSquaresReport r = least_squares_bias_check(x, y, Matrix(5, 1), 1.0 / (s1 * s1), 20000);
  EXPECT_LE(r.max_rowspan_residual, 1e-10);
  EXPECT_LE(r.limit_error, 1e-6);

  // V S⁻¹ Uᵀ y from the SVD.
  const linalg::SvdResult f = linalg::svd(x);
  Matrix pinv_y(5, 1);
  const Matrix uty = linalg::matmul_tn(f.u, y);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 5; ++j) pinv_y(j, 0) += f.v(j, i) * uty(i, 0) / f.s[i];
  }
  EXPECT_LE(max_abs_diff(min_norm_solution(x, y), pinv_y), 1e-12);
  EXPECT_LE(max_abs_diff(r.final_w, pinv_y), 1e-6);
}

TEST(LeastSquares, ComponentOutsideRowSpanIsPreserved) {
  Rng rng(52);
  const Matrix x = rng.gaussian_matrix(2, 5);
  const Matrix y = rng.gaussian_matrix(2, 1);
  const Matrix w0 = rng.gaussian_matrix(5, 1);
  const double s1 = linalg::singular_values(x)[0];
  const LeastSquaresReport r = least_squares_bias_check(x, y, w0, 1.0 / (s1 * s1), 20000);
  EXPECT_LE(r.max_rowspan_residual, 1e-10);
  EXPECT_LE(r.limit_error, 1e-6);
  EXPECT_LE(r.min_norm_error, 1e-6);
  EXPECT_GT(max_abs_diff(r.final_w, min_norm_solution(x, y)), 1e-3);
}

TEST(LeastSquares, Preconditions) {
  Rng rng(53);
  const Matrix x = rng.gaussian_matrix(2, 5);
  const double s1 = linalg::singular_values(x)[0];
  Matrix dup(2, 5);
  for (std::size_t j = 0; j < 5; ++j) dup(0, j) = dup(1, j) = x(0, j);
  EXPECT_THROW(least_squares_bias_check(dup, Matrix(2, 1), Matrix(5, 1), 1e-3, 1), std::invalid_argument);
  EXPECT_THROW(least_squares_bias_check(x, Matrix(2, 1), Matrix(5, 1), 2.0 / (s1 * s1), 1),
               std::invalid_argument);
  EXPECT_THROW(least_squares_bias_check(rng.gaussian_matrix(5, 5), Matrix(5, 1), Matrix(5, 1), 1e-3, 1),
               std::invalid_argument);
}

// ------------------------------------------------------------- max margin

MarginProblem plus_minus_e1() { return {{{{1.0, 0.0}, 1}, {{-1.0, 0.0}, -1}}}; }
MarginProblem orthogonal_pair() { return {{{{1.0, 0.0}, 1}, {{0.0, 1.0}, -1}}}; }

TEST(MaxMargin, SymmetricPair) {
  const MaxMarginSolution s = max_margin_oracle(plus_minus_e1());
  EXPECT_NEAR(s.direction[0], 1.0, 1e-15);
  EXPECT_NEAR(s.direction[1], 0.0, 1e-15);
  EXPECT_NEAR(s.norm, 1.0, 1e-15);
}

TEST(MaxMargin, OrthogonalPair) {
  const MaxMarginSolution s = max_margin_oracle(orthogonal_pair());
  const double h = 1.0 / std::numbers::sqrt2;
  EXPECT_NEAR(s.direction[0], h, 1e-14);
  EXPECT_NEAR(s.direction[1], -h, 1e-14);
  EXPECT_NEAR(s.norm, std::numbers::sqrt2, 1e-14);
}

// Brute force over unit directions in the plane: maximize min_i y_i uᵀx_i.
std::vector<double> angular_search(const MarginProblem& p) {
  double best = -INFINITY, best_t = 0.0;
  const int n = 2000000;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    double m = INFINITY;
    for (const LabeledPoint& q : p.points) {
      m = std::min(m, q.y * (std::cos(t) * q.x[0] + std::sin(t) * q.x[1]));
    }
    if (m > best) {
      best = m;
      best_t = t;
    }
  }
  return {std::cos(best_t), std::sin(best_t)};
}

TEST(MaxMargin, AgreesWithAngularSearchInThePlane) {
  Rng rng(60);
  int checked = 0;
  while (checked < 5) {
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    const std::vector<double> u = {std::cos(t), std::sin(t)};
    MarginProblem p;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> x = {rng.gaussian() * 2.0, rng.gaussian() * 2.0};
      const double side = u[0] * x[0] + u[1] * x[1];
      if (std::abs(side) < 0.2) continue;
      p.points.push_back({x, side > 0 ? 1 : -1});
    }
    if (p.points.size() < 2) continue;
    const MaxMarginSolution s = max_margin_oracle(p);
    EXPECT_LE(vector_angle(s.direction, angular_search(p)), 1e-5);
    ++checked;
  }
}

TEST(MaxMargin, DirectionIsScaleInvariant) {
  Rng rng(61);
  const MarginProblem base = {{{{1.0, 0.2, 0.0}, 1}, {{-0.3, 1.0, 0.5}, -1}, {{0.8, -0.4, 1.0}, 1}}};
  const MaxMarginSolution s = max_margin_oracle(base);
  for (double c : {2.0, 0.37, 3.1}) {
    const MaxMarginSolution t = max_margin_oracle(base.scaled(c));
    EXPECT_LE(vector_angle(s.direction, t.direction), 1e-12);
    EXPECT_NEAR(t.norm, s.norm / c, 1e-12 * s.norm / c);
  }
}

TEST(MaxMargin, RejectsNonSeparableAndInvalidInput) {
  EXPECT_THROW(max_margin_oracle({{{{1.0, 0.0}, 1}, {{-1.0, 0.0}, 1}}}), std::invalid_argument);
  EXPECT_THROW(max_margin_oracle({{{{1.0, 0.0}, 1}, {{1.0, 0.0}, -1}}}), std::invalid_argument);
  EXPECT_THROW(max_margin_oracle({{{{1.0, 0.0, 0.0, 0.0}, 1}}}), std::invalid_argument);
  EXPECT_THROW(max_margin_oracle({{{{11.0, 0.0}, 1}}}), std::invalid_argument);
  EXPECT_THROW(max_margin_oracle({{{{1.0, 0.0}, 0}}}), std::invalid_argument);
  MarginProblem many;
  for (int i = 0; i < 7; ++i) many.points.push_back({{1.0, 0.1 * i}, 1});
  EXPECT_THROW(max_margin_oracle(many), std::invalid_argument);
  EXPECT_THROW(exp_loss_trainer({{{{1.0, 0.0}, 1}, {{-1.0, 0.0}, 1}}}, {}), std::invalid_argument);
}

TEST(ExpLoss, ShallowModelReachesMaxMargin) {
  for (const MarginProblem& p : {plus_minus_e1(), orthogonal_pair()}) {
    ExpLossOptions o;
    o.depth = 1;
    const ExpLossResult r = exp_loss_trainer(p, o);
    ASSERT_TRUE(r.conclusive());
    EXPECT_LE(vector_angle(r.direction, max_margin_oracle(p).direction), 1e-2);
  }
}

TEST(ExpLoss, DepthTwoReachesMaxMargin) {
  for (const MarginProblem& p : {plus_minus_e1(), orthogonal_pair()}) {
    ExpLossOptions o;
    o.depth = 2;
    o.seed = 3;
    const ExpLossResult r = exp_loss_trainer(p, o);
    ASSERT_TRUE(r.conclusive());
    EXPECT_LE(vector_angle(r.direction, max_margin_oracle(p).direction), 2e-2);
  }
}

TEST(ExpLoss, StepSizeBoundEnforced) {
  ExpLossOptions o;
  o.eta = 0.6;
  EXPECT_THROW(exp_loss_trainer(plus_minus_e1(), o), std::invalid_argument);
}

TEST(ExpLoss, ZeroStepsIsInconclusiveAtZeroInit) {
  ExpLossOptions o;
  o.steps = 0;
  const ExpLossResult r = exp_loss_trainer(plus_minus_e1(), o);
  EXPECT_FALSE(r.conclusive());
}

// ------------------------------------------------------------------ checks

TEST(Checks, RecordsAndJson) {
  const CheckRecord a = make_check("gap", 1.0, 1.0 + 1e-12, 1e-9);
  EXPECT_TRUE(a.pass);
  EXPECT_NEAR(a.gap, 1e-12, 1e-15);
  const CheckRecord b = make_bound_check("bound", 2.0, 1.0);
  EXPECT_FALSE(b.pass);
  EXPECT_FALSE(all_pass({a, b}));
  const CheckRecord c = make_check("nan", NAN, 0.0, 1.0);
  EXPECT_FALSE(c.pass);
  const std::string js = checks_to_json({a, c});
  EXPECT_NE(js.find("\"check\": \"gap\""), std::string::npos);
  EXPECT_NE(js.find("null"), std::string::npos);
}

}  // namespace
}  // namespace lowrank::regeq
