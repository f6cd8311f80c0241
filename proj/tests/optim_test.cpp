// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "lowrank/linalg/decompositions.hpp"
#include "lowrank/optim/optimizers.hpp"

namespace lowrank::optim {
namespace {

using linalg::Matrix;
using linalg::max_abs_diff;
using linalg::Rng;

TEST(Adam, ZeroGradientFromFreshStateIsNoOp) {
  Rng rng(1);
  const Matrix w = rng.gaussian_matrix(3, 4);
  const auto [out, st] = adam_step(w, Matrix(3, 4), AdamState{}, 0.1);
  EXPECT_EQ(out, w);
  EXPECT_EQ(st.t, 1);
}

TEST(Adam, ZeroBetasGiveSignLikeStep) {
  Rng rng(2);
  const Matrix w = rng.gaussian_matrix(4, 4);
  const Matrix g = rng.gaussian_matrix(4, 4);
  AdamState s;
  s.beta1 = 0.0;
  s.beta2 = 0.0;
  const auto [out, st] = adam_step(w, g, s, 0.3);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double gi = g.data()[i];
    EXPECT_NEAR(out.data()[i], w.data()[i] - 0.3 * gi / (std::abs(gi) + s.eps_stab), 1e-15);
  }
}

TEST(Adam, ThreeScalarStepsMatchHandRecursion) {
  // f(w) = ½(w − 2)², w₀ = 0.
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, eta = 0.1;
  double w = 0.0, m = 0.0, v = 0.0;
  Matrix wm = Matrix::from_rows({{0.0}});
  AdamState s;
  for (int t = 1; t <= 3; ++t) {
    const double g = w - 2.0;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    w -= eta * mh / (std::sqrt(vh) + eps);
    std::tie(wm, s) = adam_step(wm, Matrix::from_rows({{wm(0, 0) - 2.0}}), s, eta);
    EXPECT_NEAR(wm(0, 0), w, 1e-14) << "step " << t;
  }
  EXPECT_NEAR(s.v(0, 0), v, 1e-14);
}

TEST(Adam, ShapeMismatchThrows) {
  AdamState s;
  s.m = Matrix(2, 2);
  s.v = Matrix(2, 2);
  EXPECT_THROW(adam_step(Matrix(3, 3), Matrix(3, 3), s, 0.1), std::invalid_argument);
  EXPECT_THROW(adam_step(Matrix(3, 3), Matrix(3, 2), AdamState{}, 0.1), std::invalid_argument);
}

TEST(Galore, FullRankGdIsPlainGd) {
  Rng rng(3);
  const Matrix w = rng.gaussian_matrix(5, 7);
  const Matrix g = rng.gaussian_matrix(5, 7);
  const auto [out, st] = galore_step(w, g, galore_init(5, 3), 0.05);
  EXPECT_LE(max_abs_diff(out, w - g * 0.05), 1e-12);
}

TEST(Galore, ZeroGradientAfterWarmupLeavesWeight) {
  Rng rng(4);
  Matrix w = rng.gaussian_matrix(4, 6);
  GaloreState s = galore_init(2, 4, 1.0, true);
  std::tie(w, s) = galore_step(w, rng.gaussian_matrix(4, 6), s, 0.1);
  s.inner->m = Matrix(2, 6);  // clear momentum so the numerator is zero
  const Matrix before = w;
  std::tie(w, s) = galore_step(w, Matrix(4, 6), s, 0.1);
  EXPECT_EQ(w, before);
}

TEST(Galore, RankTooLargeThrows) {
  EXPECT_THROW(galore_step(Matrix(3, 5), Matrix(3, 5), galore_init(4, 2), 0.1),
               std::invalid_argument);
  EXPECT_THROW(galore_init(0, 2), std::invalid_argument);
  EXPECT_THROW(galore_init(1, 0), std::invalid_argument);
}

TEST(Galore, RefreshCadenceAndConfinement) {
  Rng rng(5);
  const std::size_t m = 6, n = 9;
  for (bool adam : {false, true}) {
    Matrix w = rng.gaussian_matrix(m, n);
    GaloreState s = galore_init(2, 4, 0.5, adam);
    Matrix prev_p;
    for (long t = 0; t < 13; ++t) {
      const Matrix g = rng.gaussian_matrix(m, n);
      const auto [next_w, next_s] = galore_step(w, g, s, 0.1);
      if (t % 4 == 0) {
        const Matrix top = linalg::svd(g).u.col_range(0, 2);
        EXPECT_EQ(next_s.p, top) << "t " << t;
        EXPECT_LE(linalg::orthonormality_residual(next_s.p), 1e-10);
      } else {
        EXPECT_EQ(next_s.p, prev_p) << "t " << t;
      }
      const Matrix step = next_w - w;
      const Matrix resid = step - next_s.p * linalg::matmul_tn(next_s.p, step);
      EXPECT_LE(resid.max_abs(), 1e-12);
      prev_p = next_s.p;
      w = next_w;
      s = next_s;
    }
  }
}

TEST(Galore, TallWeightsUseRightProjector) {
  Rng rng(6);
  const Matrix w = rng.gaussian_matrix(8, 5);
  const Matrix g = rng.gaussian_matrix(8, 5);
  const GaloreState s0 = galore_init(2, 3);
  EXPECT_EQ(galore_side(s0, 8, 5), ProjectionSide::right);
  const auto [out, st] = galore_step(w, g, s0, 0.1);
  EXPECT_TRUE(st.p.empty());
  EXPECT_EQ(st.q.rows(), 5u);
  const Matrix step = out - w;
  EXPECT_LE((step - linalg::matmul_nt(step * st.q, st.q)).max_abs(), 1e-12);
}

TEST(Galore, TwoSidedProjectsBothSides) {
  Rng rng(7);
  const Matrix w = rng.gaussian_matrix(6, 6);
  const Matrix g = rng.gaussian_matrix(6, 6);
  const auto [out, st] = galore_step(w, g, galore_init(2, 3, 1.0, false, true), 0.1);
  const Matrix expect = w - st.p * linalg::matmul_tn(st.p, g) * linalg::matmul_nt(st.q, st.q) * 0.1;
  EXPECT_LE(max_abs_diff(out, expect), 1e-12);
}

TEST(Relora, PeriodOneIsProjectedGd) {
  Rng rng(8);
  const QuadraticProblem prob = make_quadratic_problem(6, 6, rng);
  const GradFn grad = [&](const Matrix& x) { return prob.gradient(x); };
  ReloraState s = relora_init(prob.w0, 2, 1);
  for (long t = 0; t < 5; ++t) {
    const Matrix w = s.effective();
    const Matrix g = prob.gradient(w);
    const Matrix p = linalg::svd(g).u.col_range(0, 2);
    s = relora_step(s, grad, 0.1, t);
    EXPECT_LE(max_abs_diff(s.effective(), w - p * linalg::matmul_tn(p, g) * 0.1), 1e-12);
  }
}

TEST(Relora, ResetDoesNotMoveEffectiveWeight) {
  Rng rng(9);
  const QuadraticProblem prob = make_quadratic_problem(5, 5, rng);
  const GradFn grad = [&](const Matrix& x) { return prob.gradient(x); };
  ReloraState s = relora_init(prob.w0, 2, 3);
  for (long t = 0; t < 3; ++t) s = relora_step(s, grad, 0.1, t);
  const Matrix before = s.effective();
  // Zero step size isolates the reset itself.
  const ReloraState r = relora_step(s, grad, 0.0, 3);
  EXPECT_EQ(r.a.max_abs(), 0.0);
  EXPECT_LE(max_abs_diff(r.effective(), before), 1e-15);
  EXPECT_LE(max_abs_diff(r.merged, before), 1e-15);
}

TEST(Relora, BFrozenBetweenResets) {
  Rng rng(10);
  const QuadraticProblem prob = make_quadratic_problem(6, 6, rng);
  const GradFn grad = [&](const Matrix& x) { return prob.gradient(x); };
  ReloraState s = relora_init(prob.w0, 2, 4);
  s = relora_step(s, grad, 0.1, 0);
  const Matrix b0 = s.b, merged0 = s.merged;
  for (long t = 1; t < 4; ++t) {
    s = relora_step(s, grad, 0.1, t);
    EXPECT_EQ(s.b, b0);
    EXPECT_EQ(s.merged, merged0);
  }
  EXPECT_THROW(relora_step(relora_init(prob.w0, 2, 4, false, true), grad, 0.1, 0),
               std::invalid_argument);
}

TEST(Equivalence, EightByEightExample) {
  Rng rng(11);
  const QuadraticProblem prob = make_quadratic_problem(8, 8, rng);
  const EquivalenceReport rep = verify_galore_relora_equivalence(prob, {2, 5, 0.1, 15});
  EXPECT_LE(rep.max_deviation, 1e-10);
  EXPECT_TRUE(rep.pass());
  const EquivalenceReport longer = verify_galore_relora_equivalence(prob, {2, 5, 0.1, 25});
  EXPECT_LE(longer.max_deviation, 1e-10);
}

TEST(Equivalence, PeriodOneIsExactToRounding) {
  Rng rng(12);
  const QuadraticProblem prob = make_quadratic_problem(7, 7, rng);
  EXPECT_LE(verify_galore_relora_equivalence(prob, {3, 1, 0.1, 10}).max_deviation, 1e-12);
}

TEST(Equivalence, QuantifiedOverRandomProblems) {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const std::size_t d = 2 + rng.next() % 15;
    const std::size_t r = 1 + rng.next() % (d / 2);
    const long period = 1 + static_cast<long>(rng.next() % 10);
    const QuadraticProblem prob = make_quadratic_problem(d, d, rng);
    EquivalenceConfig cfg{r, period, 0.1, 3 * period};
    const EquivalenceReport rep = verify_galore_relora_equivalence(prob, cfg);
    EXPECT_LE(rep.max_deviation, 1e-9) << "problem " << i;
    EXPECT_LE(rep.max_subspace_angle, 1e-8) << "problem " << i;
  }
}

TEST(Equivalence, RandomBNegativeControl) {
  Rng rng(14);
  int large = 0;
  for (int i = 0; i < 20; ++i) {
    const QuadraticProblem prob = make_quadratic_problem(8, 8, rng);
    EquivalenceConfig cfg{2, 5, 0.1, 15};
    cfg.random_b = true;
    cfg.seed = static_cast<std::uint64_t>(i);
    if (verify_galore_relora_equivalence(prob, cfg).max_deviation > 1e-3) ++large;
  }
  EXPECT_GE(large, 18);
}

TEST(Equivalence, AdamModeSoftCheck) {
  Rng rng(15);
  const QuadraticProblem prob = make_quadratic_problem(8, 8, rng);
  EquivalenceConfig cfg{2, 5, 0.01, 15};
  cfg.adam = true;
  EXPECT_LE(verify_galore_relora_equivalence(prob, cfg).max_deviation, 1e-8);
}

TEST(Equivalence, TallProblemRejected) {
  Rng rng(16);
  EXPECT_THROW(verify_galore_relora_equivalence(make_quadratic_problem(6, 4, rng), {}),
               std::invalid_argument);
}

TEST(Quadratic, GradientIsSymmetricAndPositive) {
  Rng rng(17);
  const QuadraticProblem prob = make_quadratic_problem(5, 3, rng);
  EXPECT_LE(max_abs_diff(prob.a, prob.a.transpose()), 0.0);
  for (double s : linalg::singular_values(prob.a)) {
    EXPECT_GE(s, 0.5 - 1e-12);
    EXPECT_LE(s, 1.5 + 1e-12);
  }
  EXPECT_EQ(prob.loss(prob.phi), 0.0);
  const Matrix w = rng.gaussian_matrix(5, 3);
  const Matrix dir = rng.gaussian_matrix(5, 3);
  const double h = 1e-6;
  const double fd = (prob.loss(w + dir * h) - prob.loss(w - dir * h)) / (2 * h);
  const Matrix g = prob.gradient(w);
  double inner = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) inner += g.data()[i] * dir.data()[i];
  EXPECT_NEAR(fd, inner, 1e-7);
}

TEST(Memory, FormulaAndJson) {
  const MemoryReport rep = galore_memory("fc1", 64, 256, 8);
  EXPECT_EQ(rep.full_adam_floats, 2u * 64 * 256);
  EXPECT_EQ(rep.galore_floats, 2u * 256 * 8 + 64u * 8);
  EXPECT_DOUBLE_EQ(rep.ratio, double(2 * 256 * 8 + 64 * 8) / double(2 * 64 * 256));
  EXPECT_EQ(galore_memory("t", 256, 64, 8).galore_floats, rep.galore_floats);
  EXPECT_THROW(galore_memory("x", 4, 4, 5), std::invalid_argument);
  const auto js = nlohmann::json::parse(memory_report_json({rep}));
  ASSERT_EQ(js.size(), 1u);
  EXPECT_EQ(js[0]["layer"], "fc1");
  EXPECT_EQ(js[0]["full_adam_floats"], 32768);
  EXPECT_EQ(js[0]["galore_floats"], 4608);
}

}  // namespace
}  // namespace lowrank::optim
