// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "lowrank/adapters/lora.hpp"
#include "lowrank/linalg/decompositions.hpp"
#include "lowrank/oracles/finite_difference.hpp"

namespace lowrank::adapters {
namespace {

using linalg::Matrix;
using linalg::max_abs_diff;
using linalg::Rng;

Matrix quadratic_grad(const LoraAdapter& ad, const Matrix& target) {
  return ad.effective_weight() - target;
}

TEST(LoraInit, ZeroUpdateAtInit) {
  Rng rng(1);
  const Matrix base = rng.gaussian_matrix(10, 10);
  const LoraAdapter ad = lora_init(base, 3, rng);
  EXPECT_EQ(ad.b.max_abs(), 0.0);
  EXPECT_EQ(ad.effective_weight(), base);
  EXPECT_THROW(lora_init(base, 10, rng), std::invalid_argument);
  EXPECT_THROW(lora_init(base, 0, rng), std::invalid_argument);
}

TEST(LoraInit, VarianceScalesInverselyWithWidth) {
  Rng rng(2);
  const std::size_t d = 64;
  const LoraAdapter ad = lora_init(Matrix(d, d), 63, rng);
  double sum = 0.0, sq = 0.0;
  for (double v : ad.a.data()) {
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(ad.a.size());
  const double var = sq / n - (sum / n) * (sum / n);
  EXPECT_GE(var, 0.5 / d);
  EXPECT_LE(var, 2.0 / d);
}

TEST(LoraStep, FirstStepMovesOnlyB) {
  Rng rng(3);
  const Matrix base = rng.gaussian_matrix(6, 6);
  const Matrix target = rng.gaussian_matrix(6, 6);
  const LoraAdapter ad = lora_init(base, 2, rng);
  const LoraAdapter next = lora_step(ad, quadratic_grad(ad, target), 0.1);
  EXPECT_EQ(next.a, ad.a);
  EXPECT_GT(next.b.max_abs(), 0.0);
}

TEST(LoraStep, ZeroGradientLeavesAdapterUnchanged) {
  Rng rng(4);
  LoraAdapter ad = lora_init(Matrix(5, 5), 2, rng, LoraVariant::plus, 4.0);
  ad.b = rng.gaussian_matrix(5, 2);
  const LoraAdapter next = lora_step(ad, Matrix(5, 5), 0.3);
  EXPECT_EQ(next.a, ad.a);
  EXPECT_EQ(next.b, ad.b);
}

TEST(LoraStep, PlusWithUnitRatioIsVanillaBitForBit) {
  Rng r1(5), r2(5);
  const Matrix base = Rng(6).gaussian_matrix(8, 8);
  const Matrix target = Rng(7).gaussian_matrix(8, 8);
  LoraAdapter v = lora_init(base, 3, r1, LoraVariant::vanilla);
  LoraAdapter p = lora_init(base, 3, r2, LoraVariant::plus, 1.0);
  for (int t = 0; t < 200; ++t) {
    v = lora_step(v, quadratic_grad(v, target), 0.05);
    p = lora_step(p, quadratic_grad(p, target), 0.05);
    ASSERT_EQ(v.a, p.a);
    ASSERT_EQ(v.b, p.b);
  }
}

TEST(LoraStep, RankOneRecovery) {
  Rng rng(8);
  const std::size_t d = 6;
  const Matrix base = rng.gaussian_matrix(d, d);
  const Matrix delta = Matrix::column(rng.gaussian_matrix(d, 1).data()) *
                       rng.gaussian_matrix(1, d) * (1.0 / std::sqrt(double(d)));
  const Matrix target = base + delta;
  LoraAdapter ad = lora_init(base, 1, rng);
  for (int t = 0; t < 5000; ++t) ad = lora_step(ad, quadratic_grad(ad, target), 0.05);
  EXPECT_LE((ad.delta() - delta).frobenius_norm(), 1e-6);
}

TEST(LoraStep, FactorGradientsMatchFiniteDifferences) {
  Rng rng(9);
  const Matrix target = rng.gaussian_matrix(5, 4);
  for (LoraVariant variant : {LoraVariant::vanilla, LoraVariant::deep}) {
    for (int trial = 0; trial < 20; ++trial) {
      LoraAdapter ad;
      ad.base = rng.gaussian_matrix(5, 4);
      ad.variant = variant;
      ad.b = rng.gaussian_matrix(variant == LoraVariant::deep ? 2 : 5, 2);
      ad.a = rng.gaussian_matrix(2, 4);
      if (variant == LoraVariant::deep) ad.c = rng.gaussian_matrix(5, 2);
      const LoraGradients g = lora_factor_gradients(ad, quadratic_grad(ad, target));
      auto loss = [&](const std::vector<Matrix>& f) {
        LoraAdapter probe = ad;
        probe.b = f[0];
        probe.a = f[1];
        if (variant == LoraVariant::deep) probe.c = f[2];
        return 0.5 * (probe.effective_weight() - target).squared_norm();
      };
      std::vector<Matrix> params = {ad.b, ad.a};
      std::vector<Matrix> analytic = {g.b, g.a};
      if (variant == LoraVariant::deep) {
        params.push_back(ad.c);
        analytic.push_back(g.c);
      }
      const auto numeric = oracles::finite_difference_gradient(loss, params);
      EXPECT_LE(oracles::relative_error(analytic, numeric), 1e-6);
    }
  }
}

TEST(LoraStep, RankBoundAtEveryStep) {
  Rng rng(10);
  const Matrix base = rng.gaussian_matrix(12, 12);
  const Matrix target = rng.gaussian_matrix(12, 12);
  LoraAdapter v = lora_init(base, 3, rng);
  LoraAdapter p = lora_init(base, 3, rng, LoraVariant::plus, 4.0);
  LoraAdapter dl = deep_lora_init(base, 3, base - target, rng);
  for (int t = 0; t < 50; ++t) {
    v = lora_step(v, quadratic_grad(v, target), 0.05);
    p = lora_step(p, quadratic_grad(p, target), 0.05);
    dl = lora_step(dl, quadratic_grad(dl, target), 0.05);
    ASSERT_LE(linalg::numerical_rank(v.delta()), 3u);
    ASSERT_LE(linalg::numerical_rank(p.delta()), 3u);
    ASSERT_LE(linalg::numerical_rank(dl.delta()), 3u);
  }
}

TEST(LoraStep, NormGrowthAsymmetryAndPlusOrdering) {
  // Fine-tuning regime: the target update is small next to the base weight.
  for (std::uint64_t seed = 11; seed < 16; ++seed) {
    Rng rng(seed);
    const std::size_t d = 32;
    const Matrix base = rng.gaussian_matrix(d, d, 1.0 / std::sqrt(double(d)));
    const Matrix target =
        base + rng.gaussian_matrix(d, 4) * rng.gaussian_matrix(4, d) * (0.5 / d);
    Rng r1(seed + 100), r2(seed + 100);
    LoraAdapter v = lora_init(base, 4, r1);
    LoraAdapter p = lora_init(base, 4, r2, LoraVariant::plus, 4.0);
    const double a0 = v.a.frobenius_norm();
    for (int t = 0; t < 100; ++t) {
      v = lora_step(v, quadratic_grad(v, target), 0.05);
      p = lora_step(p, quadratic_grad(p, target), 0.05);
    }
    EXPECT_GT(v.b.frobenius_norm(), 0.1) << "seed " << seed;
    EXPECT_LT(std::abs(v.a.frobenius_norm() - a0), 0.1 * a0) << "seed " << seed;
    const double loss_v = 0.5 * quadratic_grad(v, target).squared_norm();
    const double loss_p = 0.5 * quadratic_grad(p, target).squared_norm();
    EXPECT_LE(loss_p, loss_v) << "seed " << seed;
  }
}

TEST(DeepLoraInit, TinyInitialUpdateAndScaledOrthogonalFactors) {
  Rng rng(13);
  const std::size_t d = 64, r = 8;
  const Matrix base = rng.gaussian_matrix(d, d);
  const Matrix grad = rng.gaussian_matrix(d, d);
  const double eps = 1e-3;
  const LoraAdapter ad = deep_lora_init(base, r, grad, rng);
  EXPECT_LE(ad.delta().frobenius_norm(), eps * eps * eps * r);
  EXPECT_LE(max_abs_diff(linalg::matmul_tn(ad.c, ad.c), Matrix::identity(r) * (eps * eps)), 1e-10);
  EXPECT_LE(max_abs_diff(linalg::matmul_nt(ad.a, ad.a), Matrix::identity(r) * (eps * eps)), 1e-10);
  EXPECT_EQ(ad.b, Matrix::identity(r) * eps);
  EXPECT_THROW(deep_lora_init(base, d + 1, grad, rng), std::invalid_argument);
}

TEST(DeepLoraInit, TopSubspaceAlignsWithGradient) {
  Rng rng(14);
  const Matrix grad = rng.gaussian_matrix(10, 10);
  const LoraAdapter ad = deep_lora_init(Matrix(10, 10), 3, grad, rng);
  const linalg::SvdResult f = linalg::svd(grad);
  EXPECT_LE(linalg::max_principal_angle(ad.c * 1e3, f.u.col_range(0, 3)), 1e-10);
}

TEST(DeepLoraInit, BottomSubspaceOfLowRankGradientIsStationary) {
  // For a low-rank task gradient the bottom singular directions lie outside
  // its range, so every factor gradient vanishes and training never starts.
  Rng rng(15);
  const std::size_t d = 16;
  const Matrix base = rng.gaussian_matrix(d, d);
  const Matrix target = base + rng.gaussian_matrix(d, 2) * rng.gaussian_matrix(2, d);
  LoraAdapter ad = deep_lora_init(base, 4, base - target, rng, {1e-3, 1e-2, GradientSubspace::bottom});
  const LoraGradients g = lora_factor_gradients(ad, quadratic_grad(ad, target));
  EXPECT_LE(g.a.max_abs(), 1e-12);
  EXPECT_LE(g.b.max_abs(), 1e-12);
  EXPECT_LE(g.c.max_abs(), 1e-12);
}

TEST(DeepLoraRank, FindsLowerRankThanVanilla) {
  LoraTaskConfig cfg;
  cfg.seed = 3;
  const LoraTaskResult res = run_lora_rank_experiment(cfg);
  EXPECT_EQ(res.deep_rank, 2u);
  EXPECT_EQ(res.vanilla_rank, 8u);
  EXPECT_LT(res.deep_signal_error, 0.2);
}

}  // namespace
}  // namespace lowrank::adapters
