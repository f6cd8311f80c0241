// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

#include "lowrank/linalg/matrix.hpp"

namespace lowrank::linalg {

// xoshiro256** seeded by four successive splitmix64 outputs of the 64-bit seed.
//
// uniform():  (next() >> 11) * 2^-53, in [0, 1).
// gaussian(): Box-Muller on one consecutive pair (u1, u2) of uniform() draws,
//             r = sqrt(-2 ln(1 - u1)), returning r*cos(2 pi u2) and then, on the
//             following call, the cached r*sin(2 pi u2).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian();
  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream seeded from this stream's next output.
  Rng fork() { return Rng(next()); }

  Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double stddev = 1.0);
  Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi);

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace lowrank::linalg
