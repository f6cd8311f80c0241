// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/oracles/finite_difference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lowrank::oracles {

std::vector<Matrix> finite_difference_gradient(const ScalarFn& f, const std::vector<Matrix>& params,
                                               double h) {
  std::vector<Matrix> probe = params;
  std::vector<Matrix> grads;
  for (std::size_t p = 0; p < probe.size(); ++p) {
    Matrix g(probe[p].rows(), probe[p].cols());
    for (std::size_t i = 0; i < probe[p].size(); ++i) {
      const double saved = probe[p].data()[i];
      probe[p].data()[i] = saved + h;
      const double up = f(probe);
      probe[p].data()[i] = saved - h;
      const double down = f(probe);
      probe[p].data()[i] = saved;
      g.data()[i] = (up - down) / (2.0 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double relative_error(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_error: list sizes differ");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    diff += (a[p] - b[p]).squared_norm();
    na += a[p].squared_norm();
    nb += b[p].squared_norm();
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

}  // namespace lowrank::oracles
