// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/oracles/grid_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lowrank::oracles {

std::vector<double> grid_search_squared_nuclear(const std::vector<double>& s, double c,
                                                double step) {
  const std::size_t k = s.size();
  if (k == 0 || k > 3) throw std::invalid_argument("grid_search_squared_nuclear: need 1..3 values");
  const double top = *std::max_element(s.begin(), s.end());
  const long n = static_cast<long>(std::floor(top / step + 1e-9)) + 1;
  std::vector<long> idx(k, 0);
  std::vector<double> best(k, 0.0);
  double best_val = std::numeric_limits<double>::infinity();
  for (;;) {
    double fit = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double z = static_cast<double>(idx[i]) * step;
      fit += (s[i] - z) * (s[i] - z);
      sum += z;
    }
    const double val = fit + c * sum * sum;
    if (val < best_val) {
      best_val = val;
      for (std::size_t i = 0; i < k; ++i) best[i] = static_cast<double>(idx[i]) * step;
    }
    std::size_t pos = 0;
    while (pos < k && ++idx[pos] == n) idx[pos++] = 0;
    if (pos == k) break;
  }
  return best;
}

}  // namespace lowrank::oracles
