// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace lowrank::oracles {

// Exhaustive minimisation of Σ(s_i − z_i)² + c(Σ z_i)² over the grid
// z ∈ {0, step, 2·step, …}^k ∩ [0, max s]^k, k = s.size() ≤ 3.
std::vector<double> grid_search_squared_nuclear(const std::vector<double>& s, double c,
                                                double step = 1e-3);

}  // namespace lowrank::oracles
