// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "lowrank/linalg/matrix.hpp"

namespace lowrank::oracles {

using linalg::Matrix;
using ScalarFn = std::function<double(const std::vector<Matrix>&)>;

// Central differences (f(θ + h e_i) − f(θ − h e_i)) / 2h over every entry.
std::vector<Matrix> finite_difference_gradient(const ScalarFn& f, const std::vector<Matrix>& params,
                                               double h = 1e-5);

// ‖a − b‖ / max(‖a‖, ‖b‖) over the concatenated entries; 0 when both vanish.
double relative_error(const std::vector<Matrix>& a, const std::vector<Matrix>& b);

}  // namespace lowrank::oracles
