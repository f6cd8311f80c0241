// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lowrank/linalg/rng.hpp"
#include "lowrank/network/mlp.hpp"

namespace lowrank::oracles {

struct GradcheckOutcome {
  double relative_error = 0.0;
  int resamples = 0;  // instances discarded for sitting too close to a ReLU kink
};

// Random deep linear net (depth 1..4, widths 1..6) against dln_gradients.
GradcheckOutcome dln_gradcheck(linalg::Rng& rng, double h = 1e-5);

// Random MLP against mlp_forward_backward. Inputs carry a 1e-4 perturbation;
// ReLU instances with any |preactivation| below kink_margin are redrawn.
// Half of the instances use fixed dropout masks.
GradcheckOutcome mlp_gradcheck(linalg::Rng& rng, network::Activation act, network::LossKind loss,
                               double h = 1e-5, double kink_margin = 1e-3);

}  // namespace lowrank::oracles
