// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

// Raised when a numerical kernel cannot produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Training loss exceeded the divergence threshold.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, long step, double loss)
      : NumericalError(what), step_(step), loss_(loss) {}
  long step() const { return step_; }
  double loss() const { return loss_; }

 private:
  long step_;
  double loss_;
};

}  // namespace lowrank
