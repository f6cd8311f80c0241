// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace lowrank {

// One row of report.json.
struct CheckRecord {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// gap = |lhs − rhs|, pass iff gap ≤ tolerance.
CheckRecord make_check(std::string name, double lhs, double rhs, double tolerance);

// pass iff value ≤ bound; lhs = value, rhs = bound, gap = value.
CheckRecord make_bound_check(std::string name, double value, double bound);

// pass iff value > bound; fields as in make_bound_check.
CheckRecord make_lower_bound_check(std::string name, double value, double bound);

bool all_pass(const std::vector<CheckRecord>& checks);

// Pretty-printed JSON array; numbers use shortest round-trip form.
std::string checks_to_json(const std::vector<CheckRecord>& checks);

}  // namespace lowrank
