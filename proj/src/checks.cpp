// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/checks.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

namespace lowrank {

CheckRecord make_check(std::string name, double lhs, double rhs, double tolerance) {
  CheckRecord c;
  c.check = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.gap = std::abs(lhs - rhs);
  c.tolerance = tolerance;
  c.pass = c.gap <= tolerance;
  return c;
}

CheckRecord make_bound_check(std::string name, double value, double bound) {
  CheckRecord c;
  c.check = std::move(name);
  c.lhs = value;
  c.rhs = bound;
  c.gap = value;
  c.tolerance = bound;
  c.pass = value <= bound;
  return c;
}

CheckRecord make_lower_bound_check(std::string name, double value, double bound) {
  CheckRecord c = make_bound_check(std::move(name), value, bound);
  c.pass = value > bound;
  return c;
}

bool all_pass(const std::vector<CheckRecord>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

namespace {

// JSON has no NaN or infinity; those become null.
nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string checks_to_json(const std::vector<CheckRecord>& checks) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const CheckRecord& c : checks) {
    out.push_back({{"check", c.check},
                   {"lhs", number(c.lhs)},
                   {"rhs", number(c.rhs)},
                   {"gap", number(c.gap)},
                   {"tolerance", number(c.tolerance)},
                   {"pass", c.pass}});
  }
  return out.dump(2) + "\n";
}

}  // namespace lowrank
