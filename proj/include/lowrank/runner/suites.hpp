// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lowrank/checks.hpp"

namespace lowrank::runner {

struct CriterionResult {
  std::vector<CheckRecord> checks;
  std::vector<std::string> info;  // informational, never gates the result
  double seconds = 0.0;
};

// One acceptance criterion with pinned seeds and tolerances. The time limit
// is added as a runtime check by run_criterion.
struct Criterion {
  int id;
  const char* name;
  const char* suite;
  double time_limit_s;
  CriterionResult (*body)();
};

const std::vector<Criterion>& acceptance_criteria();

CriterionResult run_criterion(const Criterion& c);

// Comma-separated suite names.
std::string suite_list();

// Runs every criterion of the suite, prints a check table to out and returns
// 0 when all pass, 1 otherwise, 2 for an unknown suite.
int verify_suite(const std::string& suite, std::ostream& out, std::ostream& diag);

}  // namespace lowrank::runner
