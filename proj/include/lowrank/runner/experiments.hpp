// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lowrank/checks.hpp"
#include "lowrank/network/training.hpp"
#include "lowrank/runner/config.hpp"

namespace lowrank::runner {

enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitDivergence = 3,
};

struct Metric {
  std::string name;
  double value = 0.0;
};

struct ExperimentOutcome {
  network::SpectrumTrace trace;
  std::vector<CheckRecord> checks;
  std::vector<Metric> metrics;  // fixed order per kind
};

// Runs the experiment in memory. Throws ConfigError or std::invalid_argument
// on violated preconditions and NumericalError (including DivergenceError) on
// numerical failure.
ExperimentOutcome execute(const ExperimentConfig& cfg);

// File names written into the output directory.
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kEchoFile = "config.echo.json";
inline constexpr const char* kFailedFile = "FAILED";
inline constexpr const char* kSweepSummaryFile = "sweep_summary.csv";

// One line: `lowrank-lab: error=<code> detail=<json string>`.
void write_diagnostic(std::ostream& diag, const std::string& code, const std::string& detail);

// Executes cfg and writes trace.csv, report.json and config.echo.json into
// cfg.output_dir. Returns an ExitCode. Config errors write nothing; other
// errors leave only the FAILED marker in the directory.
int run_experiment(const ExperimentConfig& cfg, std::ostream& diag,
                   ExperimentOutcome* outcome = nullptr);

// Member i uses seed cfg.seed + i, param = values[i] and output directory
// <cfg.output_dir>/<param>-<i>; sweep_summary.csv in cfg.output_dir lists
// index, value, seed, exit code and the final metrics of each member. Every
// member is validated before any runs. Returns the largest member exit code.
int sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<double>& values,
          std::ostream& diag);

// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

}  // namespace lowrank::runner
