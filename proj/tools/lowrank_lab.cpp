// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

// lowrank-lab run <config.json> [--out DIR] [--seed N]
// lowrank-lab verify <suite>
// lowrank-lab sweep <config.json> --param NAME --values v1,v2,... [--out DIR] [--seed N]

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lowrank/runner/config.hpp"
#include "lowrank/runner/experiments.hpp"
#include "lowrank/runner/suites.hpp"

namespace {

using namespace lowrank::runner;

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    const std::string item = list.substr(pos, comma - pos);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ConfigError("bad sweep value '" + item + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

ExperimentConfig resolve(const std::string& path, const std::optional<std::string>& out,
                         const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg = load_config(path);
  if (out) cfg.output_dir = *out;
  if (seed) cfg.seed = *seed;
  validate_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lowrank-lab: low-rank training dynamics experiments and checks"};
  app.require_subcommand(1);

  std::string config_path, suite, param, values;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;

  CLI::App* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "Config JSON file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Seed (overrides the config)");

  CLI::App* verify = app.add_subcommand("verify", "Run a pinned acceptance bundle");
  verify->add_option("suite", suite, "One of: " + suite_list())->required();

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a config once per parameter value");
  sweep_cmd->add_option("config", config_path, "Config JSON file")->required();
  sweep_cmd->add_option("--param", param, "Numeric config field")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", out_dir, "Sweep root directory (overrides output_dir)");
  sweep_cmd->add_option("--seed", seed, "Base seed (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    write_diagnostic(std::cerr, "usage", e.what());
    return kExitConfig;
  }

  try {
    if (*run) return run_experiment(resolve(config_path, out_dir, seed), std::cerr);
    if (*verify) return verify_suite(suite, std::cout, std::cerr);
    if (*sweep_cmd) {
      const ExperimentConfig cfg = resolve(config_path, out_dir, seed);
      return lowrank::runner::sweep(cfg, param, parse_values(values), std::cerr);
    }
  } catch (const ConfigError& e) {
    write_diagnostic(std::cerr, "config", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
