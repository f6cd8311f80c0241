// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lowrank::runner {

enum class ExperimentKind {
  dln_dynamics,
  lora_finetune,
  galore_train,
  relora_train,
  equivalence_suite,
  dropout_suite,
  margin_suite,
  lsq_bias,
};

const char* kind_name(ExperimentKind kind);

// Bad or unknown keys, wrong types, or values outside a module's preconditions.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat experiment description. Unset fields take the defaults of the chosen
// kind (see defaults_for); keys a kind does not use are accepted and ignored.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::dln_dynamics;
  std::size_t d = 30;
  std::size_t k = 30;
  std::size_t r = 3;
  std::size_t L = 3;
  std::size_t d_h = 3;
  std::size_t n = 256;
  std::size_t target_rank = 2;
  double eps = 1.0;
  double eta = 0.01;
  double lambda = 0.0;
  double gamma = 1.0;
  long steps = 500;
  long T = 10;
  long record_every = 10;
  double mu = 1.0;
  bool adam = false;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

ExperimentConfig defaults_for(ExperimentKind kind);

// Parses a flat JSON object; "kind" is required. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);

// Reads and parses a file. Throws ConfigError, including for unreadable files.
ExperimentConfig load_config(const std::string& path);

// Every field, in a fixed order, as pretty-printed JSON.
std::string config_to_json(const ExperimentConfig& cfg);

// Checks the field ranges the chosen kind relies on. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

// Names accepted by set_numeric_field.
const std::vector<std::string>& numeric_fields();

// Assigns a numeric field by name; integer fields require an integral,
// non-negative value. Throws ConfigError for unknown names or bad values.
void set_numeric_field(ExperimentConfig& cfg, const std::string& name, double value);

}  // namespace lowrank::runner
