// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/runner/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

namespace lowrank::runner {

namespace {

using nlohmann::ordered_json;

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::dln_dynamics, "dln_dynamics"},
    {ExperimentKind::lora_finetune, "lora_finetune"},
    {ExperimentKind::galore_train, "galore_train"},
    {ExperimentKind::relora_train, "relora_train"},
    {ExperimentKind::equivalence_suite, "equivalence_suite"},
    {ExperimentKind::dropout_suite, "dropout_suite"},
    {ExperimentKind::margin_suite, "margin_suite"},
    {ExperimentKind::lsq_bias, "lsq_bias"},
};

ExperimentKind kind_from_name(const std::string& name) {
  for (const auto& [kind, label] : kKindNames) {
    if (name == label) return kind;
  }
  throw ConfigError("unknown kind '" + name + "'");
}

// Integer fields: name -> member.
struct SizeField {
  const char* name;
  std::size_t ExperimentConfig::*member;
};
struct LongField {
  const char* name;
  long ExperimentConfig::*member;
};
struct RealField {
  const char* name;
  double ExperimentConfig::*member;
};

constexpr SizeField kSizeFields[] = {
    {"d", &ExperimentConfig::d},     {"k", &ExperimentConfig::k},
    {"r", &ExperimentConfig::r},     {"L", &ExperimentConfig::L},
    {"d_h", &ExperimentConfig::d_h}, {"n", &ExperimentConfig::n},
    {"target_rank", &ExperimentConfig::target_rank},
};
constexpr LongField kLongFields[] = {
    {"steps", &ExperimentConfig::steps},
    {"T", &ExperimentConfig::T},
    {"record_every", &ExperimentConfig::record_every},
};
constexpr RealField kRealFields[] = {
    {"eps", &ExperimentConfig::eps},     {"eta", &ExperimentConfig::eta},
    {"lambda", &ExperimentConfig::lambda}, {"gamma", &ExperimentConfig::gamma},
    {"mu", &ExperimentConfig::mu},
};

// Integral value in [0, limit]; JSON integers and integral floats both pass.
std::uint64_t integral(const std::string& name, double v, double limit) {
  if (!std::isfinite(v) || v < 0.0 || v != std::floor(v) || v > limit) {
    throw ConfigError("field '" + name + "' must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

std::uint64_t json_integral(const std::string& name, const ordered_json& v, double limit) {
  if (v.is_number_unsigned()) {
    const std::uint64_t u = v.get<std::uint64_t>();
    if (static_cast<double>(u) > limit) throw ConfigError("field '" + name + "' is too large");
    return u;
  }
  if (v.is_number_integer()) throw ConfigError("field '" + name + "' must be non-negative");
  if (v.is_number_float()) return integral(name, v.get<double>(), limit);
  throw ConfigError("field '" + name + "' must be a number");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
  for (const auto& [k, label] : kKindNames) {
    if (k == kind) return label;
  }
  return "unknown";
}

ExperimentConfig defaults_for(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::dln_dynamics:
      break;
    case ExperimentKind::lora_finetune:
      c.d = 64;
      c.r = 8;
      c.target_rank = 2;
      c.eps = 1e-3;
      c.eta = 0.1;
      c.gamma = 1e-2;
      c.steps = 10000;
      break;
    case ExperimentKind::galore_train:
    case ExperimentKind::relora_train:
      c.d = 16;
      c.k = 8;
      c.r = 2;
      c.T = 10;
      c.eta = 0.1;
      c.steps = 100;
      break;
    case ExperimentKind::equivalence_suite:
      c.d = 16;
      c.k = 8;
      c.r = 2;
      c.T = 5;
      c.eta = 0.1;
      c.steps = 15;
      break;
    case ExperimentKind::dropout_suite:
      c.d = 20;
      c.k = 20;
      c.target_rank = 15;
      c.n = 256;
      c.mu = 0.4;
      c.steps = 2000;
      c.record_every = 100;
      break;
    case ExperimentKind::margin_suite:
      c.L = 2;
      c.eta = 0.1;
      c.steps = 100000;
      c.record_every = 10000;
      break;
    case ExperimentKind::lsq_bias:
      c.n = 2;
      c.d = 5;
      c.eta = 0.1;
      c.steps = 20000;
      c.record_every = 1000;
      break;
  }
  return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  require(j.is_object(), "config must be a JSON object");
  require(j.contains("kind") && j["kind"].is_string(), "missing string field 'kind'");
  ExperimentConfig c = defaults_for(kind_from_name(j["kind"].get<std::string>()));

  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    bool known = false;
    for (const auto& f : kSizeFields) {
      if (key == f.name) {
        c.*f.member = static_cast<std::size_t>(json_integral(key, value, 1e9));
        known = true;
      }
    }
    for (const auto& f : kLongFields) {
      if (key == f.name) {
        c.*f.member = static_cast<long>(json_integral(key, value, 1e12));
        known = true;
      }
    }
    for (const auto& f : kRealFields) {
      if (key == f.name) {
        require(value.is_number(), "field '" + key + "' must be a number");
        c.*f.member = value.get<double>();
        known = true;
      }
    }
    if (key == "seed") {
      c.seed = json_integral(key, value, 1.8e19);
      known = true;
    } else if (key == "adam") {
      require(value.is_boolean(), "field 'adam' must be a boolean");
      c.adam = value.get<bool>();
      known = true;
    } else if (key == "output_dir") {
      require(value.is_string(), "field 'output_dir' must be a string");
      c.output_dir = value.get<std::string>();
      known = true;
    }
    if (!known) throw ConfigError("unknown key '" + key + "'");
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["kind"] = kind_name(c.kind);
  for (const auto& f : kSizeFields) j[f.name] = c.*f.member;
  for (const auto& f : kRealFields) j[f.name] = c.*f.member;
  for (const auto& f : kLongFields) j[f.name] = c.*f.member;
  j["adam"] = c.adam;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

void validate_config(const ExperimentConfig& c) {
  require(std::isfinite(c.eta) && c.eta > 0.0, "eta must be positive");
  require(std::isfinite(c.lambda) && c.lambda >= 0.0, "lambda must be >= 0");
  require(std::isfinite(c.gamma) && c.gamma > 0.0, "gamma must be positive");
  require(std::isfinite(c.eps) && c.eps > 0.0, "eps must be positive");
  require(c.mu > 0.0 && c.mu <= 1.0, "mu must lie in (0, 1]");
  require(c.record_every >= 1, "record_every must be >= 1");
  require(!c.output_dir.empty(), "output_dir must not be empty");

  switch (c.kind) {
    case ExperimentKind::dln_dynamics:
      require(c.L >= 2, "dln_dynamics needs L >= 2");
      require(c.r >= 1 && c.d >= 2 * c.r + 1, "dln_dynamics needs r >= 1 and d >= 2r + 1");
      require(c.k >= c.r && c.k <= c.d, "dln_dynamics needs r <= k <= d");
      require(c.eta * c.lambda < 1.0, "dln_dynamics needs eta * lambda < 1");
      break;
    case ExperimentKind::lora_finetune:
      require(c.r >= 1 && c.r < c.d, "lora_finetune needs 1 <= r < d");
      require(c.target_rank >= 1 && c.target_rank <= c.d, "lora_finetune needs 1 <= target_rank <= d");
      break;
    case ExperimentKind::galore_train:
    case ExperimentKind::relora_train:
    case ExperimentKind::equivalence_suite:
      require(c.d >= 1 && c.k >= 1, "matrix dimensions must be >= 1");
      require(c.r >= 1 && c.r <= std::min(c.d, c.k), "need 1 <= r <= min(k, d)");
      require(c.T >= 1, "T must be >= 1");
      if (c.kind == ExperimentKind::equivalence_suite) {
        require(c.k <= c.d, "equivalence_suite needs k <= d");
      }
      break;
    case ExperimentKind::dropout_suite:
      require(c.L >= 2, "dropout_suite needs L >= 2");
      require(c.d >= 1 && c.k >= 1 && c.n >= 1 && c.d_h >= 1, "dimensions must be >= 1");
      require(c.target_rank >= 1 && c.target_rank <= std::min(c.d, c.k),
              "dropout_suite needs 1 <= target_rank <= min(d, k)");
      break;
    case ExperimentKind::margin_suite:
      require(c.L >= 1, "margin_suite needs L >= 1");
      require(c.eta <= 0.5, "margin_suite needs eta <= 0.5 (unit-norm points)");
      break;
    case ExperimentKind::lsq_bias:
      require(c.n >= 1 && c.n < c.d, "lsq_bias needs 1 <= n < d");
      break;
  }
}

const std::vector<std::string>& numeric_fields() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : kSizeFields) out.emplace_back(f.name);
    for (const auto& f : kLongFields) out.emplace_back(f.name);
    for (const auto& f : kRealFields) out.emplace_back(f.name);
    out.emplace_back("seed");
    return out;
  }();
  return names;
}

void set_numeric_field(ExperimentConfig& c, const std::string& name, double value) {
  for (const auto& f : kSizeFields) {
    if (name == f.name) {
      c.*f.member = static_cast<std::size_t>(integral(name, value, 1e9));
      return;
    }
  }
  for (const auto& f : kLongFields) {
    if (name == f.name) {
      c.*f.member = static_cast<long>(integral(name, value, 1e12));
      return;
    }
  }
  for (const auto& f : kRealFields) {
    if (name == f.name) {
      require(std::isfinite(value), "field '" + name + "' must be finite");
      c.*f.member = value;
      return;
    }
  }
  if (name == "seed") {
    c.seed = integral(name, value, 9.0e15);
    return;
  }
  throw ConfigError("'" + name + "' is not a numeric config field");
}

}  // namespace lowrank::runner
