// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/runner/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lowrank/adapters/lora.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/linalg/decompositions.hpp"
#include "lowrank/network/deep_linear_net.hpp"
#include "lowrank/network/invariants.hpp"
#include "lowrank/network/mlp.hpp"
#include "lowrank/optim/optimizers.hpp"
#include "lowrank/regeq/dropout.hpp"
#include "lowrank/regeq/implicit_bias.hpp"

namespace lowrank::runner {

namespace fs = std::filesystem;
using linalg::Matrix;
using linalg::Rng;
using network::TraceKind;

namespace {

double as_double(std::size_t v) { return static_cast<double>(v); }

ExperimentOutcome run_dln(const ExperimentConfig& c) {
  Rng rng(c.seed);
  const std::vector<double> eps(c.L, c.eps);
  const network::DeepLinearNet net = network::make_orthogonal_dln(c.d, c.k, eps, rng);
  const Matrix phi = network::make_low_rank_target({c.d, c.k, c.r, c.seed + 1});
  const network::TrainResult res =
      network::train_gd(net, phi, {c.eta, c.lambda, c.steps, c.record_every, c.seed});

  network::InvariantCheckConfig ic;
  ic.r = c.r;
  ic.eps = eps;
  ic.eta = c.eta;
  ic.lambda = c.lambda;
  ic.wide = c.k < c.d;
  ic.thresholds = {1e-8, 1e-6, 1e-5, 1e-8};
  const network::VerificationReport rep =
      network::verify_invariant_subspaces(res.trace, res.snapshots, phi, ic);

  ExperimentOutcome out;
  out.trace = rep.trace;
  out.checks.push_back(make_bound_check("repeated_block_spread", rep.max_spread, 1e-8));
  out.checks.push_back(make_bound_check("bottom_subspace_angle_left", rep.max_angle_left, 1e-6));
  out.checks.push_back(make_bound_check("bottom_subspace_angle_right", rep.max_angle_right, 1e-6));
  out.checks.push_back(make_bound_check("cross_layer_alignment", rep.max_align, 1e-5));
  out.checks.push_back(make_bound_check("repeated_value_recursion", rep.max_rho_error, 1e-8));
  if (ic.wide) {
    out.checks.push_back(make_bound_check("repeated_value_closed_form", rep.max_closed_form_error, 1e-9));
  }
  out.metrics = {{"initial_loss", res.losses.front()},
                 {"final_loss", res.losses.back()},
                 {"max_spread", rep.max_spread},
                 {"max_angle", std::max(rep.max_angle_left, rep.max_angle_right)},
                 {"max_align", rep.max_align},
                 {"max_rho_error", rep.max_rho_error},
                 {"final_repeated_value", rep.entries.empty() ? 0.0 : rep.entries.back().rho_measured}};
  return out;
}

ExperimentOutcome run_lora(const ExperimentConfig& c) {
  adapters::LoraTaskConfig lc;
  lc.d = c.d;
  lc.r = c.r;
  lc.true_rank = c.target_rank;
  lc.eta = c.eta;
  lc.deep_eta = 5.0 * c.eta;
  lc.gamma_outer = c.gamma;
  lc.eps = c.eps;
  lc.steps = c.steps;
  lc.seed = c.seed;
  const adapters::LoraTaskResult res = adapters::run_lora_rank_experiment(lc);
  if (!std::isfinite(res.vanilla_loss) || !std::isfinite(res.deep_loss)) {
    throw DivergenceError("lora_finetune: non-finite loss", c.steps, res.vanilla_loss);
  }
  ExperimentOutcome out;
  out.trace.add_values(1, c.steps, TraceKind::sv, res.vanilla_spectrum);
  out.trace.add_values(2, c.steps, TraceKind::sv, res.deep_spectrum);
  out.checks.push_back(make_check("deep_rank_matches_target", as_double(res.deep_rank),
                                  as_double(c.target_rank), 0.0));
  out.checks.push_back(make_bound_check("deep_rank_not_above_vanilla", as_double(res.deep_rank),
                                        as_double(res.vanilla_rank)));
  out.metrics = {{"vanilla_rank", as_double(res.vanilla_rank)},
                 {"deep_rank", as_double(res.deep_rank)},
                 {"vanilla_loss", res.vanilla_loss},
                 {"deep_loss", res.deep_loss},
                 {"deep_signal_error", res.deep_signal_error}};
  return out;
}

void guard(double loss, long step, const char* what) {
  if (!std::isfinite(loss) || loss > network::kDivergenceLoss) {
    throw DivergenceError(std::string(what) + ": loss diverged at step " + std::to_string(step), step, loss);
  }
}

ExperimentOutcome run_projected(const ExperimentConfig& c) {
  const bool galore = c.kind == ExperimentKind::galore_train;
  Rng rng(c.seed);
  const optim::QuadraticProblem prob = optim::make_quadratic_problem(c.k, c.d, rng);
  Rng reinit = rng.fork();
  ExperimentOutcome out;
  auto record = [&](long t, const Matrix& w) { out.trace.add_values(1, t, TraceKind::sv, linalg::singular_values(w)); };

  const double initial = prob.loss(prob.w0);
  Matrix w = prob.w0;
  record(0, w);
  if (galore) {
    optim::GaloreState st = optim::galore_init(c.r, c.T, 1.0, c.adam);
    for (long t = 1; t <= c.steps; ++t) {
      std::tie(w, st) = optim::galore_step(w, prob.gradient(w), st, c.eta);
      guard(prob.loss(w), t, "galore_train");
      if (t % c.record_every == 0 || t == c.steps) record(t, w);
    }
  } else {
    optim::ReloraState st = optim::relora_init(prob.w0, c.r, c.T, c.adam);
    const optim::GradFn grad = [&](const Matrix& x) { return prob.gradient(x); };
    for (long t = 1; t <= c.steps; ++t) {
      st = optim::relora_step(st, grad, c.eta, t - 1, &reinit);
      w = st.effective();
      guard(prob.loss(w), t, "relora_train");
      if (t % c.record_every == 0 || t == c.steps) record(t, w);
    }
  }
  const double final_loss = prob.loss(w);
  const optim::MemoryReport mem = optim::galore_memory("w", c.k, c.d, c.r);
  const std::size_t lo = std::min(c.k, c.d), hi = std::max(c.k, c.d);
  out.checks.push_back(make_bound_check("loss_not_increased", final_loss, initial));
  out.checks.push_back(make_check("galore_state_floats", as_double(mem.galore_floats),
                                  as_double(2 * hi * c.r + lo * c.r), 0.0));
  out.metrics = {{"initial_loss", initial}, {"final_loss", final_loss}, {"memory_ratio", mem.ratio}};
  return out;
}

ExperimentOutcome run_equivalence(const ExperimentConfig& c) {
  Rng rng(c.seed);
  const optim::QuadraticProblem prob = optim::make_quadratic_problem(c.k, c.d, rng);
  optim::EquivalenceConfig ec;
  ec.r = c.r;
  ec.period = c.T;
  ec.eta = c.eta;
  ec.steps = c.steps;
  ec.adam = c.adam;
  ec.seed = c.seed;
  const optim::EquivalenceReport rep = optim::verify_galore_relora_equivalence(prob, ec);
  ec.random_b = true;
  const optim::EquivalenceReport control = optim::verify_galore_relora_equivalence(prob, ec);
  ExperimentOutcome out;
  out.checks.push_back(make_bound_check("galore_relora_max_deviation", rep.max_deviation, 1e-9));
  out.checks.push_back(make_bound_check("projector_subspace_angle", rep.max_subspace_angle, 1e-8));
  out.checks.push_back(make_lower_bound_check("random_b_control_deviation", control.max_deviation, 1e-3));
  out.metrics = {{"max_deviation", rep.max_deviation},
                 {"max_subspace_angle", rep.max_subspace_angle},
                 {"control_deviation", control.max_deviation}};
  return out;
}

ExperimentOutcome run_dropout(const ExperimentConfig& c) {
  network::DropoutRankConfig dc;
  dc.d = c.d;
  dc.hidden_layers = c.L - 1;
  dc.k = c.k;
  dc.target_rank = c.target_rank;
  dc.n = c.n;
  dc.mu = c.mu;
  dc.eta = c.eta;
  dc.steps = c.steps;
  dc.record_every = c.record_every;
  dc.seed = c.seed;
  const network::DropoutRankResult res = network::run_dropout_rank_experiment(dc);

  ExperimentOutcome out;
  out.trace = res.trace;

  // Expected objective against Monte Carlo on a small instance.
  Rng rng(c.seed + 0x5bd1e995u);
  regeq::DropoutProblem p;
  p.x = rng.gaussian_matrix(3, 5);
  p.y = rng.gaussian_matrix(2, 5);
  p.d_h = c.d_h;
  p.mu = c.mu;
  const Matrix w1 = rng.gaussian_matrix(c.d_h, 3, 0.5);
  const Matrix w2 = rng.gaussian_matrix(2, c.d_h, 0.5);
  const regeq::MonteCarloEstimate mc = regeq::dropout_mc_objective(p, w1, w2, 100000, rng);
  const double exact = regeq::dropout_deterministic_objective(p, w1, w2);
  const double z = mc.stderr_ > 0.0 ? (mc.mean - exact) / mc.stderr_ : (mc.mean == exact ? 0.0 : INFINITY);
  out.checks.push_back(make_bound_check("mc_expectation_zscore", std::abs(z), 3.0));

  // Factorized problem against the squared-nuclear prox with X = I.
  regeq::DropoutProblem q;
  const std::size_t rank = std::min<std::size_t>(3, c.d_h);
  q.x = Matrix::identity(3);
  q.y = rng.gaussian_matrix(3, rank) * rng.gaussian_matrix(rank, 3) * (1.0 / std::sqrt(as_double(rank)));
  q.d_h = c.d_h;
  q.mu = c.mu;
  regeq::DropoutEquivalenceOptions opts;
  opts.seed = c.seed;
  const regeq::DropoutEquivalenceReport eq = regeq::dropout_global_equivalence(q, opts);
  out.checks.push_back(make_bound_check("factorized_vs_prox_objective_gap", std::abs(eq.objective_gap), 1e-3));

  out.metrics = {{"initial_rank", as_double(res.initial_rank)},
                 {"final_rank", as_double(res.final_rank)},
                 {"final_loss", res.losses.back()},
                 {"mc_zscore", z},
                 {"objective_gap", eq.objective_gap}};
  return out;
}

regeq::MarginProblem symmetric_pair() { return {{{{1.0, 0.0}, 1}, {{-1.0, 0.0}, -1}}}; }
regeq::MarginProblem orthogonal_pair() { return {{{{1.0, 0.0}, 1}, {{0.0, 1.0}, -1}}}; }

ExperimentOutcome run_margin(const ExperimentConfig& c) {
  ExperimentOutcome out;
  const double tol = c.L == 1 ? 1e-2 : 2e-2;
  const std::pair<const char*, regeq::MarginProblem> problems[] = {
      {"symmetric_pair", symmetric_pair()}, {"orthogonal_pair", orthogonal_pair()}};
  for (const auto& [name, prob] : problems) {
    regeq::ExpLossOptions o;
    o.depth = c.L;
    o.eta = c.eta;
    o.steps = c.steps;
    o.seed = c.seed;
    const regeq::ExpLossResult r = regeq::exp_loss_trainer(prob, o);
    const double angle = regeq::vector_angle(r.direction, regeq::max_margin_oracle(prob).direction);
    out.checks.push_back(make_lower_bound_check(std::string(name) + "_separated",
                                                static_cast<double>(r.separated_at), -1.0));
    out.checks.push_back(make_bound_check(std::string(name) + "_angle_to_max_margin", angle, tol));
    out.metrics.push_back({std::string(name) + "_angle", angle});
    out.metrics.push_back({std::string(name) + "_separated_at", static_cast<double>(r.separated_at)});
  }
  return out;
}

ExperimentOutcome run_lsq(const ExperimentConfig& c) {
  Rng rng(c.seed);
  const Matrix x = rng.gaussian_matrix(c.n, c.d, 1.0 / std::sqrt(as_double(c.d)));
  const Matrix y = rng.gaussian_matrix(c.n, 1);
  const regeq::LeastSquaresReport rep = regeq::least_squares_bias_check(x, y, Matrix(c.d, 1), c.eta, c.steps);
  ExperimentOutcome out;
  out.checks.push_back(make_bound_check("rowspan_confinement_every_iterate", rep.max_rowspan_residual, 1e-10));
  out.checks.push_back(make_bound_check("limit_vs_min_norm_solution", rep.limit_error, 1e-6));
  out.metrics = {{"max_rowspan_residual", rep.max_rowspan_residual}, {"limit_error", rep.limit_error}};
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

void clear_outputs(const fs::path& dir) {
  std::error_code ec;
  for (const char* name : {kTraceFile, kReportFile, kEchoFile, kFailedFile}) {
    fs::remove(dir / name, ec);
    fs::remove(dir / (std::string(name) + ".tmp"), ec);
  }
}

// Best effort: the directory ends up holding only the marker.
void leave_marker(const fs::path& dir, const std::string& line) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  clear_outputs(dir);
  std::ofstream f(dir / kFailedFile, std::ios::binary | std::ios::trunc);
  f << line << '\n';
}

std::string diagnostic_line(const std::string& code, const std::string& detail) {
  return "lowrank-lab: error=" + code + " detail=" + nlohmann::json(detail).dump();
}

}  // namespace

ExperimentOutcome execute(const ExperimentConfig& cfg) {
  validate_config(cfg);
  switch (cfg.kind) {
    case ExperimentKind::dln_dynamics:
      return run_dln(cfg);
    case ExperimentKind::lora_finetune:
      return run_lora(cfg);
    case ExperimentKind::galore_train:
    case ExperimentKind::relora_train:
      return run_projected(cfg);
    case ExperimentKind::equivalence_suite:
      return run_equivalence(cfg);
    case ExperimentKind::dropout_suite:
      return run_dropout(cfg);
    case ExperimentKind::margin_suite:
      return run_margin(cfg);
    case ExperimentKind::lsq_bias:
      return run_lsq(cfg);
  }
  throw ConfigError("unhandled kind");
}

void write_diagnostic(std::ostream& diag, const std::string& code, const std::string& detail) {
  diag << diagnostic_line(code, detail) << std::endl;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& diag, ExperimentOutcome* outcome) {
  const fs::path dir = cfg.output_dir;
  auto fail = [&](const std::string& code, const std::string& detail, int exit_code) {
    write_diagnostic(diag, code, detail);
    if (code != "config") leave_marker(dir, diagnostic_line(code, detail));
    return exit_code;
  };

  ExperimentOutcome out;
  try {
    out = execute(cfg);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), kExitConfig);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), kExitConfig);
  } catch (const DivergenceError& e) {
    return fail("divergence", e.what(), kExitDivergence);
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), kExitDivergence);
  }

  std::ostringstream trace;
  out.trace.write_csv(trace);
  try {
    fs::create_directories(dir);
    clear_outputs(dir);
    write_file(dir / kTraceFile, trace.str());
    write_file(dir / kReportFile, checks_to_json(out.checks));
    write_file(dir / kEchoFile, config_to_json(cfg));
  } catch (const std::exception& e) {
    return fail("io", e.what(), kExitConfig);
  }

  const bool pass = all_pass(out.checks);
  if (!pass) {
    std::string failed;
    for (const CheckRecord& c : out.checks) {
      if (!c.pass) failed += (failed.empty() ? "" : ",") + c.check;
    }
    write_diagnostic(diag, "check_failed", failed);
  }
  if (outcome) *outcome = std::move(out);
  return pass ? kExitPass : kExitCheckFailed;
}

int sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<double>& values,
          std::ostream& diag) {
  if (values.empty()) {
    write_diagnostic(diag, "config", "sweep needs at least one value");
    return kExitConfig;
  }
  std::vector<ExperimentConfig> members;
  try {
    for (std::size_t i = 0; i < values.size(); ++i) {
      ExperimentConfig m = cfg;
      m.seed = cfg.seed + i;
      set_numeric_field(m, param, values[i]);
      m.output_dir = (fs::path(cfg.output_dir) / (param + "-" + std::to_string(i))).string();
      validate_config(m);
      members.push_back(std::move(m));
    }
  } catch (const ConfigError& e) {
    write_diagnostic(diag, "config", e.what());
    return kExitConfig;
  }

  std::vector<int> codes;
  std::vector<ExperimentOutcome> outcomes(members.size());
  std::vector<std::string> metric_names;
  for (std::size_t i = 0; i < members.size(); ++i) {
    codes.push_back(run_experiment(members[i], diag, &outcomes[i]));
    if (metric_names.empty()) {
      for (const Metric& m : outcomes[i].metrics) metric_names.push_back(m.name);
    }
  }

  std::ostringstream csv;
  csv << "index,param,value,seed,exit_code";
  for (const std::string& n : metric_names) csv << ',' << n;
  csv << '\n';
  for (std::size_t i = 0; i < members.size(); ++i) {
    csv << i << ',' << param << ',' << format_number(values[i]) << ',' << members[i].seed << ',' << codes[i];
    for (const std::string& n : metric_names) {
      csv << ',';
      for (const Metric& m : outcomes[i].metrics) {
        if (m.name == n) csv << format_number(m.value);
      }
    }
    csv << '\n';
  }
  try {
    fs::create_directories(cfg.output_dir);
    write_file(fs::path(cfg.output_dir) / kSweepSummaryFile, csv.str());
  } catch (const std::exception& e) {
    write_diagnostic(diag, "io", e.what());
    return kExitConfig;
  }
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace lowrank::runner
