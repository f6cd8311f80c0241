// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "lowrank/optim/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "lowrank/linalg/decompositions.hpp"

namespace lowrank::optim {

using linalg::matmul_nt;
using linalg::matmul_tn;

Matrix adam_direction(AdamState& s, const Matrix& g) {
  if (s.m.empty()) {
    s.m = Matrix(g.rows(), g.cols());
    s.v = Matrix(g.rows(), g.cols());
  }
  if (s.m.rows() != g.rows() || s.m.cols() != g.cols()) {
    throw std::invalid_argument("adam: moment shape " + s.m.shape_string() +
                                " does not match gradient " + g.shape_string());
  }
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  Matrix n(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double gi = g.data()[i];
    double& m = s.m.data()[i];
    double& v = s.v.data()[i];
    m = s.beta1 * m + (1.0 - s.beta1) * gi;
    v = s.beta2 * v + (1.0 - s.beta2) * gi * gi;
    n.data()[i] = (m / c1) / (std::sqrt(v / c2) + s.eps_stab);
  }
  return n;
}

std::pair<Matrix, AdamState> adam_step(const Matrix& w, const Matrix& grad, const AdamState& state,
                                       double eta) {
  if (w.rows() != grad.rows() || w.cols() != grad.cols()) {
    throw std::invalid_argument("adam_step: gradient shape does not match weight");
  }
  AdamState next = state;
  const Matrix n = adam_direction(next, grad);
  Matrix out = w;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= eta * n.data()[i];
  return {std::move(out), std::move(next)};
}

GaloreState galore_init(std::size_t r, long period, double alpha, bool adam, bool two_sided) {
  if (r < 1) throw std::invalid_argument("galore_init: rank must be >= 1");
  if (period < 1) throw std::invalid_argument("galore_init: period must be >= 1");
  GaloreState s;
  s.rank = r;
  s.period = period;
  s.alpha = alpha;
  s.two_sided = two_sided;
  if (adam) s.inner = AdamState{};
  return s;
}

ProjectionSide galore_side(const GaloreState& state, std::size_t m, std::size_t n) {
  if (state.two_sided) return ProjectionSide::two_sided;
  return m <= n ? ProjectionSide::left : ProjectionSide::right;
}

std::pair<Matrix, GaloreState> galore_step(const Matrix& w, const Matrix& grad,
                                           const GaloreState& state, double eta) {
  const std::size_t m = w.rows(), n = w.cols();
  if (grad.rows() != m || grad.cols() != n) {
    throw std::invalid_argument("galore_step: gradient shape does not match weight");
  }
  if (state.rank > std::min(m, n)) {
    throw std::invalid_argument("galore_step: rank " + std::to_string(state.rank) +
                                " exceeds min dimension of " + w.shape_string());
  }
  GaloreState next = state;
  const ProjectionSide side = galore_side(state, m, n);
  const bool use_left = side != ProjectionSide::right;
  const bool use_right = side != ProjectionSide::left;
  if (state.t % state.period == 0) {
    const linalg::SvdResult f = linalg::svd(grad);
    if (use_left) next.p = f.u.col_range(0, state.rank);
    if (use_right) next.q = f.v.col_range(0, state.rank);
  }
  Matrix r = grad;
  if (use_left) r = matmul_tn(next.p, r);
  if (use_right) r = r * next.q;
  Matrix dir = next.inner ? adam_direction(*next.inner, r) : r;
  if (use_left) dir = next.p * dir;
  if (use_right) dir = matmul_nt(dir, next.q);
  Matrix out = w;
  const double rate = eta * state.alpha;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= rate * dir.data()[i];
  ++next.t;
  return {std::move(out), std::move(next)};
}

Matrix ReloraState::effective() const {
  if (b.empty()) return merged;
  return merged + b * a;
}

ReloraState relora_init(const Matrix& w0, std::size_t r, long period, bool adam, bool random_b) {
  if (r < 1 || r > std::min(w0.rows(), w0.cols())) {
    throw std::invalid_argument("relora_init: need 1 <= r <= min dims");
  }
  if (period < 1) throw std::invalid_argument("relora_init: period must be >= 1");
  ReloraState s;
  s.merged = w0;
  s.rank = r;
  s.period = period;
  s.random_b = random_b;
  if (adam) s.inner = AdamState{};
  return s;
}

ReloraState relora_step(const ReloraState& state, const GradFn& grad_fn, double eta, long t,
                        linalg::Rng* rng) {
  ReloraState next = state;
  const std::size_t m = state.merged.rows(), n = state.merged.cols();
  Matrix g;
  if (t % state.period == 0 || next.b.empty()) {
    if (!next.b.empty()) next.merged += next.b * next.a;
    g = grad_fn(next.merged);
    if (state.random_b) {
      if (rng == nullptr) throw std::invalid_argument("relora_step: random_b requires an rng");
      next.b = rng->gaussian_matrix(m, state.rank, 1.0 / std::sqrt(static_cast<double>(m)));
    } else {
      next.b = linalg::svd(g).u.col_range(0, state.rank);
    }
    next.a = Matrix(state.rank, n);
  } else {
    g = grad_fn(next.effective());
  }
  const Matrix grad_a = matmul_tn(next.b, g);
  const Matrix dir = next.inner ? adam_direction(*next.inner, grad_a) : grad_a;
  for (std::size_t i = 0; i < next.a.size(); ++i) next.a.data()[i] -= eta * dir.data()[i];
  return next;
}

double QuadraticProblem::loss(const Matrix& w) const {
  const Matrix e = w - phi;
  double s = 0.0;
  const Matrix ae = a * e;
  for (std::size_t i = 0; i < e.size(); ++i) s += e.data()[i] * ae.data()[i];
  return 0.5 * s;
}

Matrix QuadraticProblem::gradient(const Matrix& w) const { return a * (w - phi); }

QuadraticProblem make_quadratic_problem(std::size_t m, std::size_t n, linalg::Rng& rng) {
  if (m == 0 || n == 0) throw std::invalid_argument("make_quadratic_problem: empty shape");
  const Matrix q = linalg::random_scaled_orthogonal(m, 1.0, rng);
  std::vector<double> lam(m);
  for (double& l : lam) l = rng.uniform(0.5, 1.5);
  QuadraticProblem p;
  p.a = q * matmul_nt(Matrix::diag(lam), q);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) p.a(i, j) = p.a(j, i);
  }
  p.phi = rng.gaussian_matrix(m, n);
  p.w0 = rng.gaussian_matrix(m, n);
  return p;
}

EquivalenceReport verify_galore_relora_equivalence(const QuadraticProblem& problem,
                                                   const EquivalenceConfig& cfg) {
  const std::size_t m = problem.w0.rows(), n = problem.w0.cols();
  if (m > n) {
    throw std::invalid_argument("verify_galore_relora_equivalence: needs m <= n (left projector)");
  }
  if (cfg.steps < 0 || !(cfg.eta > 0.0)) {
    throw std::invalid_argument("verify_galore_relora_equivalence: invalid schedule");
  }
  EquivalenceReport rep;
  rep.tolerance = 1e-10 * (1.0 + problem.w0.max_abs());
  linalg::Rng rng(cfg.seed);
  Matrix w = problem.w0;
  GaloreState gs = galore_init(cfg.r, cfg.period, 1.0, cfg.adam);
  ReloraState rs = relora_init(problem.w0, cfg.r, cfg.period, cfg.adam, cfg.random_b);
  const GradFn grad_fn = [&](const Matrix& x) { return problem.gradient(x); };
  for (long t = 0; t < cfg.steps; ++t) {
    std::tie(w, gs) = galore_step(w, problem.gradient(w), gs, cfg.eta);
    rs = relora_step(rs, grad_fn, cfg.eta, t, &rng);
    rep.max_deviation = std::max(rep.max_deviation, linalg::max_abs_diff(w, rs.effective()));
    const Matrix b_basis = cfg.random_b ? linalg::orthonormal_basis(rs.b) : rs.b;
    const double angle = b_basis.cols() == gs.p.cols()
                             ? linalg::max_principal_angle(gs.p, b_basis)
                             : std::numbers::pi / 2;
    rep.max_subspace_angle = std::max(rep.max_subspace_angle, angle);
  }
  return rep;
}

MemoryReport galore_memory(const std::string& layer, std::size_t m, std::size_t n, std::size_t r) {
  if (r < 1 || r > std::min(m, n)) throw std::invalid_argument("galore_memory: need 1 <= r <= min dims");
  MemoryReport rep;
  rep.layer = layer;
  rep.full_adam_floats = 2 * m * n;
  rep.galore_floats = 2 * std::max(m, n) * r + std::min(m, n) * r;
  rep.ratio = static_cast<double>(rep.galore_floats) / static_cast<double>(rep.full_adam_floats);
  return rep;
}

std::string memory_report_json(const std::vector<MemoryReport>& layers) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const MemoryReport& r : layers) {
    out.push_back({{"layer", r.layer},
                   {"full_adam_floats", r.full_adam_floats},
                   {"galore_floats", r.galore_floats},
                   {"ratio", r.ratio}});
  }
  return out.dump(2);
}

}  // namespace lowrank::optim
