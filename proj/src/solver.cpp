#include "pire/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "kernels.hpp"
#include "pire/fista.hpp"

namespace pire {

namespace {

using Clock = std::chrono::steady_clock;
using State = SmoothLoss::State;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

// Step parameter for a Lipschitz constant. A zero constant (a block whose
// columns are all zero) still needs a positive mu.
double mu_for(double margin, double L) {
  return margin * std::max(L, std::numeric_limits<double>::min()) / 2.0;
}

struct StepContext {
  const Problem& problem;
  const SolverConfig& cfg;
  const BlockStructure& blocks;
  std::vector<double>& mu;
  int& doublings;
  const Vector& w;
  const Vector& x;
  State& state;
  double hx;
};

void note_doubling(const SolverConfig& cfg, int& doublings) {
  if (++doublings > cfg.max_doublings) {
    throw ConfigError("backtracking exhausted " + std::to_string(cfg.max_doublings) +
                      " doublings without satisfying the descent test");
  }
}

void prox_block(const Problem& p, const Vector& w, double mu, const Vector& b, Vector& out,
                std::span<const Index> idx) {
  if (p.lambda > 0.0) {
    p.regularizer.prox_indices(w, p.lambda, mu, b, out, idx);
  } else {
    for (Index i : idx) out[i] = b[i];
  }
}

// x+ = prox(w, lambda, mu, x - grad h(x) / mu) on the whole vector.
void pire_step(StepContext& c, Vector& xn, State& sn) {
  const SmoothLoss& loss = c.problem.loss;
  const auto all = iota_indices(loss.dim());
  Vector g(loss.dim());
  loss.gradient_at(c.state, all, g);
  for (;;) {
    const double mu = c.mu[0];
    const Vector b = c.x - g / mu;
    xn = c.problem.lambda > 0.0 ? c.problem.regularizer.prox(c.w, c.problem.lambda, mu, b) : b;
    sn = loss.evaluate(xn);
    if (!c.cfg.backtracking) return;
    const Vector delta = xn - c.x;
    const double bound = c.hx + kernels::dot(g.data(), delta.data(), delta.size()) +
                         mu * kernels::squared_norm(delta.data(), delta.size());
    if (loss.value(sn) <= bound) return;
    note_doubling(c.cfg, c.doublings);
    c.mu[0] *= c.cfg.backtracking_factor;
  }
}

// Jacobi sweep: every block reads only the snapshot x^k, writes only itself.
void ps_step(StepContext& c, Vector& xn, State& sn) {
  const SmoothLoss& loss = c.problem.loss;
  const Index S = c.blocks.count();
  const Index n = loss.dim();
  Vector g(n);
  Vector b(n);
  xn.resize(n);

  for (;;) {
    const auto run_block = [&](Index s) {
      const auto idx = c.blocks.block(s);
      loss.gradient_at(c.state, idx, g);
      const double mu = c.mu[static_cast<std::size_t>(s)];
      for (Index i : idx) b[i] = c.x[i] - g[i] / mu;
      prox_block(c.problem, c.w, mu, b, xn, idx);
    };

    const int workers = static_cast<int>(std::min<Index>(c.cfg.workers, S));
    if (workers <= 1) {
      for (Index s = 0; s < S; ++s) run_block(s);
    } else {
      std::exception_ptr failure;
      std::mutex failure_mutex;
      const auto worker = [&](int r) {
        try {
          for (Index s = r; s < S; s += workers) run_block(s);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      };
      {
        std::vector<std::jthread> pool;
        for (int r = 1; r < workers; ++r) pool.emplace_back(worker, r);
        worker(0);
      }
      if (failure) std::rethrow_exception(failure);
    }

    sn = loss.evaluate(xn);
    if (!c.cfg.backtracking) return;
    const Vector delta = xn - c.x;
    double quad = 0.0;
    for (Index s = 0; s < S; ++s) {
      double sq = 0.0;
      for (Index i : c.blocks.block(s)) sq += delta[i] * delta[i];
      quad += c.mu[static_cast<std::size_t>(s)] * sq;
    }
    const double bound = c.hx + kernels::dot(g.data(), delta.data(), n) + quad;
    if (loss.value(sn) <= bound) return;
    note_doubling(c.cfg, c.doublings);
    for (double& m : c.mu) m *= c.cfg.backtracking_factor;
  }
}

// Gauss-Seidel sweep in ascending block order; the cached state follows the
// partially updated point.
void au_step(StepContext& c, Vector& xn, State& sn) {
  const SmoothLoss& loss = c.problem.loss;
  const Index n = loss.dim();
  Vector g(n);
  Vector b(n);
  xn = c.x;
  for (Index s = 0; s < c.blocks.count(); ++s) {
    const auto idx = c.blocks.block(s);
    loss.gradient_at(c.state, idx, g);
    double& mu = c.mu[static_cast<std::size_t>(s)];
    for (;;) {
      for (Index i : idx) b[i] = c.x[i] - g[i] / mu;
      prox_block(c.problem, c.w, mu, b, xn, idx);
      if (!c.cfg.backtracking) {
        loss.shift(c.state, idx, c.x, xn);
        break;
      }
      const double before = loss.value(c.state);
      State trial = c.state;
      loss.shift(trial, idx, c.x, xn);
      double lin = 0.0;
      double sq = 0.0;
      for (Index i : idx) {
        const double d = xn[i] - c.x[i];
        lin += g[i] * d;
        sq += d * d;
      }
      if (loss.value(trial) <= before + lin + mu * sq) {
        c.state = std::move(trial);
        break;
      }
      note_doubling(c.cfg, c.doublings);
      mu *= c.cfg.backtracking_factor;
    }
  }
  sn = loss.evaluate(xn);
}

template <class StepFn>
SolveResult run(const Problem& p, const SolverConfig& cfg, const BlockStructure& blocks,
                std::vector<double> lipschitz, std::vector<double> mu, StepFn step) {
  const auto start = Clock::now();
  const SmoothLoss& loss = p.loss;

  ConcavePenalty pen = p.penalty;
  if (cfg.epsilon_schedule && pen.uses_epsilon()) {
    pen = pen.with_epsilon(cfg.epsilon_schedule->epsilon0);
  }

  SolveResult result;
  result.lipschitz = std::move(lipschitz);

  Vector x = initial_point(p, cfg);
  State state = loss.evaluate(x);
  double hx = loss.value(state);
  Vector gx = p.regularizer.value(x);
  double F = p.lambda * pen.value(gx) + hx;
  if (!std::isfinite(F)) throw NumericFailure("non-finite objective at the start point", {});
  Vector w = pen.weight(gx);
  result.trace.push_back({0, F, F, 0.0, 0.0, pen.epsilon(), ms_since(start)});
  if (cfg.keep_iterates) result.iterates.push_back(x);

  result.termination = Termination::MaxIter;
  int k = 0;
  Vector xn;
  State sn;
  while (k < cfg.max_iter) {
    StepContext ctx{p, cfg, blocks, mu, result.backtracking_doublings, w, x, state, hx};
    step(ctx, xn, sn);
    ++k;

    const double hn = loss.value(sn);
    const Vector gn = p.regularizer.value(xn);
    const double F_step = p.lambda * pen.value(gn) + hn;
    const double step_norm = (xn - x).norm();
    const double xnorm = x.norm();
    const double rel = xnorm > 0.0 ? step_norm / xnorm : step_norm;

    if (cfg.epsilon_schedule && pen.uses_epsilon()) {
      const double next = std::max(pen.epsilon() / cfg.epsilon_schedule->rho, cfg.epsilon_floor);
      if (next > 0.0 && next != pen.epsilon()) pen = pen.with_epsilon(next);
    }
    const double F_next =
        (cfg.epsilon_schedule && pen.uses_epsilon()) ? p.lambda * pen.value(gn) + hn : F_step;
    result.trace.push_back({k, F_next, F_step, step_norm, rel, pen.epsilon(), ms_since(start)});
    if (!std::isfinite(F_step) || !std::isfinite(F_next)) {
      throw NumericFailure("non-finite objective at iteration " + std::to_string(k),
                           std::move(result.trace));
    }
    w = pen.weight(gn);
    x.swap(xn);
    std::swap(state, sn);
    hx = hn;
    if (cfg.keep_iterates) result.iterates.push_back(x);

    if (rel <= cfg.tol) {
      result.termination = Termination::Tolerance;
      break;
    }
    if (cfg.time_budget_seconds > 0.0 && ms_since(start) > 1e3 * cfg.time_budget_seconds) {
      result.termination = Termination::TimeBudget;
      break;
    }
  }

  result.iterations = k;
  result.objective = result.trace.back().objective;
  result.final_epsilon = pen.epsilon();
  result.mu = std::move(mu);
  Problem final_problem{pen, p.regularizer, p.loss, p.lambda};
  result.stationarity_residual =
      stationarity_residual(final_problem, x, *std::max_element(result.mu.begin(), result.mu.end()));
  result.x = std::move(x);
  result.elapsed_ms = ms_since(start);
  return result;
}

const BlockStructure& require_blocks(const Problem& p, const SolverConfig& cfg) {
  if (!cfg.blocks) throw ConfigError(to_string(cfg.variant) + " needs a block structure");
  if (cfg.blocks->dim() != p.loss.dim()) {
    throw ConfigError("block structure covers " + std::to_string(cfg.blocks->dim()) +
                      " variables, the problem has " + std::to_string(p.loss.dim()));
  }
  if (!p.regularizer.respects(*cfg.blocks)) {
    throw ConfigError("a regularizer group straddles two blocks");
  }
  return *cfg.blocks;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::PIRE:
      return "pire";
    case Variant::PIRE_PS:
      return "pire_ps";
    case Variant::PIRE_AU:
      return "pire_au";
  }
  return "unknown";
}

void Problem::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be >= 0");
  if (loss.dim() != regularizer.input_dim()) {
    throw DimensionError("loss variable has dimension " + std::to_string(loss.dim()) +
                         ", regularizer expects " + std::to_string(regularizer.input_dim()));
  }
}

double objective_value(const Problem& p, const VectorRef& x) {
  p.validate();
  const double h = p.loss.value(x);
  if (p.lambda == 0.0) return h;
  return p.lambda * p.penalty.value(p.regularizer.value(x)) + h;
}

void SolverConfig::validate() const {
  if (!(mu_margin > 1.0)) throw ConfigError("mu_margin must exceed 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (max_iter <= 0) throw ConfigError("max_iter must be positive");
  if (!(epsilon_floor >= 0.0)) throw ConfigError("epsilon floor must be nonnegative");
  if (epsilon_schedule) epsilon_schedule->validate();
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (backtracking && !(backtracking_factor > 1.0)) {
    throw ConfigError("backtracking factor must exceed 1");
  }
  if (mu0 < 0.0) throw ConfigError("mu0 must be nonnegative");
  if (time_budget_seconds < 0.0) throw ConfigError("time budget must be nonnegative");
  if ((variant == Variant::PIRE_PS || variant == Variant::PIRE_AU) && !blocks) {
    throw ConfigError(to_string(variant) + " needs a block structure");
  }
}

Vector initial_point(const Problem& p, const SolverConfig& cfg) {
  const Index n = p.loss.dim();
  switch (cfg.init) {
    case InitKind::Zeros:
      return Vector::Zero(n);
    case InitKind::Given:
      if (cfg.x0.size() != n) {
        throw DimensionError("initial point has dimension " + std::to_string(cfg.x0.size()) +
                             ", expected " + std::to_string(n));
      }
      return cfg.x0;
    case InitKind::L1Warm: {
      FistaOptions opts;
      opts.tol = cfg.l1_tol;
      opts.max_iter = cfg.l1_max_iter;
      opts.record_trace = false;
      const Vector ones = Vector::Ones(p.regularizer.output_dim());
      return fista(p.loss, p.regularizer, ones, p.lambda, Vector::Zero(n), opts).x;
    }
  }
  return Vector::Zero(n);
}

SolveResult solve_pire(const Problem& p, const SolverConfig& cfg) {
  p.validate();
  cfg.validate();
  if (cfg.variant != Variant::PIRE) throw ConfigError("solve_pire called with another variant");
  const BlockStructure whole = BlockStructure::single(p.loss.dim());
  double L = std::numeric_limits<double>::quiet_NaN();
  double mu;
  if (cfg.backtracking && cfg.mu0 > 0.0) {
    mu = cfg.mu0;
  } else {
    L = p.loss.lipschitz();
    mu = mu_for(cfg.mu_margin, L);
  }
  return run(p, cfg, whole, {L}, {mu}, pire_step);
}

SolveResult solve_pire_ps(const Problem& p, const SolverConfig& cfg) {
  p.validate();
  cfg.validate();
  if (cfg.variant != Variant::PIRE_PS) throw ConfigError("solve_pire_ps called with another variant");
  const BlockStructure& blocks = require_blocks(p, cfg);
  const auto S = static_cast<std::size_t>(blocks.count());
  std::vector<double> lip;
  std::vector<double> mu(S);
  if (cfg.backtracking && cfg.mu0 > 0.0) {
    lip.assign(S, std::numeric_limits<double>::quiet_NaN());
    std::fill(mu.begin(), mu.end(), cfg.mu0);
  } else if (cfg.use_block_lipschitz) {
    if (p.loss.kind() == LossKind::Logistic) {
      throw ConfigError("per-block Lipschitz constants in the Jacobi sweep need a squared loss");
    }
    lip = p.loss.block_lipschitz(blocks);
    for (std::size_t s = 0; s < S; ++s) mu[s] = mu_for(cfg.mu_margin, lip[s]);
  } else {
    lip.assign(S, p.loss.lipschitz());
    for (std::size_t s = 0; s < S; ++s) mu[s] = mu_for(cfg.mu_margin, lip[s]);
  }
  return run(p, cfg, blocks, std::move(lip), std::move(mu), ps_step);
}

SolveResult solve_pire_au(const Problem& p, const SolverConfig& cfg) {
  p.validate();
  cfg.validate();
  if (cfg.variant != Variant::PIRE_AU) throw ConfigError("solve_pire_au called with another variant");
  const BlockStructure& blocks = require_blocks(p, cfg);
  const auto S = static_cast<std::size_t>(blocks.count());
  std::vector<double> lip;
  std::vector<double> mu(S);
  if (cfg.backtracking && cfg.mu0 > 0.0) {
    lip.assign(S, std::numeric_limits<double>::quiet_NaN());
    std::fill(mu.begin(), mu.end(), cfg.mu0);
  } else {
    lip = p.loss.block_lipschitz(blocks);
    for (std::size_t s = 0; s < S; ++s) mu[s] = mu_for(cfg.mu_margin, lip[s]);
  }
  return run(p, cfg, blocks, std::move(lip), std::move(mu), au_step);
}

SolveResult solve(const Problem& p, const SolverConfig& cfg) {
  switch (cfg.variant) {
    case Variant::PIRE:
      return solve_pire(p, cfg);
    case Variant::PIRE_PS:
      return solve_pire_ps(p, cfg);
    case Variant::PIRE_AU:
      return solve_pire_au(p, cfg);
  }
  throw ConfigError("unknown variant");
}

double stationarity_residual(const Problem& p, const VectorRef& x, double mu) {
  p.validate();
  if (!(mu > 0.0)) throw ParameterError("stationarity residual needs mu > 0");
  if (x.size() != p.loss.dim()) throw DimensionError("point has the wrong dimension");
  const Vector b = x - p.loss.gradient(x) / mu;
  if (p.lambda == 0.0) return (x - b).lpNorm<Eigen::Infinity>();
  const Vector w = p.penalty.weight(p.regularizer.value(x));
  return (x - p.regularizer.prox(w, p.lambda, mu, b)).lpNorm<Eigen::Infinity>();
}

}  // namespace pire
