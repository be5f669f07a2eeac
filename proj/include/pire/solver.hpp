#pragma once

#include <optional>
#include <string>

#include "pire/blocks.hpp"
#include "pire/loss.hpp"
#include "pire/penalty.hpp"
#include "pire/regularizer.hpp"
#include "pire/result.hpp"

namespace pire {

/// F(x) = lambda f(g(x)) + h(x).
struct Problem {
  ConcavePenalty penalty;
  Regularizer regularizer;
  SmoothLoss loss;
  double lambda = 0.0;

  void validate() const;
};

double objective_value(const Problem& p, const VectorRef& x);

enum class Variant { PIRE, PIRE_PS, PIRE_AU };
enum class InitKind { Zeros, Given, L1Warm };

std::string to_string(Variant v);

struct SolverConfig {
  Variant variant = Variant::PIRE;
  double mu_margin = 1.01;  // mu = mu_margin * L / 2
  double tol = 1e-6;
  int max_iter = 10000;
  // When set, the run starts at epsilon0 (overriding the penalty's own
  // offset) and divides it by rho after every update, down to epsilon_floor.
  std::optional<EpsilonSchedule> epsilon_schedule;
  double epsilon_floor = 1e-10;

  std::optional<BlockStructure> blocks;
  // PIRE-PS: per-block constants L_s (squared losses only) instead of the
  // global L. PIRE-AU always uses per-block constants.
  bool use_block_lipschitz = true;

  InitKind init = InitKind::Zeros;
  Vector x0;
  int l1_max_iter = 100000;
  double l1_tol = 1e-6;

  // Doubling search on mu with the test
  //   h(x+) <= h(x) + <grad h(x), x+ - x> + sum_s mu_s ||x+_s - x_s||^2.
  // The enlarged mu is kept for later iterations.
  bool backtracking = false;
  double backtracking_factor = 2.0;
  int max_doublings = 60;
  // Starting mu for backtracking; 0 means the mu_margin rule.
  double mu0 = 0.0;

  int workers = 1;  // PIRE-PS threads
  bool keep_iterates = false;
  double time_budget_seconds = 0.0;  // 0 = unlimited

  void validate() const;
};

SolveResult solve(const Problem& p, const SolverConfig& cfg);
SolveResult solve_pire(const Problem& p, const SolverConfig& cfg);
SolveResult solve_pire_ps(const Problem& p, const SolverConfig& cfg);
SolveResult solve_pire_au(const Problem& p, const SolverConfig& cfg);

/// ||x - T(x)||_inf where T is one PIRE step with step parameter mu and the
/// weights taken at x itself. Zero exactly at fixed points.
double stationarity_residual(const Problem& p, const VectorRef& x, double mu);

/// Start point described by cfg.init. L1Warm runs accelerated proximal
/// gradient on lambda * sum_j g_j(x) + h(x).
Vector initial_point(const Problem& p, const SolverConfig& cfg);

}  // namespace pire
