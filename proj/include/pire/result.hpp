#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pire/errors.hpp"
#include "pire/types.hpp"

namespace pire {

enum class Termination { Tolerance, MaxIter, TimeBudget };

std::string to_string(Termination t);

/// One row of an iteration trace. Entry k describes the iterate x^k; entry
/// 0 is the starting point.
struct TraceEntry {
  int iter = 0;
  // F(x^k) with the smoothing offset in force after the update (the one
  // that produced the weights for the next step).
  double objective = 0.0;
  // F(x^k) with the offset used to take the step from x^{k-1}. Equal to
  // objective unless an epsilon schedule is active. Descent checks compare
  // this against the previous entry's objective.
  double objective_step = 0.0;
  double step_norm = 0.0;
  double relative_step = 0.0;
  double epsilon = 0.0;
  double elapsed_ms = 0.0;
};

struct SolveResult {
  Vector x;
  double objective = 0.0;
  int iterations = 0;
  Termination termination = Termination::MaxIter;
  std::vector<TraceEntry> trace;
  double stationarity_residual = 0.0;
  double elapsed_ms = 0.0;

  // Step parameters actually used, one per block (one entry for PIRE).
  std::vector<double> lipschitz;
  std::vector<double> mu;
  double final_epsilon = 0.0;
  int backtracking_doublings = 0;

  // Baseline diagnostics.
  long inner_iterations = 0;
  bool regularized = false;
  std::vector<std::string> warnings;

  // x^0, x^1, ... when SolverConfig::keep_iterates is set.
  std::vector<Vector> iterates;
};

/// A non-finite objective stopped the run. Carries the trace so far.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, std::vector<TraceEntry> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

// Columns: iter, objective, step_norm, relative_step, epsilon, elapsed_ms.
void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace);

}  // namespace pire
