#include "pire/result.hpp"

#include <cstdio>
#include <ostream>

namespace pire {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Tolerance:
      return "tolerance";
    case Termination::MaxIter:
      return "max_iter";
    case Termination::TimeBudget:
      return "time_budget";
  }
  return "unknown";
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace) {
  os << "iter,objective,step_norm,relative_step,epsilon,elapsed_ms\n";
  char line[256];
  for (const auto& e : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.3f\n", e.iter, e.objective,
                  e.step_norm, e.relative_step, e.epsilon, e.elapsed_ms);
    os << line;
  }
}

}  // namespace pire
