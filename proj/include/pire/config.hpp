#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "pire/baselines.hpp"
#include "pire/bench/experiments.hpp"
#include "pire/solver.hpp"

namespace pire {

using Json = nlohmann::json;

// All parsers throw ConfigError on unknown keys, missing fields or values
// of the wrong type.

ConcavePenalty parse_penalty(const Json& j);
// n: variable dimension, for the kinds that need it.
Regularizer parse_regularizer(const Json& j, Index n);
// n and cols: variable dimension and column count (for {"columns": true}).
BlockStructure parse_blocks(const Json& j, Index n, Index cols);
// A relative path in {"init": {"given": "x0.csv"}} is resolved against base_dir.
SolverConfig parse_solver_config(const Json& j, Index n, Index cols, const std::string& base_dir = "");
BaselineConfig parse_baseline_config(const Json& j, Index rows, Index cols,
                                     const std::string& base_dir = "");
// Dataset paths are resolved against base_dir.
bench::ExperimentSpec parse_experiment_spec(const Json& j, const std::string& base_dir = "");

Json load_json_file(const std::string& path);

/// A `solve` document: problem data (file paths relative to the document),
/// penalty, regularizer, lambda and a solver section whose `variant` may
/// also name a baseline (fista_l1, irl1, irls; least-squares loss only).
struct ProblemDocument {
  std::optional<Problem> problem;
  std::string method;
  SolverConfig solver;
  BaselineConfig baseline;
  Index rows = 0;  // shape of the variable as a matrix
  Index cols = 1;
  std::optional<Vector> x_true;  // flattened like the variable
};

ProblemDocument load_problem_document(const std::string& path);
ProblemDocument parse_problem_document(const Json& j, const std::string& base_dir);

SolveResult run_document(const ProblemDocument& doc);

}  // namespace pire
