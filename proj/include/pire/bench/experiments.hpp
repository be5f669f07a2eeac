#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pire/bench/csv_io.hpp"
#include "pire/result.hpp"
#include "pire/types.hpp"

namespace pire::bench {

enum class Family { Recovery, Timing, MultiTask };

std::string to_string(Family f);

struct ExperimentSpec {
  Family family = Family::Recovery;

  // Recovery / timing: A is m x n, X is n x t with `sparsity` nonzeros per
  // column.
  Index m = 200;
  Index n = 1000;
  Index t = 1;
  Index sparsity = 20;
  double noise_sigma = 0.01;
  double lambda = 1e-4;
  std::vector<double> p_values{0.5};
  // Any of pire, pire_ps, pire_au, irl1, irls. fista_l1 always runs: it is
  // the p = 1 reference and the start point of every other method.
  std::vector<std::string> methods;  // empty: every method that applies to the family
  std::vector<std::uint64_t> seeds{1};
  Index S = 20;

  // Multi-task: `tasks` problems over `features` shared features.
  Index tasks = 5;
  Index features = 50;
  Index train_samples = 60;
  Index test_samples = 200;
  Index shared_rows = 10;
  std::optional<double> theta;  // cap of the capped-l1 penalty; required

  // Solver settings shared by every method.
  double tol = 1e-6;
  int max_iter = 10000;
  int l1_max_iter = 200000;
  double epsilon0 = 0.01;
  double rho = 1.1;
  double epsilon_floor = 1e-10;
  // Doubling safeguard on the per-block steps of the Jacobi sweep.
  bool ps_backtracking = true;
  int workers = 1;
  double time_budget_seconds = 0.0;

  // Multi-task on external data instead of the synthetic generator.
  std::optional<std::string> train_csv;
  std::optional<std::string> test_csv;
  CsvSchema schema;

  void validate() const;
};

// Fixed report columns. elapsed_ms is the only volatile one; multi-task
// reports append test_mse.
inline const std::vector<std::string> kReportColumns{
    "method", "p", "seed", "iterations", "objective", "rel_error", "support_size", "elapsed_ms",
    "termination"};

struct ReportRow {
  std::string method;
  double p = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  double objective = 0.0;
  double rel_error = 0.0;
  Index support_size = 0;
  double elapsed_ms = 0.0;
  std::string termination;
  double test_mse = 0.0;
  bool failed = false;
};

struct SummaryRow {
  std::string method;
  double p = 0.0;
  int runs = 0;
  int failures = 0;
  double mean_rel_error = 0.0;
  double std_rel_error = 0.0;
  double mean_iterations = 0.0;
  double mean_objective = 0.0;
  double mean_elapsed_ms = 0.0;
  double mean_test_mse = 0.0;
};

struct Report {
  ExperimentSpec spec;
  std::vector<ReportRow> rows;  // spec order: seed, then p, then method
  std::vector<SummaryRow> summary;
  nlohmann::json metadata;
};

Report run_recovery_experiment(const ExperimentSpec& spec);
Report run_timing_experiment(const ExperimentSpec& spec);
// Synthetic planted instance per seed.
Report run_multitask_experiment(const ExperimentSpec& spec);
// External train/test data; seeds are ignored and reported as 0.
Report run_multitask_experiment(const ExperimentSpec& spec, const Dataset& train,
                                const Dataset& test);
Report run_experiment(const ExperimentSpec& spec);

// Means over successful runs, per (method, p) in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<ReportRow>& rows);

void write_report_csv(std::ostream& os, const Report& report);
void write_summary_csv(std::ostream& os, const Report& report);
// report.csv, summary.csv and metadata.json under dir (created if needed).
void write_report(const Report& report, const std::string& dir);

}  // namespace pire::bench
