#include "pire/bench/experiments.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>

#include "pire/baselines.hpp"
#include "pire/bench/instance.hpp"
#include "pire/bench/metrics.hpp"
#include "pire/bench/rng.hpp"
#include "pire/fista.hpp"
#include "pire/solver.hpp"

namespace pire::bench {

namespace {

using Json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kLeastSquaresMethods{"pire", "pire_ps", "pire_au", "irl1", "irls"};
const std::vector<std::string> kMultiTaskMethods{"pire", "pire_ps", "pire_au"};

std::vector<std::string> methods_of(const ExperimentSpec& spec) {
  if (!spec.methods.empty()) return spec.methods;
  return spec.family == Family::MultiTask ? kMultiTaskMethods : kLeastSquaresMethods;
}

bool same_p(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string fmt(double v, const char* format = "%.12g") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

Variant variant_of(const std::string& method) {
  if (method == "pire") return Variant::PIRE;
  if (method == "pire_ps") return Variant::PIRE_PS;
  if (method == "pire_au") return Variant::PIRE_AU;
  throw ConfigError("unknown method '" + method + "'");
}

bool is_pire_family(const std::string& method) {
  return method == "pire" || method == "pire_ps" || method == "pire_au";
}

SolverConfig pire_config(const ExperimentSpec& spec, const std::string& method, const Vector& x0,
                         BlockStructure blocks, bool with_schedule) {
  SolverConfig cfg;
  cfg.variant = variant_of(method);
  cfg.tol = spec.tol;
  cfg.max_iter = spec.max_iter;
  if (with_schedule) cfg.epsilon_schedule = EpsilonSchedule{spec.epsilon0, spec.rho};
  cfg.epsilon_floor = spec.epsilon_floor;
  cfg.init = InitKind::Given;
  cfg.x0 = x0;
  cfg.workers = spec.workers;
  cfg.time_budget_seconds = spec.time_budget_seconds;
  if (cfg.variant != Variant::PIRE) cfg.blocks = std::move(blocks);
  if (cfg.variant == Variant::PIRE_PS) cfg.backtracking = spec.ps_backtracking;
  return cfg;
}

BaselineConfig baseline_config(const ExperimentSpec& spec, double p) {
  BaselineConfig cfg;
  cfg.tol = spec.tol;
  cfg.max_outer = spec.max_iter;
  cfg.epsilon_schedule = EpsilonSchedule{spec.epsilon0, spec.rho};
  cfg.epsilon_floor = spec.epsilon_floor;
  cfg.p = p;
  cfg.l1_max_iter = spec.l1_max_iter;
  return cfg;
}

SolveResult run_least_squares_method(const ExperimentSpec& spec, const std::string& method,
                                     const SparseInstance& inst, double p, const Vector& x0) {
  const Index dim = inst.A.cols() * inst.B.cols();
  if (is_pire_family(method)) {
    const Problem problem{ConcavePenalty::lp(p, spec.epsilon0), Regularizer::absolute(dim),
                          SmoothLoss::least_squares(inst.A, inst.B), spec.lambda};
    return solve(problem, pire_config(spec, method, x0, BlockStructure::contiguous(dim, spec.S), true));
  }
  BaselineConfig cfg = baseline_config(spec, p);
  cfg.init = BaselineInit::Given;
  cfg.x0 = unflatten_rows(x0, inst.A.cols(), inst.B.cols());
  if (method == "irl1") return solve_irl1(inst.A, inst.B, spec.lambda, cfg);
  if (method == "irls") return solve_irls(inst.A, inst.B, spec.lambda, cfg);
  throw ConfigError("unknown method '" + method + "'");
}

ReportRow failed_row(const std::string& method, double p, std::uint64_t seed,
                     const std::string& termination) {
  ReportRow row;
  row.method = method;
  row.p = p;
  row.seed = seed;
  row.objective = kNaN;
  row.rel_error = kNaN;
  row.test_mse = kNaN;
  row.termination = termination;
  row.failed = true;
  return row;
}

void note_warnings(Report& report, const ReportRow& row, const SolveResult& r) {
  for (const auto& w : r.warnings) {
    report.metadata["warnings"].push_back(
        {{"method", row.method}, {"seed", row.seed}, {"p", std::isnan(row.p) ? Json(nullptr) : Json(row.p)},
         {"message", w}});
  }
}

Json spec_json(const ExperimentSpec& s) {
  Json j;
  j["family"] = to_string(s.family);
  if (s.family == Family::MultiTask) {
    j["tasks"] = s.tasks;
    j["features"] = s.features;
    j["train_samples"] = s.train_samples;
    j["test_samples"] = s.test_samples;
    j["shared_rows"] = s.shared_rows;
    j["theta"] = s.theta ? Json(*s.theta) : Json(nullptr);
  } else {
    j["m"] = s.m;
    j["n"] = s.n;
    j["t"] = s.t;
    j["sparsity"] = s.sparsity;
    j["p_values"] = s.p_values;
    j["S"] = s.S;
  }
  j["noise_sigma"] = s.noise_sigma;
  j["lambda"] = s.lambda;
  j["methods"] = methods_of(s);
  j["seeds"] = s.seeds;
  j["tol"] = s.tol;
  j["max_iter"] = s.max_iter;
  j["l1_max_iter"] = s.l1_max_iter;
  j["epsilon"] = {{"start", s.epsilon0}, {"rho", s.rho}, {"floor", s.epsilon_floor}};
  j["ps_backtracking"] = s.ps_backtracking;
  j["workers"] = s.workers;
  j["time_budget_seconds"] = s.time_budget_seconds;
  return j;
}

Report new_report(const ExperimentSpec& spec) {
  Report report;
  report.spec = spec;
  report.metadata["spec"] = spec_json(spec);
  report.metadata["generator"] = kGeneratorDescription;
  report.metadata["power_iteration_seed"] = kPowerIterationSeed;
  report.metadata["columns"] = kReportColumns;
  if (spec.family == Family::MultiTask) report.metadata["columns"].push_back("test_mse");
  report.metadata["volatile_columns"] = {"elapsed_ms", "mean_elapsed_ms"};
  report.metadata["warnings"] = Json::array();
  return report;
}

Report run_least_squares_experiment(const ExperimentSpec& spec) {
  spec.validate();
  Report report = new_report(spec);
  const auto methods = methods_of(spec);
  for (std::uint64_t seed : spec.seeds) {
    const SparseInstance inst = gen_sparse_instance(spec.m, spec.n, spec.t, spec.sparsity,
                                                    spec.noise_sigma, seed);
    const Vector x_true = flatten_rows(inst.X_true);
    const auto make_row = [&](const std::string& method, double p, const SolveResult& r) {
      ReportRow row;
      row.method = method;
      row.p = p;
      row.seed = seed;
      row.iterations = r.iterations;
      row.objective = lp_objective(inst.A, inst.B, r.x, spec.lambda, p);
      row.rel_error = relative_recovery_error(r.x, x_true).value;
      row.support_size = support_size(r.x);
      row.elapsed_ms = r.elapsed_ms;
      row.termination = to_string(r.termination);
      row.test_mse = kNaN;
      note_warnings(report, row, r);
      return row;
    };

    BaselineConfig l1_cfg = baseline_config(spec, 1.0);
    std::optional<Vector> start;
    try {
      const SolveResult l1 = solve_fista_l1(inst.A, inst.B, spec.lambda, l1_cfg);
      report.rows.push_back(make_row("fista_l1", 1.0, l1));
      start = l1.x;
    } catch (const NumericFailure&) {
      report.rows.push_back(failed_row("fista_l1", 1.0, seed, "numeric_failure"));
    }

    for (double p : spec.p_values) {
      if (p == 1.0) continue;
      for (const auto& method : methods) {
        if (!start) {
          report.rows.push_back(failed_row(method, p, seed, "no_start_point"));
          continue;
        }
        try {
          report.rows.push_back(make_row(method, p, run_least_squares_method(spec, method, inst, p, *start)));
        } catch (const NumericFailure&) {
          report.rows.push_back(failed_row(method, p, seed, "numeric_failure"));
        } catch (const ConfigError& e) {
          // Backtracking exhaustion is reported per cell; anything else is a
          // malformed spec and was rejected by validate().
          report.rows.push_back(failed_row(method, p, seed, "error"));
          report.metadata["warnings"].push_back(
              {{"method", method}, {"seed", seed}, {"p", p}, {"message", e.what()}});
        }
      }
    }
  }
  report.summary = summarize(report.rows);
  return report;
}

struct MultiTaskData {
  const std::vector<Task>& train;
  const std::vector<Task>& test;
  const Matrix* Z_true = nullptr;
  const std::vector<Index>* support = nullptr;
};

void run_multitask_trial(const ExperimentSpec& spec, const MultiTaskData& data, std::uint64_t seed,
                         Report& report) {
  const Index m = static_cast<Index>(data.train.size());
  const Index d = data.train.front().X.cols();
  const Problem problem{ConcavePenalty::capped_l1(*spec.theta), Regularizer::row_l1(d, m),
                        SmoothLoss::multitask(data.train), spec.lambda};
  std::optional<Vector> z_true;
  if (data.Z_true) z_true = flatten_rows(*data.Z_true);

  const auto make_row = [&](const std::string& method, double p, const Vector& z, int iterations,
                            double elapsed_ms, const std::string& termination) {
    ReportRow row;
    row.method = method;
    row.p = p;
    row.seed = seed;
    row.iterations = iterations;
    row.objective = objective_value(problem, z);
    row.rel_error = z_true ? relative_recovery_error(z, *z_true).value : kNaN;
    row.support_size = support_size(z);
    row.elapsed_ms = elapsed_ms;
    row.termination = termination;
    row.test_mse = multitask_mse(data.test, z);
    return row;
  };

  FistaOptions l1_opts;
  l1_opts.tol = spec.tol;
  l1_opts.max_iter = spec.l1_max_iter;
  l1_opts.record_trace = false;
  std::optional<Vector> start;
  try {
    const SolveResult l1 = fista(problem.loss, problem.regularizer, Vector::Ones(d), spec.lambda,
                                 Vector::Zero(d * m), l1_opts);
    report.rows.push_back(make_row("fista_l1", 1.0, l1.x, l1.iterations, l1.elapsed_ms,
                                   to_string(l1.termination)));
    start = l1.x;
  } catch (const NumericFailure&) {
    report.rows.push_back(failed_row("fista_l1", 1.0, seed, "numeric_failure"));
  }

  for (const auto& method : methods_of(spec)) {
    if (!start) {
      report.rows.push_back(failed_row(method, kNaN, seed, "no_start_point"));
      continue;
    }
    try {
      const SolveResult r =
          solve(problem, pire_config(spec, method, *start, BlockStructure::matrix_columns(d, m), false));
      report.rows.push_back(make_row(method, kNaN, r.x, r.iterations, r.elapsed_ms, to_string(r.termination)));
    } catch (const NumericFailure&) {
      report.rows.push_back(failed_row(method, kNaN, seed, "numeric_failure"));
    } catch (const ConfigError& e) {
      report.rows.push_back(failed_row(method, kNaN, seed, "error"));
      report.metadata["warnings"].push_back({{"method", method}, {"seed", seed}, {"message", e.what()}});
    }
  }

  if (data.support) {
    // Least squares per task restricted to the planted rows.
    const auto& rows = *data.support;
    Vector z = Vector::Zero(d * m);
    for (Index i = 0; i < m; ++i) {
      const Task& task = data.train[static_cast<std::size_t>(i)];
      Matrix Xs(task.X.rows(), static_cast<Index>(rows.size()));
      for (std::size_t k = 0; k < rows.size(); ++k) Xs.col(static_cast<Index>(k)) = task.X.col(rows[k]);
      const Vector coef = Xs.colPivHouseholderQr().solve(task.y);
      for (std::size_t k = 0; k < rows.size(); ++k) z[rows[k] * m + i] = coef[static_cast<Index>(k)];
    }
    report.rows.push_back(make_row("oracle_ls", kNaN, z, 0, 0.0, "closed_form"));
  }
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::Recovery:
      return "recovery";
    case Family::Timing:
      return "timing";
    case Family::MultiTask:
      return "multitask";
  }
  return "unknown";
}

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be nonnegative");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(tol > 0.0) || max_iter <= 0 || l1_max_iter <= 0) {
    throw ConfigError("tol, max_iter and l1_max_iter must be positive");
  }
  if (!(epsilon0 > 0.0) || !(rho > 1.0) || !(epsilon_floor >= 0.0)) {
    throw ConfigError("epsilon schedule needs start > 0, rho > 1, floor >= 0");
  }
  if (workers < 1) throw ConfigError("workers must be at least 1");
  const auto methods = methods_of(*this);
  if (family == Family::MultiTask) {
    if (tasks <= 0 || features <= 0 || train_samples <= 0 || test_samples <= 0) {
      throw ConfigError("multi-task dimensions must be positive");
    }
    if (shared_rows < 0 || shared_rows > features) throw ConfigError("shared_rows must be <= features");
    if (!theta || !(*theta > 0.0)) throw ConfigError("multi-task experiments need a positive theta");
    for (const auto& method : methods) {
      if (!is_pire_family(method)) {
        throw ConfigError("method '" + method + "' is not available for multi-task problems");
      }
    }
    return;
  }
  if (m <= 0 || n <= 0 || t <= 0) throw ConfigError("dimensions must be positive");
  if (sparsity < 0 || sparsity > n) throw ConfigError("sparsity must lie in [0, n]");
  if (S <= 0 || S > n * t) throw ConfigError("block count S must lie in [1, n t]");
  if (p_values.empty()) throw ConfigError("p_values must not be empty");
  for (double p : p_values) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("every p must lie in (0, 1]");
  }
  for (const auto& method : methods) {
    if (!is_pire_family(method) && method != "irl1" && method != "irls") {
      throw ConfigError("unknown method '" + method + "'");
    }
  }
}

Report run_recovery_experiment(const ExperimentSpec& spec) {
  if (spec.family != Family::Recovery) throw ConfigError("not a recovery spec");
  return run_least_squares_experiment(spec);
}

Report run_timing_experiment(const ExperimentSpec& spec) {
  if (spec.family != Family::Timing) throw ConfigError("not a timing spec");
  return run_least_squares_experiment(spec);
}

Report run_multitask_experiment(const ExperimentSpec& spec) {
  if (spec.family != Family::MultiTask) throw ConfigError("not a multi-task spec");
  spec.validate();
  Report report = new_report(spec);
  for (std::uint64_t seed : spec.seeds) {
    const MultiTaskInstance inst = gen_multitask_instance(
        spec.tasks, spec.features, spec.train_samples, spec.test_samples, spec.shared_rows,
        spec.noise_sigma, seed);
    run_multitask_trial(spec, {inst.train, inst.test, &inst.Z_true, &inst.support}, seed, report);
  }
  report.summary = summarize(report.rows);
  return report;
}

Report run_multitask_experiment(const ExperimentSpec& spec, const Dataset& train, const Dataset& test) {
  if (spec.family != Family::MultiTask) throw ConfigError("not a multi-task spec");
  if (!spec.theta || !(*spec.theta > 0.0)) throw ConfigError("multi-task experiments need a positive theta");
  if (train.task_ids != test.task_ids) throw DataError("train and test sets have different tasks");
  Report report = new_report(spec);
  report.metadata["spec"]["seeds"] = Json::array({0});
  report.metadata["dataset_rows"] = {{"train", train.row_counts}, {"test", test.row_counts}};
  run_multitask_trial(spec, {train.tasks, test.tasks}, 0, report);
  report.summary = summarize(report.rows);
  return report;
}

Report run_experiment(const ExperimentSpec& spec) {
  switch (spec.family) {
    case Family::Recovery:
      return run_recovery_experiment(spec);
    case Family::Timing:
      return run_timing_experiment(spec);
    case Family::MultiTask:
      return run_multitask_experiment(spec);
  }
  throw ConfigError("unknown experiment family");
}

std::vector<SummaryRow> summarize(const std::vector<ReportRow>& rows) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<const ReportRow*>> groups;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
      return s.method == row.method && same_p(s.p, row.p);
    });
    if (it == out.end()) {
      out.push_back({row.method, row.p});
      groups.emplace_back();
      it = out.end() - 1;
    }
    const auto g = static_cast<std::size_t>(it - out.begin());
    ++it->runs;
    if (row.failed) {
      ++it->failures;
    } else {
      groups[g].push_back(&row);
    }
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    SummaryRow& s = out[g];
    const auto& ok = groups[g];
    if (ok.empty()) {
      s.mean_rel_error = s.std_rel_error = s.mean_iterations = s.mean_objective = kNaN;
      s.mean_elapsed_ms = s.mean_test_mse = kNaN;
      continue;
    }
    const double k = static_cast<double>(ok.size());
    for (const ReportRow* r : ok) {
      s.mean_rel_error += r->rel_error / k;
      s.mean_iterations += r->iterations / k;
      s.mean_objective += r->objective / k;
      s.mean_elapsed_ms += r->elapsed_ms / k;
      s.mean_test_mse += r->test_mse / k;
    }
    double var = 0.0;
    for (const ReportRow* r : ok) var += (r->rel_error - s.mean_rel_error) * (r->rel_error - s.mean_rel_error);
    s.std_rel_error = ok.size() > 1 ? std::sqrt(var / (k - 1.0)) : 0.0;
  }
  return out;
}

void write_report_csv(std::ostream& os, const Report& report) {
  const bool multitask = report.spec.family == Family::MultiTask;
  for (std::size_t c = 0; c < kReportColumns.size(); ++c) os << (c ? "," : "") << kReportColumns[c];
  if (multitask) os << ",test_mse";
  os << '\n';
  for (const auto& r : report.rows) {
    os << r.method << ',' << fmt(r.p) << ',' << r.seed << ',' << r.iterations << ','
       << fmt(r.objective) << ',' << fmt(r.rel_error) << ',' << r.support_size << ','
       << fmt(r.elapsed_ms, "%.3f") << ',' << r.termination;
    if (multitask) os << ',' << fmt(r.test_mse);
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const Report& report) {
  const bool multitask = report.spec.family == Family::MultiTask;
  os << "method,p,runs,failures,mean_rel_error,std_rel_error,mean_iterations,mean_objective,"
        "mean_elapsed_ms";
  if (multitask) os << ",mean_test_mse";
  os << '\n';
  for (const auto& s : report.summary) {
    os << s.method << ',' << fmt(s.p) << ',' << s.runs << ',' << s.failures << ','
       << fmt(s.mean_rel_error) << ',' << fmt(s.std_rel_error) << ',' << fmt(s.mean_iterations)
       << ',' << fmt(s.mean_objective) << ',' << fmt(s.mean_elapsed_ms, "%.3f");
    if (multitask) os << ',' << fmt(s.mean_test_mse);
    os << '\n';
  }
}

void write_report(const Report& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  const auto open = [&](const char* name) {
    std::ofstream out(base / name);
    if (!out) throw DataError("cannot write " + (base / name).string());
    return out;
  };
  {
    auto out = open("report.csv");
    write_report_csv(out, report);
  }
  {
    auto out = open("summary.csv");
    write_summary_csv(out, report);
  }
  auto out = open("metadata.json");
  out << report.metadata.dump(2) << '\n';
}

}  // namespace pire::bench
