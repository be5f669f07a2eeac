#include "pire/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "pire/bench/csv_io.hpp"
#include "pire/bench/instance.hpp"

namespace pire {

namespace {

namespace fs = std::filesystem;

// Typed access to the members of one JSON object; finish() rejects keys that
// were never looked at.
class Fields {
 public:
  Fields(const Json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const Json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(context_ + ": missing '" + key + "'");
    return j_.at(key);
  }

  template <class T>
  T require(const std::string& key) {
    const Json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(context_ + "." + key + ": unexpected value " + v.dump());
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? require<T>(key) : fallback;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(context_ + ": unknown key '" + item.key() + "'");
      }
    }
  }

  const std::string& context() const { return context_; }

 private:
  const Json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).string();
}

EpsilonSchedule parse_schedule(Fields& f, double& floor) {
  EpsilonSchedule sched;
  sched.epsilon0 = f.get<double>("start", sched.epsilon0);
  sched.rho = f.get<double>("rho", sched.rho);
  floor = f.get<double>("floor", floor);
  f.finish();
  try {
    sched.validate();
  } catch (const Error& e) {
    throw ConfigError(f.context() + ": " + e.what());
  }
  return sched;
}

bench::CsvSchema parse_schema(const Json& j) {
  Fields f(j, "schema");
  bench::CsvSchema schema;
  schema.feature_columns = f.get<std::vector<std::string>>("features", {});
  schema.label_column = f.get<std::string>("label", schema.label_column);
  schema.task_column = f.get<std::string>("task", schema.task_column);
  schema.task_ids = f.get<std::vector<long>>("task_ids", {});
  f.finish();
  return schema;
}

Index positive_index(Fields& f, const std::string& key, Index fallback) {
  const auto v = f.get<long long>(key, fallback);
  if (v < 0) throw ConfigError(f.context() + "." + key + " must be nonnegative");
  return static_cast<Index>(v);
}

// Rethrows library validation errors from constructors as configuration
// errors so the CLI maps them to one exit code.
template <class F>
auto as_config(const std::string& context, F&& make) {
  try {
    return make();
  } catch (const ConfigError&) {
    throw;
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(context + ": " + e.what());
  }
}

}  // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ConcavePenalty parse_penalty(const Json& j) {
  Fields f(j, "penalty");
  const auto kind = f.require<std::string>("kind");
  return as_config("penalty", [&] {
    ConcavePenalty pen = ConcavePenalty::identity();
    if (kind == "lp") {
      pen = ConcavePenalty::lp(f.require<double>("p"), f.get<double>("epsilon", 0.01));
    } else if (kind == "log") {
      pen = ConcavePenalty::log(f.get<double>("epsilon", 0.01));
    } else if (kind == "capped_l1") {
      pen = ConcavePenalty::capped_l1(f.require<double>("theta"));
    } else if (kind != "identity") {
      throw ConfigError("penalty: unknown kind '" + kind + "'");
    }
    f.finish();
    return pen;
  });
}

Regularizer parse_regularizer(const Json& j, Index n) {
  Fields f(j, "regularizer");
  const auto kind = f.require<std::string>("kind");
  return as_config("regularizer", [&] {
    if (kind == "abs" || kind == "square") {
      f.finish();
      return kind == "abs" ? Regularizer::absolute(n) : Regularizer::square(n);
    }
    if (kind == "group_l2") {
      auto groups = f.require<std::vector<std::vector<Index>>>("groups");
      f.finish();
      return Regularizer::group_l2(GroupPartition(n, std::move(groups)));
    }
    if (kind == "row_l1") {
      const Index rows = positive_index(f, "rows", 0);
      const Index cols = positive_index(f, "cols", 0);
      f.finish();
      if (rows * cols != n) {
        throw ConfigError("regularizer: row_l1 shape " + std::to_string(rows) + " x " +
                          std::to_string(cols) + " does not match " + std::to_string(n) + " variables");
      }
      return Regularizer::row_l1(rows, cols);
    }
    throw ConfigError("regularizer: unknown kind '" + kind + "'");
  });
}

BlockStructure parse_blocks(const Json& j, Index n, Index cols) {
  Fields f(j, "blocks");
  return as_config("blocks", [&] {
    if (f.has("count")) {
      const Index count = positive_index(f, "count", 0);
      f.finish();
      if (count < 1 || count > n) throw ConfigError("blocks: count must lie in [1, n]");
      return BlockStructure::contiguous(n, count);
    }
    if (f.has("ranges")) {
      const auto ranges = f.require<std::vector<std::pair<Index, Index>>>("ranges");
      f.finish();
      return BlockStructure::ranges(n, ranges);
    }
    if (f.has("columns")) {
      const bool columns = f.require<bool>("columns");
      f.finish();
      if (!columns || n % cols != 0) throw ConfigError("blocks: columns must be true");
      return BlockStructure::matrix_columns(n / cols, cols);
    }
    throw ConfigError("blocks: expected 'count', 'ranges' or 'columns'");
  });
}

SolverConfig parse_solver_config(const Json& j, Index n, Index cols, const std::string& base_dir) {
  Fields f(j, "solver");
  SolverConfig cfg;
  const auto variant = f.get<std::string>("variant", "pire");
  if (variant == "pire") {
    cfg.variant = Variant::PIRE;
  } else if (variant == "pire_ps") {
    cfg.variant = Variant::PIRE_PS;
  } else if (variant == "pire_au") {
    cfg.variant = Variant::PIRE_AU;
  } else {
    throw ConfigError("solver: unknown variant '" + variant + "'");
  }
  cfg.mu_margin = f.get<double>("mu_margin", cfg.mu_margin);
  cfg.tol = f.get<double>("tol", cfg.tol);
  cfg.max_iter = f.get<int>("max_iter", cfg.max_iter);
  if (f.has("epsilon")) {
    Fields e(f.raw("epsilon"), "solver.epsilon");
    cfg.epsilon_schedule = parse_schedule(e, cfg.epsilon_floor);
  }
  if (f.has("blocks")) cfg.blocks = parse_blocks(f.raw("blocks"), n, cols);
  cfg.use_block_lipschitz = f.get<bool>("use_block_lipschitz", cfg.use_block_lipschitz);
  if (f.has("init")) {
    const Json& init = f.raw("init");
    if (init.is_string()) {
      const auto name = init.get<std::string>();
      if (name == "zeros") {
        cfg.init = InitKind::Zeros;
      } else if (name == "l1") {
        cfg.init = InitKind::L1Warm;
      } else {
        throw ConfigError("solver.init: expected \"zeros\", \"l1\" or {\"given\": file}");
      }
    } else {
      Fields g(init, "solver.init");
      const Matrix x0 = bench::read_matrix_csv(resolve(base_dir, g.require<std::string>("given")));
      g.finish();
      if (x0.size() != n) throw ConfigError("solver.init: start point has the wrong size");
      cfg.init = InitKind::Given;
      using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
      cfg.x0 = Eigen::Map<const Vector>(RowMatrix(x0).data(), n);
    }
  }
  cfg.l1_max_iter = f.get<int>("l1_max_iter", cfg.l1_max_iter);
  cfg.l1_tol = f.get<double>("l1_tol", cfg.l1_tol);
  if (f.has("backtracking")) {
    const Json& bt = f.raw("backtracking");
    if (bt.is_boolean()) {
      cfg.backtracking = bt.get<bool>();
    } else {
      Fields b(bt, "solver.backtracking");
      cfg.backtracking = b.get<bool>("enabled", true);
      cfg.backtracking_factor = b.get<double>("factor", cfg.backtracking_factor);
      cfg.mu0 = b.get<double>("mu0", cfg.mu0);
      cfg.max_doublings = b.get<int>("max_doublings", cfg.max_doublings);
      b.finish();
    }
  }
  cfg.workers = f.get<int>("workers", cfg.workers);
  cfg.time_budget_seconds = f.get<double>("time_budget_seconds", cfg.time_budget_seconds);
  f.finish();
  cfg.validate();
  return cfg;
}

BaselineConfig parse_baseline_config(const Json& j, Index rows, Index cols, const std::string& base_dir) {
  Fields f(j, "solver");
  f.require<std::string>("variant");
  BaselineConfig cfg;
  cfg.tol = f.get<double>("tol", cfg.tol);
  cfg.max_outer = f.get<int>("max_iter", cfg.max_outer);
  cfg.inner_tol = f.get<double>("inner_tol", cfg.inner_tol);
  cfg.inner_max_iter = f.get<int>("inner_max_iter", cfg.inner_max_iter);
  cfg.l1_max_iter = f.get<int>("l1_max_iter", cfg.l1_max_iter);
  cfg.p = f.get<double>("p", cfg.p);
  if (f.has("epsilon")) {
    Fields e(f.raw("epsilon"), "solver.epsilon");
    cfg.epsilon_schedule = parse_schedule(e, cfg.epsilon_floor);
  }
  if (f.has("init")) {
    const Json& init = f.raw("init");
    if (init.is_string()) {
      const auto name = init.get<std::string>();
      if (name == "zeros") {
        cfg.init = BaselineInit::Zeros;
      } else if (name == "l1") {
        cfg.init = BaselineInit::L1Warm;
      } else {
        throw ConfigError("solver.init: expected \"zeros\", \"l1\" or {\"given\": file}");
      }
    } else {
      Fields g(init, "solver.init");
      cfg.x0 = bench::read_matrix_csv(resolve(base_dir, g.require<std::string>("given")));
      g.finish();
      if (cfg.x0.rows() != rows || cfg.x0.cols() != cols) {
        throw ConfigError("solver.init: start point must be " + std::to_string(rows) + " x " +
                          std::to_string(cols));
      }
      cfg.init = BaselineInit::Given;
    }
  }
  f.finish();
  cfg.validate(true);
  return cfg;
}

bench::ExperimentSpec parse_experiment_spec(const Json& j, const std::string& base_dir) {
  Fields f(j, "experiment");
  bench::ExperimentSpec spec;
  const auto family = f.require<std::string>("family");
  if (family == "recovery") {
    spec.family = bench::Family::Recovery;
  } else if (family == "timing") {
    spec.family = bench::Family::Timing;
    spec.m = 100;
    spec.n = 500;
    spec.t = 50;
    spec.sparsity = -1;  // 2% of n unless given
  } else if (family == "multitask") {
    spec.family = bench::Family::MultiTask;
  } else {
    throw ConfigError("experiment: unknown family '" + family + "'");
  }
  spec.m = positive_index(f, "m", spec.m);
  spec.n = positive_index(f, "n", spec.n);
  spec.t = positive_index(f, "t", spec.t);
  if (f.has("sparsity")) {
    spec.sparsity = positive_index(f, "sparsity", 0);
  } else if (spec.sparsity < 0) {
    spec.sparsity = std::max<Index>(1, (spec.n * 2 + 50) / 100);
  }
  spec.noise_sigma = f.get<double>("noise_sigma", spec.noise_sigma);
  spec.lambda = f.get<double>("lambda", spec.lambda);
  spec.p_values = f.get<std::vector<double>>("p_values", spec.p_values);
  spec.methods = f.get<std::vector<std::string>>("methods", {});
  spec.seeds = f.get<std::vector<std::uint64_t>>("seeds", spec.seeds);
  spec.S = positive_index(f, "S", spec.S);
  spec.tasks = positive_index(f, "tasks", spec.tasks);
  spec.features = positive_index(f, "features", spec.features);
  spec.train_samples = positive_index(f, "train_samples", spec.train_samples);
  spec.test_samples = positive_index(f, "test_samples", spec.test_samples);
  spec.shared_rows = positive_index(f, "shared_rows", spec.shared_rows);
  if (f.has("theta")) spec.theta = f.require<double>("theta");
  spec.tol = f.get<double>("tol", spec.tol);
  spec.max_iter = f.get<int>("max_iter", spec.max_iter);
  spec.l1_max_iter = f.get<int>("l1_max_iter", spec.l1_max_iter);
  if (f.has("epsilon")) {
    Fields e(f.raw("epsilon"), "experiment.epsilon");
    const EpsilonSchedule sched = parse_schedule(e, spec.epsilon_floor);
    spec.epsilon0 = sched.epsilon0;
    spec.rho = sched.rho;
  }
  spec.ps_backtracking = f.get<bool>("ps_backtracking", spec.ps_backtracking);
  spec.workers = f.get<int>("workers", spec.workers);
  spec.time_budget_seconds = f.get<double>("time_budget_seconds", spec.time_budget_seconds);
  if (f.has("dataset")) {
    Fields d(f.raw("dataset"), "experiment.dataset");
    spec.train_csv = resolve(base_dir, d.require<std::string>("train"));
    spec.test_csv = resolve(base_dir, d.require<std::string>("test"));
    if (d.has("schema")) spec.schema = parse_schema(d.raw("schema"));
    d.finish();
  }
  f.finish();
  if (spec.train_csv && spec.family != bench::Family::MultiTask) {
    throw ConfigError("experiment: a dataset is only meaningful for the multitask family");
  }
  if (!spec.train_csv) spec.validate();
  return spec;
}

ProblemDocument load_problem_document(const std::string& path) {
  return parse_problem_document(load_json_file(path), fs::path(path).parent_path().string());
}

ProblemDocument parse_problem_document(const Json& j, const std::string& base_dir) {
  Fields f(j, "problem");
  ProblemDocument doc;

  Fields lf(f.raw("loss"), "loss");
  const auto kind = lf.require<std::string>("kind");
  std::optional<SmoothLoss> loss;
  if (kind == "least_squares") {
    Matrix A = bench::read_matrix_csv(resolve(base_dir, lf.require<std::string>("A")));
    Matrix B = bench::read_matrix_csv(resolve(base_dir, lf.require<std::string>("b")));
    doc.rows = A.cols();
    doc.cols = B.cols();
    loss = as_config("loss", [&] { return SmoothLoss::least_squares(std::move(A), std::move(B)); });
  } else if (kind == "logistic") {
    Matrix A = bench::read_matrix_csv(resolve(base_dir, lf.require<std::string>("A")));
    Vector labels = bench::read_vector_csv(resolve(base_dir, lf.require<std::string>("labels")));
    doc.rows = A.cols();
    loss = as_config("loss", [&] { return SmoothLoss::logistic(std::move(A), std::move(labels)); });
  } else if (kind == "multitask") {
    const bench::CsvSchema schema = lf.has("schema") ? parse_schema(lf.raw("schema")) : bench::CsvSchema{};
    bench::Dataset data =
        bench::load_csv_dataset(resolve(base_dir, lf.require<std::string>("dataset")), schema);
    doc.rows = data.tasks.front().X.cols();
    doc.cols = static_cast<Index>(data.tasks.size());
    loss = as_config("loss", [&] { return SmoothLoss::multitask(std::move(data.tasks)); });
  } else {
    throw ConfigError("loss: unknown kind '" + kind + "'");
  }
  lf.finish();
  const Index n = loss->dim();

  const double lambda = f.require<double>("lambda");
  if (!(lambda >= 0.0)) throw ConfigError("problem: lambda must be nonnegative");
  const Json solver = f.has("solver") ? f.raw("solver") : Json::object();
  doc.method = solver.is_object() && solver.contains("variant") && solver.at("variant").is_string()
                   ? solver.at("variant").get<std::string>()
                   : "pire";

  if (f.has("x_true")) {
    const Matrix X = bench::read_matrix_csv(resolve(base_dir, f.require<std::string>("x_true")));
    if (X.size() != n) throw ConfigError("problem: x_true has the wrong size");
    doc.x_true = bench::flatten_rows(X);
  }

  if (doc.method == "fista_l1" || doc.method == "irl1" || doc.method == "irls") {
    if (kind != "least_squares") {
      throw ConfigError("baseline '" + doc.method + "' needs a least_squares loss");
    }
    f.has("penalty");
    f.has("regularizer");
    Json baseline = solver;
    if (!baseline.contains("p") && j.contains("penalty") && j.at("penalty").value("kind", "") == "lp") {
      baseline["p"] = j.at("penalty").at("p");
    }
    doc.baseline = parse_baseline_config(baseline, doc.rows, doc.cols, base_dir);
    doc.problem.emplace(Problem{ConcavePenalty::identity(), Regularizer::absolute(n), *loss, lambda});
  } else {
    ConcavePenalty pen = parse_penalty(f.raw("penalty"));
    Regularizer reg = parse_regularizer(f.raw("regularizer"), n);
    doc.solver = parse_solver_config(solver, n, doc.cols, base_dir);
    doc.problem.emplace(Problem{std::move(pen), std::move(reg), *loss, lambda});
    as_config("problem", [&] {
      doc.problem->validate();
      return 0;
    });
  }
  f.finish();
  return doc;
}

SolveResult run_document(const ProblemDocument& doc) {
  const Problem& p = *doc.problem;
  if (doc.method == "fista_l1") return solve_fista_l1(p.loss.design(), p.loss.rhs(), p.lambda, doc.baseline);
  if (doc.method == "irl1") return solve_irl1(p.loss.design(), p.loss.rhs(), p.lambda, doc.baseline);
  if (doc.method == "irls") return solve_irls(p.loss.design(), p.loss.rhs(), p.lambda, doc.baseline);
  return solve(p, doc.solver);
}

}  // namespace pire
