#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pire/bench/csv_io.hpp"
#include "pire/bench/experiments.hpp"
#include "pire/bench/instance.hpp"
#include "pire/bench/metrics.hpp"
#include "pire/config.hpp"

namespace {

namespace fs = std::filesystem;
using pire::Json;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw pire::ConfigError("--seeds: '" + item + "' is not a nonnegative integer");
    }
  }
  if (seeds.empty()) throw pire::ConfigError("--seeds: no seeds given");
  return seeds;
}

int run_solve(const std::string& config_path, const std::string& out_dir) {
  const pire::ProblemDocument doc = pire::load_problem_document(config_path);
  const pire::SolveResult r = pire::run_document(doc);
  fs::create_directories(out_dir);
  pire::bench::write_matrix_csv((fs::path(out_dir) / "solution.csv").string(),
                                pire::bench::unflatten_rows(r.x, doc.rows, doc.cols));
  {
    std::ofstream trace(fs::path(out_dir) / "trace.csv");
    pire::write_trace_csv(trace, r.trace);
  }
  Json summary{{"method", doc.method},
               {"objective", r.objective},
               {"iterations", r.iterations},
               {"termination", pire::to_string(r.termination)},
               {"stationarity_residual", r.stationarity_residual},
               {"support_size", pire::bench::support_size(r.x)},
               {"elapsed_ms", r.elapsed_ms},
               {"lipschitz", r.lipschitz},
               {"mu", r.mu},
               {"warnings", r.warnings}};
  if (doc.x_true) {
    summary["rel_error"] = pire::bench::relative_recovery_error(r.x, *doc.x_true).value;
  }
  std::ofstream(fs::path(out_dir) / "result.json") << summary.dump(2) << '\n';
  std::cout << doc.method << ": objective " << r.objective << " after " << r.iterations
            << " iterations (" << pire::to_string(r.termination) << ")\n";
  return 0;
}

int run_family(pire::bench::Family family, const std::string& spec_path, const std::string& seeds,
               const std::string& out_dir) {
  Json j = pire::load_json_file(spec_path);
  const std::string name = pire::bench::to_string(family);
  if (!j.is_object()) throw pire::ConfigError(spec_path + ": expected an object");
  if (!j.contains("family")) j["family"] = name;
  if (j["family"] != name) {
    throw pire::ConfigError(spec_path + ": spec family is " + j["family"].dump() + ", expected " + name);
  }
  if (!seeds.empty()) j["seeds"] = parse_seeds(seeds);
  const auto spec = pire::parse_experiment_spec(j, fs::path(spec_path).parent_path().string());

  pire::bench::Report report;
  if (spec.train_csv) {
    const auto train = pire::bench::load_csv_dataset(*spec.train_csv, spec.schema);
    const auto test = pire::bench::load_csv_dataset(*spec.test_csv, spec.schema);
    report = pire::bench::run_multitask_experiment(spec, train, test);
  } else {
    report = pire::bench::run_experiment(spec);
  }
  pire::bench::write_report(report, out_dir);
  pire::bench::write_summary_csv(std::cout, report);
  return 0;
}

struct GenOptions {
  std::string family = "sparse";
  long m = 200, n = 1000, t = 1, sparsity = 20;
  long tasks = 5, features = 50, train = 60, test = 200, shared = 10;
  double noise = 0.01;
  double lambda = 1e-4;
  std::uint64_t seed = 1;
  std::string out;
};

int run_gen(const GenOptions& o) {
  fs::create_directories(o.out);
  const fs::path dir(o.out);
  if (o.family == "sparse") {
    const auto inst = pire::bench::gen_sparse_instance(o.m, o.n, o.t, o.sparsity, o.noise, o.seed);
    pire::bench::write_matrix_csv((dir / "A.csv").string(), inst.A);
    pire::bench::write_matrix_csv((dir / "b.csv").string(), inst.B);
    pire::bench::write_matrix_csv((dir / "x_true.csv").string(), inst.X_true);
    const Json problem{{"loss", {{"kind", "least_squares"}, {"A", "A.csv"}, {"b", "b.csv"}}},
                       {"penalty", {{"kind", "lp"}, {"p", 0.5}, {"epsilon", 0.01}}},
                       {"regularizer", {{"kind", "abs"}}},
                       {"lambda", o.lambda},
                       {"x_true", "x_true.csv"},
                       {"solver", {{"variant", "pire"}, {"init", "l1"}, {"epsilon", {{"start", 0.01}, {"rho", 1.1}}}}}};
    std::ofstream(dir / "problem.json") << problem.dump(2) << '\n';
  } else if (o.family == "multitask") {
    const auto inst = pire::bench::gen_multitask_instance(o.tasks, o.features, o.train, o.test,
                                                          o.shared, o.noise, o.seed);
    pire::bench::write_csv_dataset((dir / "train.csv").string(), inst.train);
    pire::bench::write_csv_dataset((dir / "test.csv").string(), inst.test);
    pire::bench::write_matrix_csv((dir / "z_true.csv").string(), inst.Z_true);
  } else {
    throw pire::ConfigError("gen: unknown family '" + o.family + "'");
  }
  std::cout << "wrote " << o.family << " instance to " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal iteratively reweighted solvers and sparse-recovery benchmarks"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* solve = app.add_subcommand("solve", "Solve one problem described by a JSON document");
  solve->add_option("--config", config_path, "Problem and solver document")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out_dir, "Output directory")->required();

  std::string spec_path, seeds;
  const auto add_family = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seeds", seeds, "Comma-separated seeds, overriding the spec");
    sub->add_option("--out", out_dir, "Output directory")->required();
    return sub;
  };
  auto* recovery = add_family("recovery", "Sparse recovery experiment");
  auto* timing = add_family("timing", "Matrix-form timing experiment");
  auto* multitask = add_family("multitask", "Capped-l1 multi-task experiment");

  GenOptions gen_opts;
  auto* gen = app.add_subcommand("gen", "Write a synthetic instance to CSV files");
  gen->add_option("--family", gen_opts.family, "sparse or multitask")->capture_default_str();
  gen->add_option("--m", gen_opts.m, "Rows of A")->capture_default_str();
  gen->add_option("--n", gen_opts.n, "Columns of A")->capture_default_str();
  gen->add_option("--t", gen_opts.t, "Columns of X")->capture_default_str();
  gen->add_option("--sparsity", gen_opts.sparsity, "Nonzeros per column of X")->capture_default_str();
  gen->add_option("--tasks", gen_opts.tasks, "Number of tasks")->capture_default_str();
  gen->add_option("--features", gen_opts.features, "Features per task")->capture_default_str();
  gen->add_option("--train", gen_opts.train, "Training samples per task")->capture_default_str();
  gen->add_option("--test", gen_opts.test, "Test samples per task")->capture_default_str();
  gen->add_option("--shared-rows", gen_opts.shared, "Planted shared rows")->capture_default_str();
  gen->add_option("--noise", gen_opts.noise, "Noise standard deviation")->capture_default_str();
  gen->add_option("--lambda", gen_opts.lambda, "lambda written to problem.json")->capture_default_str();
  gen->add_option("--seed", gen_opts.seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_opts.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve) return run_solve(config_path, out_dir);
    if (*recovery) return run_family(pire::bench::Family::Recovery, spec_path, seeds, out_dir);
    if (*timing) return run_family(pire::bench::Family::Timing, spec_path, seeds, out_dir);
    if (*multitask) return run_family(pire::bench::Family::MultiTask, spec_path, seeds, out_dir);
    if (*gen) return run_gen(gen_opts);
  } catch (const pire::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const pire::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
