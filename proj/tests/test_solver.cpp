#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pire/errors.hpp"
#include "pire/fista.hpp"
#include "pire/solver.hpp"
#include "support.hpp"

using namespace pire;
using pire::testing::TestRng;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix scalar(double a) { return Matrix::Constant(1, 1, a); }

Problem lp_problem(const Matrix& A, const Vector& b, double lambda, double p = 0.5, double eps = 0.01) {
  return {ConcavePenalty::lp(p, eps), Regularizer::absolute(A.cols()), SmoothLoss::least_squares(A, b), lambda};
}

SolverConfig config(Variant v, std::optional<BlockStructure> blocks = std::nullopt) {
  SolverConfig cfg;
  cfg.variant = v;
  cfg.blocks = std::move(blocks);
  cfg.max_iter = 3000;
  return cfg;
}

void expect_nonincreasing(const SolveResult& r) {
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    const double prev = r.trace[k - 1].objective;
    EXPECT_GE(prev - r.trace[k].objective_step, -1e-12 * std::max(1.0, std::abs(prev))) << "step " << k;
  }
}

}  // namespace

TEST(Solver, ObjectiveExamples) {
  TestRng rng(51);
  const auto data = pire::testing::planted_ls(rng, 5, 4, 2);
  const Vector x = rng.normal_vector(4);
  const Problem zero{ConcavePenalty::lp(0.5, 0.01), Regularizer::absolute(4),
                     SmoothLoss::least_squares(data.A, data.b), 0.0};
  EXPECT_EQ(objective_value(zero, x), zero.loss.value(x));

  const Problem l1{ConcavePenalty::identity(), Regularizer::absolute(2),
                   SmoothLoss::least_squares(Matrix(Matrix::Zero(1, 2)), Vector(Vector::Zero(1))), 1.0};
  EXPECT_DOUBLE_EQ(objective_value(l1, vec({-1, 2})), 3.0);

  const Problem mixed = lp_problem(scalar(1.0), vec({3}), 1.0);
  EXPECT_NEAR(objective_value(mixed, vec({0})), 4.6, 1e-14);
}

TEST(Solver, LeastSquaresWithoutPenalty) {
  const Problem p = lp_problem(Matrix::Identity(2, 2), vec({1, 2}), 0.0);
  const auto r = solve(p, config(Variant::PIRE));
  EXPECT_EQ(r.termination, Termination::Tolerance);
  EXPECT_LT((r.x - vec({1, 2})).norm(), 1e-5);
}

TEST(Solver, ScalarL1ClosedForm) {
  const Problem p{ConcavePenalty::identity(), Regularizer::absolute(1),
                  SmoothLoss::least_squares(scalar(1.0), vec({3})), 1.0};
  SolverConfig cfg = config(Variant::PIRE);
  cfg.tol = 1e-12;
  const auto r = solve(p, cfg);
  EXPECT_NEAR(r.x[0], 2.0, 1e-10);
  EXPECT_NEAR(r.mu[0], 1.01 * r.lipschitz[0] / 2.0, 1e-15);
  EXPECT_NEAR(r.mu[0], 0.505, 1e-3);
  EXPECT_LE(stationarity_residual(p, vec({2.0}), r.mu[0]), 1e-10);
}

TEST(Solver, TraceShapeAndDescent) {
  TestRng rng(52);
  const auto data = pire::testing::planted_ls(rng, 30, 60, 5);
  const Problem p = lp_problem(data.A, data.b, 0.05);
  for (Variant v : {Variant::PIRE, Variant::PIRE_PS, Variant::PIRE_AU}) {
    SolverConfig cfg = config(v, BlockStructure::contiguous(60, 4));
    cfg.use_block_lipschitz = false;
    const auto r = solve(p, cfg);
    EXPECT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations) + 1);
    EXPECT_EQ(r.trace.front().iter, 0);
    EXPECT_EQ(r.objective, r.trace.back().objective);
    EXPECT_EQ(r.termination, Termination::Tolerance) << to_string(v);
    EXPECT_LE(r.trace.back().relative_step, cfg.tol);
    expect_nonincreasing(r);
  }
}

TEST(Solver, QuantifiedDescentForPire) {
  TestRng rng(53);
  const auto data = pire::testing::planted_ls(rng, 25, 50, 4);
  const Problem p = lp_problem(data.A, data.b, 0.02);
  const auto r = solve(p, config(Variant::PIRE));
  const double c = r.mu[0] - r.lipschitz[0] / 2.0;
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    const double gain = r.trace[k - 1].objective - r.trace[k].objective_step;
    EXPECT_GE(gain, c * r.trace[k].step_norm * r.trace[k].step_norm - 1e-8);
  }
}

TEST(Solver, SingleBlockSplittingEqualsPire) {
  TestRng rng(54);
  const auto data = pire::testing::planted_ls(rng, 20, 40, 4);
  const Problem p = lp_problem(data.A, data.b, 0.03);
  SolverConfig base = config(Variant::PIRE);
  base.epsilon_schedule = EpsilonSchedule{};
  const auto ref = solve(p, base);
  for (Variant v : {Variant::PIRE_PS, Variant::PIRE_AU}) {
    SolverConfig cfg = base;
    cfg.variant = v;
    cfg.blocks = BlockStructure::single(40);
    const auto r = solve(p, cfg);
    ASSERT_EQ(r.trace.size(), ref.trace.size());
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      EXPECT_EQ(r.trace[k].objective, ref.trace[k].objective);
      EXPECT_EQ(r.trace[k].step_norm, ref.trace[k].step_norm);
    }
    EXPECT_EQ(r.x, ref.x);
  }
}

TEST(Solver, OrthogonalBlocksDecouple) {
  TestRng rng(55);
  const Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(10, 6));
  const Matrix A = qr.householderQ() * Matrix::Identity(10, 6) * 3.0;
  const Vector b = rng.normal_vector(10);
  const Problem p = lp_problem(A, b, 0.0);
  SolverConfig cfg = config(Variant::PIRE_PS, BlockStructure::contiguous(6, 3));
  cfg.tol = 1e-12;
  const auto r = solve(p, cfg);
  for (Index s = 0; s < 3; ++s) {
    const Matrix As = A.middleCols(2 * s, 2);
    const Vector ls = As.colPivHouseholderQr().solve(b);
    EXPECT_LT((r.x.segment(2 * s, 2) - ls).norm(), 1e-8);
  }
}

TEST(Solver, JacobiEqualsGaussSeidelOnBlockDiagonalLoss) {
  TestRng rng(56);
  Matrix A = Matrix::Zero(16, 12);
  A.topLeftCorner(8, 6) = rng.normal_matrix(8, 6);
  A.bottomRightCorner(8, 6) = rng.normal_matrix(8, 6);
  const Problem p = lp_problem(A, rng.normal_vector(16), 0.05);
  SolverConfig ps = config(Variant::PIRE_PS, BlockStructure::contiguous(12, 2));
  ps.keep_iterates = true;
  SolverConfig au = ps;
  au.variant = Variant::PIRE_AU;
  const auto a = solve(p, ps), b = solve(p, au);
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (std::size_t k = 0; k < a.iterates.size(); ++k) EXPECT_EQ(a.iterates[k], b.iterates[k]);
}

TEST(Solver, WorkerCountDoesNotChangeIterates) {
  TestRng rng(57);
  const auto data = pire::testing::planted_ls(rng, 30, 64, 5);
  const Problem p = lp_problem(data.A, data.b, 0.05);
  SolverConfig cfg = config(Variant::PIRE_PS, BlockStructure::contiguous(64, 8));
  cfg.use_block_lipschitz = false;
  cfg.keep_iterates = true;
  const auto ref = solve(p, cfg);
  for (int workers : {2, 3, 8}) {
    cfg.workers = workers;
    const auto r = solve(p, cfg);
    ASSERT_EQ(r.iterates.size(), ref.iterates.size());
    for (std::size_t k = 0; k < r.iterates.size(); ++k) EXPECT_EQ(r.iterates[k], ref.iterates[k]);
  }
}

TEST(Solver, StationarityResidual) {
  TestRng rng(58);
  const Matrix A = rng.normal_matrix(12, 5);
  const Vector b = rng.normal_vector(12);
  const Problem p = lp_problem(A, b, 0.0);
  const Vector ls = A.colPivHouseholderQr().solve(b);
  EXPECT_LE(stationarity_residual(p, ls, 3.0), 1e-10);
  const Problem q = lp_problem(A, b, 0.2);
  EXPECT_GT(stationarity_residual(q, rng.normal_vector(5), 3.0), 0.0);
  EXPECT_THROW(stationarity_residual(q, ls, 0.0), ParameterError);
}

TEST(Solver, StepMinimizesSurrogate) {
  TestRng rng(59);
  const auto data = pire::testing::planted_ls(rng, 15, 30, 3);
  for (auto reg : {Regularizer::absolute(30), Regularizer::square(30),
                   Regularizer::group_l2(GroupPartition(30, {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9},
                                                             {10, 11, 12, 13, 14, 15, 16, 17, 18, 19},
                                                             {20, 21, 22, 23, 24, 25, 26, 27, 28, 29}}))}) {
    const Problem p{ConcavePenalty::lp(0.5, 0.1), reg, SmoothLoss::least_squares(data.A, data.b), 0.3};
    SolverConfig cfg = config(Variant::PIRE);
    cfg.init = InitKind::Given;
    cfg.x0 = rng.normal_vector(30);
    cfg.max_iter = 1;
    const auto r = solve(p, cfg);
    const Vector& xk = cfg.x0;
    const Vector w = p.penalty.weight(reg.value(xk));
    const Vector g = p.loss.gradient(xk);
    const double mu = r.mu[0];
    auto surrogate = [&](const Vector& x) {
      return p.lambda * w.dot(reg.value(x)) + g.dot(x - xk) + 0.5 * mu * (x - xk).squaredNorm();
    };
    const double at = surrogate(r.x);
    for (int trial = 0; trial < 100; ++trial) {
      EXPECT_LE(at, surrogate(r.x + 1e-3 * rng.normal_vector(30)));
    }
  }
}

TEST(Solver, EpsilonSchedule) {
  TestRng rng(60);
  const auto data = pire::testing::planted_ls(rng, 20, 40, 4);
  const Problem p = lp_problem(data.A, data.b, 0.01, 0.5, 0.5);
  SolverConfig cfg = config(Variant::PIRE);
  cfg.epsilon_schedule = EpsilonSchedule{0.01, 1.1};
  cfg.epsilon_floor = 1e-4;
  const auto r = solve(p, cfg);
  EXPECT_EQ(r.trace[0].epsilon, 0.01);
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    EXPECT_NEAR(r.trace[k].epsilon, std::max(0.01 / std::pow(1.1, static_cast<double>(k)), 1e-4), 1e-15);
    // descent holds at the offset used for the step
    EXPECT_GE(r.trace[k - 1].objective - r.trace[k].objective_step,
              -1e-12 * std::max(1.0, std::abs(r.trace[k - 1].objective)));
  }
  EXPECT_EQ(r.final_epsilon, r.trace.back().epsilon);
}

TEST(Solver, IdentityPenaltyAgreesWithFista) {
  TestRng rng(61);
  const auto data = pire::testing::planted_ls(rng, 30, 60, 5);
  const Problem p{ConcavePenalty::identity(), Regularizer::absolute(60),
                  SmoothLoss::least_squares(data.A, data.b), 0.05};
  SolverConfig cfg = config(Variant::PIRE);
  cfg.tol = 1e-10;
  cfg.max_iter = 100000;
  const auto r = solve(p, cfg);
  FistaOptions opts;
  opts.tol = 1e-10;
  const auto f = fista(p.loss, p.regularizer, Vector::Ones(60), p.lambda, Vector::Zero(60), opts);
  EXPECT_NEAR(r.objective, f.objective, 1e-5 * std::abs(f.objective));
}

TEST(Solver, L1WarmStartIsTheFistaSolution) {
  TestRng rng(62);
  const auto data = pire::testing::planted_ls(rng, 20, 40, 3);
  const Problem p = lp_problem(data.A, data.b, 0.02);
  SolverConfig cfg = config(Variant::PIRE);
  cfg.init = InitKind::L1Warm;
  const Vector x0 = initial_point(p, cfg);
  FistaOptions opts;
  opts.record_trace = false;
  const auto f = fista(p.loss, p.regularizer, Vector::Ones(40), p.lambda, Vector::Zero(40), opts);
  EXPECT_EQ(x0, f.x);
  cfg.keep_iterates = true;
  EXPECT_EQ(solve(p, cfg).iterates.front(), x0);
}

TEST(Solver, Backtracking) {
  TestRng rng(63);
  const auto data = pire::testing::planted_ls(rng, 20, 40, 4);
  const Problem p = lp_problem(data.A, data.b, 0.05);
  for (Variant v : {Variant::PIRE, Variant::PIRE_PS, Variant::PIRE_AU}) {
    SolverConfig cfg = config(v, BlockStructure::contiguous(40, 4));
    cfg.backtracking = true;
    cfg.mu0 = 1e-3;
    const auto r = solve(p, cfg);
    EXPECT_GT(r.backtracking_doublings, 0);
    EXPECT_EQ(r.termination, Termination::Tolerance);
    expect_nonincreasing(r);
    cfg.max_doublings = 2;
    EXPECT_THROW(solve(p, cfg), ConfigError);
  }
}

TEST(Solver, JacobiWithBlockConstantsOnStructuredLosses) {
  TestRng rng(64);
  std::vector<Task> tasks;
  for (int i = 0; i < 3; ++i) tasks.push_back({rng.normal_matrix(10, 4), rng.normal_vector(10)});
  const Problem p{ConcavePenalty::capped_l1(0.5), Regularizer::row_l1(4, 3), SmoothLoss::multitask(tasks), 0.05};
  const auto r = solve(p, config(Variant::PIRE_PS, BlockStructure::matrix_columns(4, 3)));
  EXPECT_EQ(r.termination, Termination::Tolerance);
  EXPECT_EQ(r.mu.size(), 3u);
  expect_nonincreasing(r);
}

TEST(Solver, LogisticWithGroups) {
  TestRng rng(65);
  const Problem p{ConcavePenalty::log(0.1), Regularizer::group_l2(GroupPartition(6, {{0, 1}, {2, 3}, {4, 5}})),
                  SmoothLoss::logistic(rng.normal_matrix(40, 6), rng.labels(40)), 0.02};
  for (Variant v : {Variant::PIRE, Variant::PIRE_AU}) {
    const auto r = solve(p, config(v, BlockStructure::contiguous(6, 3)));
    EXPECT_EQ(r.termination, Termination::Tolerance);
    expect_nonincreasing(r);
  }
  SolverConfig ps = config(Variant::PIRE_PS, BlockStructure::contiguous(6, 3));
  EXPECT_THROW(solve(p, ps), ConfigError);
  ps.use_block_lipschitz = false;
  expect_nonincreasing(solve(p, ps));
}

TEST(Solver, ConfigErrors) {
  const Problem p = lp_problem(Matrix::Identity(4, 4), Vector::Ones(4), 0.1);
  EXPECT_THROW(solve(p, config(Variant::PIRE_PS)), ConfigError);
  EXPECT_THROW(solve(p, config(Variant::PIRE_AU)), ConfigError);
  EXPECT_THROW(solve(p, config(Variant::PIRE_PS, BlockStructure::single(5))), ConfigError);
  SolverConfig cfg = config(Variant::PIRE);
  cfg.mu_margin = 1.0;
  EXPECT_THROW(solve(p, cfg), ConfigError);
  cfg = config(Variant::PIRE);
  cfg.tol = 0.0;
  EXPECT_THROW(solve(p, cfg), ConfigError);
  cfg = config(Variant::PIRE);
  cfg.init = InitKind::Given;
  cfg.x0 = Vector::Zero(3);
  EXPECT_THROW(solve(p, cfg), DimensionError);

  const Problem grouped{ConcavePenalty::lp(0.5, 0.1), Regularizer::group_l2(GroupPartition(4, {{0, 1, 2}, {3}})),
                        p.loss, 0.1};
  EXPECT_THROW(solve(grouped, config(Variant::PIRE_AU, BlockStructure::contiguous(4, 2))), ConfigError);
  const Problem negative{p.penalty, p.regularizer, p.loss, -1.0};
  EXPECT_THROW(solve(negative, config(Variant::PIRE)), ParameterError);
  const Problem mismatch{p.penalty, Regularizer::absolute(3), p.loss, 0.1};
  EXPECT_THROW(solve(mismatch, config(Variant::PIRE)), DimensionError);
}

TEST(Solver, NumericFailureCarriesTrace) {
  Matrix A = Matrix::Identity(2, 2) * 1e200;
  const Problem p = lp_problem(A, Vector::Constant(2, 1e200), 0.1);
  SolverConfig cfg = config(Variant::PIRE);
  cfg.init = InitKind::Given;
  cfg.x0 = Vector::Constant(2, 1e200);
  EXPECT_THROW(solve(p, cfg), NumericFailure);
}

TEST(Solver, TimeBudget) {
  TestRng rng(66);
  const auto data = pire::testing::planted_ls(rng, 60, 200, 10);
  SolverConfig cfg = config(Variant::PIRE);
  cfg.tol = 1e-300;
  cfg.max_iter = 100000000;
  cfg.time_budget_seconds = 0.05;
  const auto r = solve(lp_problem(data.A, data.b, 0.01), cfg);
  EXPECT_EQ(r.termination, Termination::TimeBudget);
  EXPECT_EQ(to_string(r.termination), "time_budget");
}

TEST(Solver, TraceCsv) {
  const Problem p = lp_problem(Matrix::Identity(2, 2), vec({1, 2}), 0.1);
  const auto r = solve(p, config(Variant::PIRE));
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,objective,step_norm,relative_step,epsilon,elapsed_ms");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(r.trace.size()) + 1);
}
