#include "pire/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <chrono>
#include <cmath>

#include "pire/fista.hpp"
#include "pire/loss.hpp"
#include "pire/regularizer.hpp"

namespace pire {

namespace {

using Clock = std::chrono::steady_clock;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Vector flatten(const Matrix& X) {
  Vector v(X.size());
  Eigen::Map<RowMatrix>(v.data(), X.rows(), X.cols()) = X;
  return v;
}

void check_data(const Matrix& A, const Matrix& B, double lambda) {
  if (A.rows() != B.rows()) throw DimensionError("A and B must have the same number of rows");
  if (A.size() == 0 || B.cols() == 0) throw DimensionError("empty problem data");
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be nonnegative");
}

Vector start_point(const Matrix& A, const Matrix& B, double lambda, const BaselineConfig& cfg) {
  switch (cfg.init) {
    case BaselineInit::Zeros:
      return Vector::Zero(A.cols() * B.cols());
    case BaselineInit::Given:
      if (cfg.x0.rows() != A.cols() || cfg.x0.cols() != B.cols()) {
        throw DimensionError("initial point must be " + std::to_string(A.cols()) + " x " +
                             std::to_string(B.cols()));
      }
      return flatten(cfg.x0);
    case BaselineInit::L1Warm:
      return solve_fista_l1(A, B, lambda, cfg).x;
  }
  return Vector::Zero(A.cols() * B.cols());
}

double next_epsilon(double eps, const BaselineConfig& cfg) {
  const double next = std::max(eps / cfg.epsilon_schedule.rho, cfg.epsilon_floor);
  return next > 0.0 ? next : eps;
}

}  // namespace

void BaselineConfig::validate(bool needs_p) const {
  if (!(tol > 0.0) || !(inner_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (max_outer <= 0 || inner_max_iter <= 0 || l1_max_iter <= 0) {
    throw ConfigError("iteration limits must be positive");
  }
  if (!(epsilon_floor >= 0.0)) throw ConfigError("epsilon floor must be nonnegative");
  epsilon_schedule.validate();
  if (needs_p && !(p > 0.0 && p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
}

SolveResult solve_fista_l1(const Matrix& A, const Matrix& B, double lambda, const BaselineConfig& cfg) {
  check_data(A, B, lambda);
  cfg.validate(false);
  const SmoothLoss loss = SmoothLoss::least_squares(A, B);
  const Regularizer reg = Regularizer::absolute(loss.dim());
  FistaOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.l1_max_iter;
  const Vector ones = Vector::Ones(loss.dim());
  SolveResult r = fista(loss, reg, ones, lambda, Vector::Zero(loss.dim()), opts);
  const double L = r.lipschitz.front();
  const Vector b = r.x - loss.gradient(r.x) / L;
  const Vector step = lambda > 0.0 ? reg.prox(ones, lambda, L, b) : b;
  r.stationarity_residual = (r.x - step).lpNorm<Eigen::Infinity>();
  return r;
}

SolveResult solve_irl1(const Matrix& A, const Matrix& B, double lambda, const BaselineConfig& cfg) {
  check_data(A, B, lambda);
  cfg.validate(true);
  const auto start = Clock::now();
  const SmoothLoss loss = SmoothLoss::least_squares(A, B);
  const Regularizer reg = Regularizer::absolute(loss.dim());

  SolveResult result;
  const double L = loss.lipschitz();
  result.lipschitz = {L};
  result.mu = {L};

  Vector x = start_point(A, B, lambda, cfg);
  ConcavePenalty pen = ConcavePenalty::lp(cfg.p, cfg.epsilon_schedule.epsilon0);
  const auto objective = [&](const Vector& v) {
    return lambda * pen.value(v.cwiseAbs()) + loss.value(v);
  };
  double F = objective(x);
  result.trace.push_back({0, F, F, 0.0, 0.0, pen.epsilon(), ms_since(start)});

  FistaOptions inner;
  inner.tol = cfg.inner_tol;
  inner.max_iter = cfg.inner_max_iter;
  inner.best_iterate = true;
  inner.record_trace = false;
  inner.lipschitz = L;

  int capped = 0;
  result.termination = Termination::MaxIter;
  int k = 0;
  while (k < cfg.max_outer) {
    const Vector w = pen.weight(x.cwiseAbs());
    SolveResult sub = fista(loss, reg, w, lambda, x, inner);
    result.inner_iterations += sub.iterations;
    if (sub.termination != Termination::Tolerance) ++capped;
    ++k;

    const Vector& xn = sub.x;
    const double F_step = objective(xn);
    const double step = (xn - x).norm();
    const double xnorm = x.norm();
    const double rel = xnorm > 0.0 ? step / xnorm : step;
    if (pen.uses_epsilon()) pen = pen.with_epsilon(next_epsilon(pen.epsilon(), cfg));
    const double F_next = objective(xn);
    result.trace.push_back({k, F_next, F_step, step, rel, pen.epsilon(), ms_since(start)});
    if (!std::isfinite(F_next)) {
      throw NumericFailure("irl1: non-finite objective at iteration " + std::to_string(k),
                           std::move(result.trace));
    }
    x = xn;
    if (rel <= cfg.tol) {
      result.termination = Termination::Tolerance;
      break;
    }
  }
  if (capped > 0) {
    result.warnings.push_back("inner FISTA reached " + std::to_string(cfg.inner_max_iter) +
                              " iterations in " + std::to_string(capped) +
                              " outer steps; the best inner iterate was kept");
  }

  result.iterations = k;
  result.objective = result.trace.back().objective;
  result.final_epsilon = pen.epsilon();
  const Vector w = pen.weight(x.cwiseAbs());
  const Vector b = x - loss.gradient(x) / L;
  result.stationarity_residual =
      (x - (lambda > 0.0 ? reg.prox(w, lambda, L, b) : b)).lpNorm<Eigen::Infinity>();
  result.x = std::move(x);
  result.elapsed_ms = ms_since(start);
  return result;
}

WeightedRidgeSolver::WeightedRidgeSolver(const Matrix& A) : A_(A) {}

Vector WeightedRidgeSolver::solve(const VectorRef& d, const VectorRef& b, bool* regularized) const {
  const Index n = A_.cols();
  const Index m = A_.rows();
  if (d.size() != n || b.size() != m) throw DimensionError("weighted ridge: dimension mismatch");
  if ((d.array() < 0.0).any()) throw DomainError("weighted ridge: diagonal must be nonnegative");
  if (d.isZero(0.0)) return A_.completeOrthogonalDecomposition().solve(b);

  const auto factor = [&](Matrix M) {
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) {
      M.diagonal().array() += 1e-12;
      llt.compute(M);
      if (regularized) *regularized = true;
      if (llt.info() != Eigen::Success) {
        throw NumericFailure("weighted ridge: system is not positive definite", {});
      }
    }
    return llt;
  };

  if (n <= m || (d.array() == 0.0).any()) {
    if (AtA_.size() == 0) AtA_ = A_.transpose() * A_;
    Matrix M = AtA_;
    M.diagonal() += d;
    return factor(std::move(M)).solve(A_.transpose() * b);
  }
  const Vector dinv = d.cwiseInverse();
  Matrix C = (A_ * dinv.asDiagonal()) * A_.transpose();
  C.diagonal().array() += 1.0;
  const Vector z = factor(std::move(C)).solve(b);
  return dinv.asDiagonal() * (A_.transpose() * z);
}

SolveResult solve_irls(const Matrix& A, const Matrix& B, double lambda, const BaselineConfig& cfg) {
  check_data(A, B, lambda);
  cfg.validate(true);
  const auto start = Clock::now();
  const SmoothLoss loss = SmoothLoss::least_squares(A, B);
  const Index n = A.cols();
  const Index t = B.cols();
  const WeightedRidgeSolver ridge(A);

  SolveResult result;
  Vector x = start_point(A, B, lambda, cfg);
  // f(x^2) with f(y) = sum (y + eps)^(p/2); its weight times 2 is the
  // IRLS weight p / (x^2 + eps)^(1 - p/2).
  ConcavePenalty pen = ConcavePenalty::lp(0.5 * cfg.p, cfg.epsilon_schedule.epsilon0);
  const auto objective = [&](const Vector& v) {
    return lambda * pen.value(v.cwiseProduct(v)) + loss.value(v);
  };
  double F = objective(x);
  result.trace.push_back({0, F, F, 0.0, 0.0, pen.epsilon(), ms_since(start)});

  result.termination = Termination::MaxIter;
  int k = 0;
  Vector xn(x.size());
  Vector d(n);
  while (k < cfg.max_outer) {
    const Vector w = 2.0 * pen.weight(x.cwiseProduct(x));
    for (Index c = 0; c < t; ++c) {
      for (Index j = 0; j < n; ++j) d[j] = lambda * w[j * t + c];
      const Vector col = ridge.solve(d, B.col(c), &result.regularized);
      for (Index j = 0; j < n; ++j) xn[j * t + c] = col[j];
    }
    ++k;

    const double F_step = objective(xn);
    const double step = (xn - x).norm();
    const double xnorm = x.norm();
    const double rel = xnorm > 0.0 ? step / xnorm : step;
    pen = pen.with_epsilon(next_epsilon(pen.epsilon(), cfg));
    const double F_next = objective(xn);
    result.trace.push_back({k, F_next, F_step, step, rel, pen.epsilon(), ms_since(start)});
    if (!std::isfinite(F_next)) {
      throw NumericFailure("irls: non-finite objective at iteration " + std::to_string(k),
                           std::move(result.trace));
    }
    x = xn;
    if (rel <= cfg.tol) {
      result.termination = Termination::Tolerance;
      break;
    }
  }
  if (result.regularized) {
    result.warnings.push_back("a 1e-12 I shift was added to factor a singular system");
  }

  result.iterations = k;
  result.objective = result.trace.back().objective;
  result.final_epsilon = pen.epsilon();
  // Residual of the stationarity equation lambda Diag(w) x + grad h(x) = 0.
  const Vector w = 2.0 * pen.weight(x.cwiseProduct(x));
  result.stationarity_residual =
      (lambda * w.cwiseProduct(x) + loss.gradient(x)).lpNorm<Eigen::Infinity>();
  result.x = std::move(x);
  result.elapsed_ms = ms_since(start);
  return result;
}

}  // namespace pire
