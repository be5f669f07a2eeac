#include "pire/fista.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

namespace pire {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double elapsed_ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// Least-squares products A X for a row-major flattened X, kept alongside the
// iterates so the objective at x comes for free and A y is a combination of
// two stored products.
class LeastSquaresCache {
 public:
  explicit LeastSquaresCache(const SmoothLoss& loss)
      : A_(loss.design()), B_(loss.rhs()), n_(loss.design().cols()), t_(loss.rhs().cols()) {}

  Matrix product(const Vector& x) const {
    return A_ * Eigen::Map<const RowMatrix>(x.data(), n_, t_);
  }
  double value(const Matrix& AX) const { return 0.5 * (AX - B_).squaredNorm(); }
  Vector gradient(const Matrix& AY) const {
    Vector g(n_ * t_);
    Eigen::Map<RowMatrix>(g.data(), n_, t_) = A_.transpose() * (AY - B_);
    return g;
  }

 private:
  const Matrix& A_;
  const Matrix& B_;
  Index n_;
  Index t_;
};

}  // namespace

SolveResult fista(const SmoothLoss& loss, const Regularizer& reg, const VectorRef& w, double lambda,
                  const VectorRef& x0, const FistaOptions& options) {
  if (x0.size() != loss.dim() || reg.input_dim() != loss.dim()) {
    throw DimensionError("fista: loss, regularizer and start point disagree on dimension");
  }
  if (w.size() != reg.output_dim()) throw DimensionError("fista: weight vector has the wrong size");
  if (lambda < 0.0) throw ParameterError("fista: lambda must be nonnegative");
  if (!(options.tol > 0.0) || options.max_iter <= 0) {
    throw ParameterError("fista: tol and max_iter must be positive");
  }
  const double L = options.lipschitz > 0.0 ? options.lipschitz : loss.lipschitz();
  if (!(L > 0.0)) throw ParameterError("fista: the loss has a zero Lipschitz constant");

  const auto start = std::chrono::steady_clock::now();
  const auto penalty_term = [&](const Vector& x) {
    return lambda > 0.0 ? lambda * w.dot(reg.value(x)) : 0.0;
  };

  std::optional<LeastSquaresCache> ls;
  if (loss.kind() == LossKind::LeastSquares) ls.emplace(loss);

  SolveResult result;
  result.lipschitz = {L};
  result.mu = {L};

  Vector x = x0;
  Vector y = x;
  Matrix AX, AY;
  double hx;
  if (ls) {
    AX = ls->product(x);
    AY = AX;
    hx = ls->value(AX);
  } else {
    hx = loss.value(x);
  }
  double F = penalty_term(x) + hx;
  if (options.record_trace) result.trace.push_back({0, F, F, 0.0, 0.0, 0.0, 0.0});

  Vector best = x;
  double best_F = F;
  double t = 1.0;
  result.termination = Termination::MaxIter;
  int k = 0;
  while (k < options.max_iter) {
    const Vector grad = ls ? ls->gradient(AY) : loss.gradient(y);
    const Vector b = y - grad / L;
    Vector xn = lambda > 0.0 ? reg.prox(w, lambda, L, b) : b;

    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / tn;
    double hxn;
    if (ls) {
      Matrix AXn = ls->product(xn);
      hxn = ls->value(AXn);
      AY = AXn + beta * (AXn - AX);
      AX = std::move(AXn);
    } else {
      hxn = loss.value(xn);
    }
    y = xn + beta * (xn - x);
    t = tn;

    const double step = (xn - x).norm();
    const double xnorm = x.norm();
    const double rel = xnorm > 0.0 ? step / xnorm : step;
    x = std::move(xn);
    hx = hxn;
    F = penalty_term(x) + hx;
    ++k;
    if (!std::isfinite(F)) {
      throw NumericFailure("fista: non-finite objective at iteration " + std::to_string(k),
                           std::move(result.trace));
    }
    if (options.record_trace) {
      result.trace.push_back({k, F, F, step, rel, 0.0, elapsed_ms_since(start)});
    }
    if (F < best_F) {
      best_F = F;
      best = x;
    }
    if (rel <= options.tol) {
      result.termination = Termination::Tolerance;
      break;
    }
  }

  result.iterations = k;
  if (options.best_iterate && best_F < F) {
    result.x = std::move(best);
    result.objective = best_F;
  } else {
    result.x = std::move(x);
    result.objective = F;
  }
  result.elapsed_ms = elapsed_ms_since(start);
  return result;
}

}  // namespace pire
