#include "pire/bench/metrics.hpp"

#include <cmath>

#include "pire/errors.hpp"

namespace pire::bench {

RecoveryError relative_recovery_error(const VectorRef& x_hat, const VectorRef& x_true) {
  if (x_hat.size() != x_true.size()) throw DimensionError("recovery error: size mismatch");
  const double denom = x_true.norm();
  if (denom == 0.0) return {x_hat.norm(), true};
  return {(x_hat - x_true).norm() / denom, false};
}

Index support_size(const VectorRef& x, double threshold) {
  return (x.array().abs() > threshold).count();
}

double lp_objective(const Matrix& A, const Matrix& B, const VectorRef& x, double lambda, double p) {
  const Index n = A.cols();
  const Index t = B.cols();
  if (x.size() != n * t) throw DimensionError("lp objective: variable has the wrong size");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("lp objective needs p in (0, 1]");
  double penalty = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    if (a > 0.0) penalty += p == 1.0 ? a : std::pow(a, p);
  }
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Matrix R = A * Eigen::Map<const RowMatrix>(x.data(), n, t) - B;
  return lambda * penalty + 0.5 * R.squaredNorm();
}

double multitask_mse(const std::vector<Task>& tasks, const VectorRef& z) {
  if (tasks.empty()) throw DimensionError("no tasks");
  const Index m = static_cast<Index>(tasks.size());
  const Index d = tasks.front().X.cols();
  if (z.size() != d * m) throw DimensionError("multi-task coefficients have the wrong size");
  double total = 0.0;
  for (Index i = 0; i < m; ++i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    Vector zi(d);
    for (Index j = 0; j < d; ++j) zi[j] = z[j * m + i];
    total += (task.X * zi - task.y).squaredNorm() / static_cast<double>(task.X.rows());
  }
  return total / static_cast<double>(m);
}

std::vector<Index> row_support(const VectorRef& z, Index rows, Index cols, double threshold) {
  if (z.size() != rows * cols) throw DimensionError("row support: size mismatch");
  std::vector<Index> out;
  for (Index j = 0; j < rows; ++j) {
    if (z.segment(j * cols, cols).lpNorm<1>() > threshold) out.push_back(j);
  }
  return out;
}

}  // namespace pire::bench
