#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pire/blocks.hpp"
#include "pire/types.hpp"

namespace pire {

/// Seed of the power-iteration start vector. Fixed so that Lipschitz
/// estimates are reproducible run to run.
inline constexpr std::uint64_t kPowerIterationSeed = 0x9E3779B97F4A7C15ULL;
inline constexpr double kSpectralSafetyFactor = 1.0 + 1e-3;

/// Estimate of ||M||_2^2 by power iteration on M^T M (relative change below
/// 1e-6 or 500 iterations), inflated by kSpectralSafetyFactor. Returns 0 for
/// a zero or empty matrix.
double spectral_norm_sq(const Matrix& M, std::uint64_t seed = kPowerIterationSeed);

struct Task {
  Matrix X;  // n_i x d, one sample per row
  Vector y;  // n_i
};

enum class LossKind { LeastSquares, Logistic, MultiTaskLS };

/// Smooth loss h with Lipschitz gradient.
///
///   LeastSquares  h(X) = 1/2 ||A X - B||_F^2, X is n x t stored row-major
///                 (t = 1 is the vector case).
///   Logistic      h(x) = 1/n sum_i log(1 + exp(-b_i a_i^T x)), A is
///                 samples x features.
///   MultiTaskLS   h(Z) = sum_i ||X_i z_i - y_i||^2 / (m n_i), Z is d x m
///                 stored row-major (entry (j, i) at j*m + i).
///
/// Every gradient coordinate is a fixed-order dot product, so the gradient
/// restricted to a block is bitwise equal to the matching slice of the full
/// gradient. Losses are immutable and cheap to copy.
class SmoothLoss {
 public:
  class State;

  static SmoothLoss least_squares(Matrix A, Vector b);
  static SmoothLoss least_squares(Matrix A, Matrix B);
  static SmoothLoss logistic(Matrix A, Vector labels);
  static SmoothLoss multitask(std::vector<Task> tasks);

  LossKind kind() const;
  Index dim() const;

  // Least squares / logistic data. Throws for other kinds.
  const Matrix& design() const;
  const Matrix& rhs() const;
  const Vector& labels() const;
  // Columns of the least-squares variable (t); 1 otherwise.
  Index variable_cols() const;
  // Multi-task data. Throws for other kinds.
  const std::vector<Task>& tasks() const;

  double value(const VectorRef& x) const;
  Vector gradient(const VectorRef& x) const;
  Vector block_gradient(const VectorRef& x, Index s, const BlockStructure& blocks) const;

  double lipschitz() const;
  std::vector<double> block_lipschitz(const BlockStructure& blocks) const;

  // Incremental evaluation used by the solvers: a State caches residuals
  // (or margins) at a point.
  State evaluate(const VectorRef& x) const;
  double value(const State& state) const;
  // Writes d h / d x_i into out[i] for every i in indices.
  void gradient_at(const State& state, std::span<const Index> indices,
                   Eigen::Ref<Vector> out) const;
  // Moves the cached point from `from` to `to`; only coordinates in
  // indices may differ between the two.
  void shift(State& state, std::span<const Index> indices, const VectorRef& from,
             const VectorRef& to) const;

 private:
  struct Data;
  explicit SmoothLoss(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  void check_dim(Index size) const;

  std::shared_ptr<const Data> data_;
};

class SmoothLoss::State {
 public:
  State() = default;

 private:
  friend class SmoothLoss;
  Matrix residual;                   // least squares, m x t
  Vector margins;                    // logistic, A x
  Vector coef;                       // logistic, -b_i sigma(-b_i a_i^T x) / n
  std::vector<Vector> task_residual;  // multi-task, X_i z_i - y_i
};

}  // namespace pire
