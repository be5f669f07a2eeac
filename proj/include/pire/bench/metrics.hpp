#pragma once

#include <vector>

#include "pire/loss.hpp"
#include "pire/types.hpp"

namespace pire::bench {

struct RecoveryError {
  double value = 0.0;
  // Set when x_true = 0; value is then the absolute norm of x_hat.
  bool absolute = false;
};

RecoveryError relative_recovery_error(const VectorRef& x_hat, const VectorRef& x_true);

// Number of entries with |x_i| > threshold.
Index support_size(const VectorRef& x, double threshold = 1e-6);

/// lambda sum |x_i|^p + 1/2 ||A X - B||_F^2 for X flattened row-major, with
/// no smoothing offset. p = 1 is the l1 objective.
double lp_objective(const Matrix& A, const Matrix& B, const VectorRef& x, double lambda, double p);

/// Mean over tasks of ||X_i z_i - y_i||^2 / n_i, with Z (d x m) flattened
/// row-major.
double multitask_mse(const std::vector<Task>& tasks, const VectorRef& z);

// Rows of a row-major d x m matrix whose l1 norm exceeds threshold.
std::vector<Index> row_support(const VectorRef& z, Index rows, Index cols, double threshold);

}  // namespace pire::bench
