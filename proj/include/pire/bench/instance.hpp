#pragma once

#include <cstdint>
#include <vector>

#include "pire/loss.hpp"
#include "pire/types.hpp"

namespace pire::bench {

struct SparseInstance {
  Matrix A;       // m x n, i.i.d. N(0, 1)
  Matrix X_true;  // n x t, `sparsity` nonzeros per column
  Matrix B;       // A X_true + noise_sigma E
};

/// Planted sparse regression instance; a pure function of its arguments.
/// Nonzero positions are uniform without replacement per column, values are
/// standard normal.
SparseInstance gen_sparse_instance(Index m, Index n, Index t, Index sparsity, double noise_sigma,
                                   std::uint64_t seed);

struct MultiTaskInstance {
  std::vector<Task> train;
  std::vector<Task> test;
  Matrix Z_true;  // d x tasks
  std::vector<Index> support;  // planted nonzero rows, ascending
};

/// Tasks sharing `shared_rows` nonzero feature rows: X_i Gaussian,
/// y_i = X_i z_i + noise_sigma e_i, with an independent test split.
MultiTaskInstance gen_multitask_instance(Index tasks, Index features, Index train_samples,
                                         Index test_samples, Index shared_rows,
                                         double noise_sigma, std::uint64_t seed);

// Row-major flattening, the layout of matrix variables in the solvers.
Vector flatten_rows(const Matrix& X);
Matrix unflatten_rows(const VectorRef& v, Index rows, Index cols);

}  // namespace pire::bench
