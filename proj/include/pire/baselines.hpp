#pragma once

#include "pire/penalty.hpp"
#include "pire/result.hpp"
#include "pire/types.hpp"

namespace pire {

enum class BaselineInit { Zeros, Given, L1Warm };

struct BaselineConfig {
  double tol = 1e-6;  // relative outer step
  int max_outer = 10000;
  double inner_tol = 1e-8;  // IRL1 inner FISTA, relative step
  int inner_max_iter = 1000;
  EpsilonSchedule epsilon_schedule;
  double epsilon_floor = 1e-10;
  double p = 0.5;

  BaselineInit init = BaselineInit::L1Warm;
  Matrix x0;  // n x t, used with BaselineInit::Given
  int l1_max_iter = 100000;  // also the FISTA iteration cap

  void validate(bool needs_p) const;
};

/// min lambda ||X||_1 + 1/2 ||A X - B||_F^2 by FISTA from zero. The result
/// vector is X flattened row-major; cfg.tol and cfg.l1_max_iter apply.
SolveResult solve_fista_l1(const Matrix& A, const Matrix& B, double lambda,
                           const BaselineConfig& cfg = {});

/// Reweighted l1 for lambda sum (|x_i| + eps)^p + 1/2 ||A X - B||^2: each outer
/// step solves a weighted l1 problem by FISTA warm-started at the current
/// iterate. Inner runs that hit inner_max_iter keep their best iterate and
/// add a warning.
SolveResult solve_irl1(const Matrix& A, const Matrix& B, double lambda, const BaselineConfig& cfg);

/// Reweighted least squares for lambda sum (x_i^2 + eps)^(p/2) + 1/2 ||A X - B||^2.
/// Each outer step solves (lambda Diag(w) + A^T A) x = A^T b per column of B.
SolveResult solve_irls(const Matrix& A, const Matrix& B, double lambda, const BaselineConfig& cfg);

/// Solves (Diag(d) + A^T A) x = A^T b for d >= 0. Uses a Cholesky factor of
/// the n x n system when n <= m or some d_i = 0, and otherwise the m x m
/// matrix I + A Diag(d)^-1 A^T with x = Diag(d)^-1 A^T (I + A Diag(d)^-1 A^T)^-1 b.
/// d = 0 gives the minimum-norm least-squares solution.
class WeightedRidgeSolver {
 public:
  explicit WeightedRidgeSolver(const Matrix& A);

  // Sets *regularized when factoring needed a 1e-12 I shift.
  Vector solve(const VectorRef& d, const VectorRef& b, bool* regularized = nullptr) const;

 private:
  const Matrix& A_;
  mutable Matrix AtA_;  // formed on first use
};

}  // namespace pire
