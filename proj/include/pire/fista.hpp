#pragma once

#include "pire/loss.hpp"
#include "pire/regularizer.hpp"
#include "pire/result.hpp"

namespace pire {

struct FistaOptions {
  double tol = 1e-6;  // on the relative step ||x+ - x|| / ||x||
  int max_iter = 100000;
  // Return the iterate with the lowest objective instead of the last one.
  bool best_iterate = false;
  bool record_trace = true;
  // Lipschitz constant of grad h; 0 means estimate it from the loss.
  double lipschitz = 0.0;
};

/// Accelerated proximal gradient for the convex weighted problem
///
///   min_x  lambda <w, g(x)> + h(x)
///
/// with step 1/L(h) and t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2. The trace
/// objective is the weighted objective above. lambda = 0 gives plain
/// accelerated gradient descent.
SolveResult fista(const SmoothLoss& loss, const Regularizer& reg, const VectorRef& w, double lambda,
                  const VectorRef& x0, const FistaOptions& options = {});

}  // namespace pire
