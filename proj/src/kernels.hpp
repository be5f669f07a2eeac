#pragma once

#include <cstddef>

namespace pire::kernels {

// Dot product with a fixed reduction order: four interleaved partial sums
// combined as (s0 + s1) + (s2 + s3), then the tail. The result depends only
// on the values and the length, never on which caller asked for it, so a
// gradient coordinate is bitwise the same whether it is computed as part of
// the full gradient or of a single block.
inline double dot(const double* a, const double* b, std::ptrdiff_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::ptrdiff_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double alpha, const double* x, double* y, std::ptrdiff_t n) {
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double squared_norm(const double* a, std::ptrdiff_t n) { return dot(a, a, n); }

}  // namespace pire::kernels
