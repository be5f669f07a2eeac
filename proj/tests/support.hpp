#pragma once

#include <cmath>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <random>

#include "pire/loss.hpp"
#include "pire/types.hpp"

namespace pire::testing {

// Test-side generator, deliberately separate from the library's.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(engine_); }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Matrix normal_matrix(Index r, Index c) {
    Matrix M(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) M(i, j) = normal();
    return M;
  }
  Vector uniform_vector(Index n, double lo, double hi) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Vector labels(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    return v;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// Sparse planted least-squares data b = A x + 0.01 e.
struct LsData {
  Matrix A;
  Vector b;
  Vector x_true;
};

inline LsData planted_ls(TestRng& rng, Index m, Index n, Index k) {
  LsData d{rng.normal_matrix(m, n), Vector::Zero(m), Vector::Zero(n)};
  for (Index j = 0; j < k; ++j) d.x_true[rng.integer(0, n - 1)] = rng.normal();
  d.b = d.A * d.x_true + 0.01 * rng.normal_vector(m);
  return d;
}

// Central differences of f along every coordinate.
template <class F>
Vector numeric_gradient(F&& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = xm[i] = x[i];
  }
  return g;
}

inline double relative_difference(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Largest singular value squared, exact.
inline double exact_norm_sq(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const double s = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  return s * s;
}

}  // namespace pire::testing
