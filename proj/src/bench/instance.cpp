#include "pire/bench/instance.hpp"

#include <algorithm>

#include "pire/bench/rng.hpp"
#include "pire/errors.hpp"

namespace pire::bench {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

SparseInstance gen_sparse_instance(Index m, Index n, Index t, Index sparsity, double noise_sigma,
                                   std::uint64_t seed) {
  if (m <= 0 || n <= 0 || t <= 0) throw ParameterError("instance dimensions must be positive");
  if (sparsity < 0 || sparsity > n) {
    throw ParameterError("sparsity " + std::to_string(sparsity) + " exceeds n = " + std::to_string(n));
  }
  if (!(noise_sigma >= 0.0)) throw ParameterError("noise level must be nonnegative");

  SparseInstance inst;
  inst.A = Rng(seed, stream_tag(Stream::Design)).normal_matrix(m, n);
  inst.X_true = Matrix::Zero(n, t);
  Rng support(seed, stream_tag(Stream::Support));
  Rng values(seed, stream_tag(Stream::Signal));
  for (Index c = 0; c < t; ++c) {
    for (Index i : support.sample_without_replacement(n, sparsity)) inst.X_true(i, c) = values.normal();
  }
  const Matrix E = Rng(seed, stream_tag(Stream::Noise)).normal_matrix(m, t);
  inst.B = inst.A * inst.X_true + noise_sigma * E;
  return inst;
}

MultiTaskInstance gen_multitask_instance(Index tasks, Index features, Index train_samples,
                                         Index test_samples, Index shared_rows,
                                         double noise_sigma, std::uint64_t seed) {
  if (tasks <= 0 || features <= 0 || train_samples <= 0 || test_samples <= 0) {
    throw ParameterError("multi-task dimensions must be positive");
  }
  if (shared_rows < 0 || shared_rows > features) {
    throw ParameterError("shared rows exceed the number of features");
  }
  if (!(noise_sigma >= 0.0)) throw ParameterError("noise level must be nonnegative");

  MultiTaskInstance inst;
  inst.support = Rng(seed, stream_tag(Stream::Support)).sample_without_replacement(features, shared_rows);
  std::sort(inst.support.begin(), inst.support.end());
  inst.Z_true = Matrix::Zero(features, tasks);
  Rng values(seed, stream_tag(Stream::Signal));
  for (Index j : inst.support) {
    for (Index i = 0; i < tasks; ++i) inst.Z_true(j, i) = values.normal();
  }
  for (Index i = 0; i < tasks; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    Task train;
    train.X = Rng(seed, stream_tag(Stream::Design, u)).normal_matrix(train_samples, features);
    Rng noise(seed, stream_tag(Stream::Noise, u));
    train.y = train.X * inst.Z_true.col(i);
    for (Index k = 0; k < train_samples; ++k) train.y[k] += noise_sigma * noise.normal();
    Task test;
    test.X = Rng(seed, stream_tag(Stream::TestDesign, u)).normal_matrix(test_samples, features);
    Rng test_noise(seed, stream_tag(Stream::TestNoise, u));
    test.y = test.X * inst.Z_true.col(i);
    for (Index k = 0; k < test_samples; ++k) test.y[k] += noise_sigma * test_noise.normal();
    inst.train.push_back(std::move(train));
    inst.test.push_back(std::move(test));
  }
  return inst;
}

Vector flatten_rows(const Matrix& X) {
  Vector v(X.size());
  Eigen::Map<RowMatrix>(v.data(), X.rows(), X.cols()) = X;
  return v;
}

Matrix unflatten_rows(const VectorRef& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionError("cannot reshape vector to the requested shape");
  return Eigen::Map<const RowMatrix>(v.data(), rows, cols);
}

}  // namespace pire::bench
