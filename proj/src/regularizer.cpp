#include "pire/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pire/errors.hpp"

namespace pire {

namespace {

double soft_threshold(double v, double threshold) {
  if (v > threshold) return v - threshold;
  if (v < -threshold) return v + threshold;
  return 0.0;
}

}  // namespace

GroupPartition::GroupPartition(Index n, std::vector<std::vector<Index>> groups)
    : n_(n), groups_(std::move(groups)), owner_(static_cast<std::size_t>(n), -1) {
  if (n <= 0) throw ParameterError("group partition needs a positive dimension");
  for (std::size_t j = 0; j < groups_.size(); ++j) {
    if (groups_[j].empty()) throw ParameterError("group " + std::to_string(j) + " is empty");
    for (Index i : groups_[j]) {
      if (i < 0 || i >= n) throw ParameterError("group index " + std::to_string(i) + " out of range");
      auto& owner = owner_[static_cast<std::size_t>(i)];
      if (owner != -1) {
        throw ParameterError("index " + std::to_string(i) + " belongs to more than one group");
      }
      owner = static_cast<Index>(j);
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (owner_[static_cast<std::size_t>(i)] == -1) {
      throw ParameterError("index " + std::to_string(i) + " is not in any group");
    }
  }
}

Regularizer::Regularizer(RegularizerKind kind, Index n) : kind_(kind), n_(n) {
  if (n <= 0) throw ParameterError("regularizer needs a positive input dimension");
}

Regularizer Regularizer::absolute(Index n) { return Regularizer(RegularizerKind::AbsoluteValue, n); }

Regularizer Regularizer::square(Index n) { return Regularizer(RegularizerKind::Square, n); }

Regularizer Regularizer::group_l2(GroupPartition partition) {
  Regularizer reg(RegularizerKind::GroupL2, partition.dim());
  reg.partition_ = std::make_shared<const GroupPartition>(std::move(partition));
  return reg;
}

Regularizer Regularizer::row_l1(Index rows, Index cols) {
  if (rows <= 0 || cols <= 0) throw ParameterError("row_l1 needs positive rows and cols");
  Regularizer reg(RegularizerKind::RowL1, rows * cols);
  reg.rows_ = rows;
  reg.cols_ = cols;
  return reg;
}

Index Regularizer::output_dim() const {
  switch (kind_) {
    case RegularizerKind::AbsoluteValue:
    case RegularizerKind::Square:
      return n_;
    case RegularizerKind::GroupL2:
      return partition_->count();
    case RegularizerKind::RowL1:
      return rows_;
  }
  return 0;
}

Index Regularizer::component_of(Index i) const {
  switch (kind_) {
    case RegularizerKind::AbsoluteValue:
    case RegularizerKind::Square:
      return i;
    case RegularizerKind::GroupL2:
      return partition_->group_of(i);
    case RegularizerKind::RowL1:
      return i / cols_;
  }
  return 0;
}

Vector Regularizer::value(const VectorRef& x) const {
  if (x.size() != n_) {
    throw DimensionError("regularizer expects dimension " + std::to_string(n_) + ", got " +
                         std::to_string(x.size()));
  }
  Vector y = Vector::Zero(output_dim());
  switch (kind_) {
    case RegularizerKind::AbsoluteValue:
      y = x.cwiseAbs();
      break;
    case RegularizerKind::Square:
      y = x.cwiseProduct(x);
      break;
    case RegularizerKind::GroupL2:
      for (Index j = 0; j < partition_->count(); ++j) {
        double sq = 0.0;
        for (Index i : partition_->group(j)) sq += x[i] * x[i];
        y[j] = std::sqrt(sq);
      }
      break;
    case RegularizerKind::RowL1:
      for (Index i = 0; i < n_; ++i) y[i / cols_] += std::abs(x[i]);
      break;
  }
  return y;
}

void Regularizer::check_prox_args(const VectorRef& w, double lambda, double mu) const {
  if (w.size() != output_dim()) {
    throw DimensionError("prox weight has dimension " + std::to_string(w.size()) +
                         ", expected " + std::to_string(output_dim()));
  }
  if (!(lambda > 0.0)) throw ParameterError("prox needs lambda > 0");
  if (!(mu > 0.0)) throw ParameterError("prox needs mu > 0");
  for (Index j = 0; j < w.size(); ++j) {
    if (!(w[j] >= 0.0)) {
      throw DomainError("prox weight must be nonnegative, w[" + std::to_string(j) +
                        "] = " + std::to_string(w[j]));
    }
  }
}

Vector Regularizer::prox(const VectorRef& w, double lambda, double mu, const VectorRef& b) const {
  if (b.size() != n_) throw DimensionError("prox point has the wrong dimension");
  Vector out(n_);
  std::vector<Index> all(static_cast<std::size_t>(n_));
  for (Index i = 0; i < n_; ++i) all[static_cast<std::size_t>(i)] = i;
  prox_indices(w, lambda, mu, b, out, all);
  return out;
}

void Regularizer::prox_indices(const VectorRef& w, double lambda, double mu, const VectorRef& b,
                               Eigen::Ref<Vector> out, std::span<const Index> indices) const {
  check_prox_args(w, lambda, mu);
  if (b.size() != n_ || out.size() != n_) throw DimensionError("prox point has the wrong dimension");
  const double scale = lambda / mu;
  switch (kind_) {
    case RegularizerKind::AbsoluteValue:
      for (Index i : indices) out[i] = soft_threshold(b[i], scale * w[i]);
      break;
    case RegularizerKind::Square:
      for (Index i : indices) out[i] = b[i] * (mu / (mu + 2.0 * lambda * w[i]));
      break;
    case RegularizerKind::RowL1:
      for (Index i : indices) out[i] = soft_threshold(b[i], scale * w[i / cols_]);
      break;
    case RegularizerKind::GroupL2:
      for (Index i : indices) {
        const Index j = partition_->group_of(i);
        const auto& members = partition_->group(j);
        if (members.front() != i) continue;
        double sq = 0.0;
        for (Index k : members) sq += b[k] * b[k];
        const double norm = std::sqrt(sq);
        const double factor = norm > 0.0 ? std::max(1.0 - scale * w[j] / norm, 0.0) : 0.0;
        for (Index k : members) out[k] = factor * b[k];
      }
      break;
  }
}

bool Regularizer::respects(const BlockStructure& blocks) const {
  if (blocks.dim() != n_) return false;
  if (kind_ != RegularizerKind::GroupL2) return true;
  for (Index j = 0; j < partition_->count(); ++j) {
    const auto& members = partition_->group(j);
    const Index owner = blocks.block_of(members.front());
    for (Index k : members) {
      if (blocks.block_of(k) != owner) return false;
    }
  }
  return true;
}

}  // namespace pire
