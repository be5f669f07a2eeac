#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pire/blocks.hpp"
#include "pire/types.hpp"

namespace pire {

/// Disjoint groups covering {0..n-1}; zero-based indices.
class GroupPartition {
 public:
  GroupPartition(Index n, std::vector<std::vector<Index>> groups);

  Index dim() const { return n_; }
  Index count() const { return static_cast<Index>(groups_.size()); }
  const std::vector<Index>& group(Index j) const { return groups_[static_cast<std::size_t>(j)]; }
  Index group_of(Index i) const { return owner_[static_cast<std::size_t>(i)]; }

 private:
  Index n_;
  std::vector<std::vector<Index>> groups_;
  std::vector<Index> owner_;
};

enum class RegularizerKind { AbsoluteValue, Square, GroupL2, RowL1 };

/// Structure map g: R^n -> R^d_+ with a closed-form weighted proximal map
///
///   prox(w, lambda, mu, b) = argmin_x lambda <w, g(x)> + mu/2 ||x - b||^2.
///
/// RowL1 acts on a rows x cols matrix flattened row-major; component j of
/// g is the l1 norm of row j.
class Regularizer {
 public:
  static Regularizer absolute(Index n);
  static Regularizer square(Index n);
  static Regularizer group_l2(GroupPartition partition);
  static Regularizer row_l1(Index rows, Index cols);

  RegularizerKind kind() const { return kind_; }
  Index input_dim() const { return n_; }
  Index output_dim() const;
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const GroupPartition* partition() const { return partition_.get(); }

  Vector value(const VectorRef& x) const;

  Vector prox(const VectorRef& w, double lambda, double mu, const VectorRef& b) const;

  // Prox restricted to the coordinates `indices`: reads b[i] and writes
  // out[i] for i in indices only. w is the full d-vector. Every group that
  // touches `indices` must lie entirely inside it (see respects()).
  void prox_indices(const VectorRef& w, double lambda, double mu, const VectorRef& b,
                    Eigen::Ref<Vector> out, std::span<const Index> indices) const;

  // The g-component fed by variable i.
  Index component_of(Index i) const;

  // Whether every group is contained in a single block.
  bool respects(const BlockStructure& blocks) const;

 private:
  Regularizer(RegularizerKind kind, Index n);
  void check_prox_args(const VectorRef& w, double lambda, double mu) const;

  RegularizerKind kind_;
  Index n_;
  Index rows_ = 0;
  Index cols_ = 0;
  std::shared_ptr<const GroupPartition> partition_;
};

}  // namespace pire
