#pragma once

#include <span>
#include <vector>

#include "pire/types.hpp"

namespace pire {

/// Partition of the variable indices {0..n-1} into S ordered blocks.
///
/// The usual partition is a run of contiguous ranges (a column split
/// A = [A_1, ..., A_S] of a least-squares design). Matrix variables stored
/// row-major also need strided blocks, e.g. one block per column of a d x m
/// multi-task coefficient matrix, so a block is an ordered index list.
class BlockStructure {
 public:
  // S near-equal contiguous ranges; block s = [s*n/S, (s+1)*n/S).
  static BlockStructure contiguous(Index n, Index count);
  // Explicit half-open ranges [begin, end), must tile {0..n-1} in order.
  static BlockStructure ranges(Index n, const std::vector<std::pair<Index, Index>>& bounds);
  // One block per column of a rows x cols matrix stored row-major.
  static BlockStructure matrix_columns(Index rows, Index cols);
  // Arbitrary disjoint index sets covering {0..n-1}.
  static BlockStructure from_indices(Index n, std::vector<std::vector<Index>> blocks);
  static BlockStructure single(Index n) { return contiguous(n, 1); }

  Index dim() const { return n_; }
  Index count() const { return static_cast<Index>(blocks_.size()); }
  std::span<const Index> block(Index s) const;
  Index block_of(Index i) const { return owner_[static_cast<std::size_t>(i)]; }

  // Entries of x belonging to block s, in block order.
  Vector gather(const VectorRef& x, Index s) const;

 private:
  BlockStructure(Index n, std::vector<std::vector<Index>> blocks);

  Index n_ = 0;
  std::vector<std::vector<Index>> blocks_;
  std::vector<Index> owner_;
};

}  // namespace pire
