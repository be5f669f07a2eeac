#include "pire/blocks.hpp"

#include <string>

#include "pire/errors.hpp"

namespace pire {

BlockStructure::BlockStructure(Index n, std::vector<std::vector<Index>> blocks)
    : n_(n), blocks_(std::move(blocks)), owner_(static_cast<std::size_t>(n), -1) {
  if (n <= 0) throw ParameterError("block structure needs a positive dimension");
  if (blocks_.empty()) throw ParameterError("block structure needs at least one block");
  for (std::size_t s = 0; s < blocks_.size(); ++s) {
    if (blocks_[s].empty()) throw ParameterError("block " + std::to_string(s) + " is empty");
    for (Index i : blocks_[s]) {
      if (i < 0 || i >= n) {
        throw ParameterError("block index " + std::to_string(i) + " out of range");
      }
      auto& owner = owner_[static_cast<std::size_t>(i)];
      if (owner != -1) {
        throw ParameterError("index " + std::to_string(i) + " appears in more than one block");
      }
      owner = static_cast<Index>(s);
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (owner_[static_cast<std::size_t>(i)] == -1) {
      throw ParameterError("index " + std::to_string(i) + " is not covered by any block");
    }
  }
}

BlockStructure BlockStructure::contiguous(Index n, Index count) {
  if (count < 1 || count > n) {
    throw ParameterError("block count must be in [1, n], got " + std::to_string(count));
  }
  std::vector<std::pair<Index, Index>> bounds;
  for (Index s = 0; s < count; ++s) bounds.emplace_back(s * n / count, (s + 1) * n / count);
  return ranges(n, bounds);
}

BlockStructure BlockStructure::ranges(Index n,
                                      const std::vector<std::pair<Index, Index>>& bounds) {
  std::vector<std::vector<Index>> blocks;
  Index expected = 0;
  for (const auto& [begin, end] : bounds) {
    if (begin != expected || end <= begin) {
      throw ParameterError("block ranges must be ordered, nonempty and contiguous");
    }
    std::vector<Index> idx;
    for (Index i = begin; i < end; ++i) idx.push_back(i);
    blocks.push_back(std::move(idx));
    expected = end;
  }
  if (expected != n) throw ParameterError("block ranges do not cover the variable");
  return BlockStructure(n, std::move(blocks));
}

BlockStructure BlockStructure::matrix_columns(Index rows, Index cols) {
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(cols));
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) blocks[static_cast<std::size_t>(c)].push_back(r * cols + c);
  }
  return BlockStructure(rows * cols, std::move(blocks));
}

BlockStructure BlockStructure::from_indices(Index n, std::vector<std::vector<Index>> blocks) {
  return BlockStructure(n, std::move(blocks));
}

std::span<const Index> BlockStructure::block(Index s) const {
  if (s < 0 || s >= count()) {
    throw ParameterError("block index " + std::to_string(s) + " out of range");
  }
  return blocks_[static_cast<std::size_t>(s)];
}

Vector BlockStructure::gather(const VectorRef& x, Index s) const {
  if (x.size() != n_) throw DimensionError("gather: vector size does not match block structure");
  auto idx = block(s);
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = x[idx[k]];
  return out;
}

}  // namespace pire
