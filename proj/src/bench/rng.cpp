#include "pire/bench/rng.hpp"

#include <boost/random/uniform_int_distribution.hpp>
#include <numeric>

#include "pire/errors.hpp"

namespace pire::bench {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(splitmix64(seed) ^ tag);
}

std::uint64_t stream_tag(Stream s, std::uint64_t index) {
  return (static_cast<std::uint64_t>(s) << 32) | index;
}

Rng::Rng(std::uint64_t seed, std::uint64_t tag) : engine_(substream_seed(seed, tag)) {}

double Rng::normal() { return normal_(engine_); }

Matrix Rng::normal_matrix(Index rows, Index cols) {
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) M(i, j) = normal();
  }
  return M;
}

std::vector<Index> Rng::sample_without_replacement(Index n, Index k) {
  if (k < 0 || k > n) throw ParameterError("cannot draw " + std::to_string(k) + " of " + std::to_string(n));
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    boost::random::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(engine_))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace pire::bench
