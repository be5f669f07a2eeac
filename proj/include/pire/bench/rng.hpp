#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cstdint>
#include <vector>

#include "pire/types.hpp"

namespace pire::bench {

// Recorded in report metadata.
inline constexpr const char* kGeneratorDescription =
    "boost::random::mt19937_64 with boost::random::normal_distribution; "
    "substream seed = splitmix64(splitmix64(seed) ^ tag)";

enum class Stream : std::uint64_t {
  Design = 1,
  Signal = 2,
  Support = 3,
  Noise = 4,
  TestDesign = 5,
  TestNoise = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed of the substream `tag` of a trial seed. Distinct tags give
// statistically independent generators.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag);

// Tag of stream `s` for object number `index` (e.g. the task of a
// multi-task instance).
std::uint64_t stream_tag(Stream s, std::uint64_t index = 0);

/// Portable seeded generator: the boost engine and distributions produce the
/// same sequence on every platform and standard library.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t tag);

  double normal();
  Matrix normal_matrix(Index rows, Index cols);
  // k distinct indices drawn uniformly from {0..n-1}, in draw order.
  std::vector<Index> sample_without_replacement(Index n, Index k);

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace pire::bench
