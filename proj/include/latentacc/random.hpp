#pragma once

#include <cstdint>
#include <random>

namespace latentacc {

/// A seeded pseudo-random stream. Parallel callers each own one; stream r of
/// a run is derived from (master seed, r) so results do not depend on how
/// replications are scheduled.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Fixed splitting function: stream `index` of master seed `master`.
  static RandomStream derive(std::uint64_t master, std::uint64_t index);

  double uniform();
  bool bernoulli(double p);
  int binomial(int trials, double p);
  double normal(double mean, double sd);
  std::uint64_t next_u64() { return engine_(); }
  std::size_t index_below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace latentacc
