#include "latentacc/random.hpp"

namespace latentacc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(seed) {}

RandomStream RandomStream::derive(std::uint64_t master, std::uint64_t index) {
  return RandomStream(splitmix64(splitmix64(master) ^ splitmix64(~index)));
}

double RandomStream::uniform() {
  // 53 random mantissa bits in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

bool RandomStream::bernoulli(double p) { return uniform() < p; }

int RandomStream::binomial(int trials, double p) {
  std::binomial_distribution<int> dist(trials, p);
  return dist(engine_);
}

double RandomStream::normal(double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  return dist(engine_);
}

std::size_t RandomStream::index_below(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace latentacc
