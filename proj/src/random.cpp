#include "suq/random.hpp"

namespace suq {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
  return mix64(mix64(master_seed) ^ mix64(stream_index + 0x632be59bd9b4e019ULL));
}

Rng sample_stream(std::uint64_t master_seed, std::uint64_t sample_index) {
  return Rng(stream_seed(master_seed, sample_index));
}

// Distributions are constructed per draw so that no cached state carries over
// between draws; the consumption order is then exactly the call order.
double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double normal(Rng& rng, double mean, double stddev) { return mean + stddev * standard_normal(rng); }

double uniform(Rng& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace suq
