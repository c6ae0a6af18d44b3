#pragma once

#include <cstdint>
#include <random>

namespace suq {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the stream for (master_seed, stream_index). Counter based, so any
/// worker can open any stream without coordination.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index);

/// Independent, reproducible random stream for one Monte Carlo sample.
Rng sample_stream(std::uint64_t master_seed, std::uint64_t sample_index);

double standard_normal(Rng& rng);
double normal(Rng& rng, double mean, double stddev);
/// Uniform on [lo, hi); returns lo when lo == hi.
double uniform(Rng& rng, double lo, double hi);
/// Uniform integer on [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace suq
