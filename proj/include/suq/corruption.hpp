#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "suq/dataset.hpp"
#include "suq/random.hpp"

namespace suq {

struct CorruptionConfig {
  /// Per-cluster deleted fraction is drawn uniformly from [deletion_lo, deletion_hi].
  double deletion_lo = 0.0;
  double deletion_hi = 0.0;
  /// Standard deviation of the additive N(0, noise_std^2 I) noise on survivors.
  double noise_std = 0.0;
  /// Replace deleted points by fresh draws.
  bool regenerate = true;
  /// Extra points added on top of regeneration.
  std::size_t additional_points = 0;
  std::uint64_t master_seed = 0;

  void validate() const;
};

/// Draws one point of the given cluster label from the data-generating law.
using PointSampler = std::function<Eigen::VectorXd(int label, Rng& rng)>;

struct GeneratorSource {
  PointSampler draw;
};

/// Uniform resample of the reference set, perturbed with the same noise level.
struct BootstrapSource {};

using RegenerationSource = std::variant<GeneratorSource, BootstrapSource>;

struct ClusterDeletion {
  int label = 0;
  std::size_t size = 0;
  std::size_t deleted = 0;
};

struct CorruptedSample {
  DataSetd data;
  /// Row i of `data` came from reference point origin[i], or is new when empty.
  std::vector<std::optional<Eigen::Index>> origin;
  std::vector<ClusterDeletion> deletions;
  std::size_t survivors = 0;
};

/// Number of points deleted from a cluster: fraction * size rounded half away from zero.
std::size_t deletion_count(double fraction, std::size_t cluster_size);

/// Builds one corrupted sample pi = pi_1 u pi_2 of X.
///
/// Random draws come from sample_stream(cfg.master_seed, sample_index) in this
/// order: per cluster (ascending label) the deleted fraction and the deleted
/// indices; then regenerated points per cluster, then additional points; then
/// the survivor noise in ascending point index. Output rows are survivors in
/// reference order, then regenerated points, then additional points.
CorruptedSample corrupt(const DataSetd& X, const CorruptionConfig& cfg, const RegenerationSource& src,
                        std::uint64_t sample_index);

}  // namespace suq
