#include "suq/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace suq {

void CorruptionConfig::validate() const {
  if (!(deletion_lo >= 0.0) || !(deletion_lo <= deletion_hi) || !(deletion_hi <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "corruption: deletion range must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw Error(ErrorKind::InvalidConfig, "corruption: noise_std must be nonnegative and finite");
  }
}

std::size_t deletion_count(double fraction, std::size_t cluster_size) {
  const double c = std::round(fraction * static_cast<double>(cluster_size));
  return std::min(cluster_size, static_cast<std::size_t>(std::max(0.0, c)));
}

namespace {

Eigen::VectorXd draw_new_point(const DataSetd& X, const RegenerationSource& src, int label,
                               const std::vector<Eigen::Index>& pool, double noise_std, Rng& rng) {
  if (const auto* gen = std::get_if<GeneratorSource>(&src)) {
    Eigen::VectorXd p = gen->draw(label, rng);
    if (p.size() != X.dimension()) {
      throw Error(ErrorKind::InvalidConfig, "corruption: generator returned a point of the wrong dimension");
    }
    return p;
  }
  Eigen::VectorXd p = X.points.row(pool[uniform_index(rng, pool.size())]).transpose();
  if (noise_std > 0.0) {
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] += noise_std * standard_normal(rng);
  }
  return p;
}

}  // namespace

CorruptedSample corrupt(const DataSetd& X, const CorruptionConfig& cfg, const RegenerationSource& src,
                        std::uint64_t sample_index) {
  cfg.validate();
  const Eigen::Index n = X.size();
  const Eigen::Index d = X.dimension();
  const bool deleting = cfg.deletion_hi > 0.0;
  if (deleting && !X.labeled()) {
    throw Error(ErrorKind::InvalidConfig, "corruption: per-cluster deletion requires cluster labels");
  }
  if (std::holds_alternative<GeneratorSource>(src) && !X.labeled() && (deleting || cfg.additional_points > 0)) {
    throw Error(ErrorKind::InvalidConfig, "corruption: generator regeneration requires cluster labels");
  }

  Rng rng = sample_stream(cfg.master_seed, sample_index);
  CorruptedSample out;

  // Clusters in ascending label order, members in ascending index order.
  std::map<int, std::vector<Eigen::Index>> clusters;
  if (X.labeled()) {
    for (Eigen::Index i = 0; i < n; ++i) clusters[X.labels[i]].push_back(i);
  }
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});

  std::vector<bool> deleted(static_cast<std::size_t>(n), false);
  if (X.labeled()) {
    for (auto& [label, members] : clusters) {
      const double fraction = uniform(rng, cfg.deletion_lo, cfg.deletion_hi);
      const std::size_t count = deletion_count(fraction, members.size());
      // Partial Fisher-Yates on a copy keeps `members` sorted for bootstrap pools.
      std::vector<Eigen::Index> order = members;
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t j = k + uniform_index(rng, order.size() - k);
        std::swap(order[k], order[j]);
        deleted[order[k]] = true;
      }
      out.deletions.push_back({label, members.size(), count});
    }
  }

  std::vector<Eigen::Index> survivors;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!deleted[i]) survivors.push_back(i);
  }
  out.survivors = survivors.size();
  if (survivors.empty() && !cfg.regenerate) {
    throw Error(ErrorKind::EmptySample, "corruption: every point was deleted and regeneration is off");
  }

  std::vector<Eigen::VectorXd> fresh;
  std::vector<int> fresh_labels;
  if (cfg.regenerate) {
    for (const auto& del : out.deletions) {
      for (std::size_t k = 0; k < del.deleted; ++k) {
        fresh.push_back(draw_new_point(X, src, del.label, clusters[del.label], cfg.noise_std, rng));
        fresh_labels.push_back(del.label);
      }
    }
  }
  for (std::size_t k = 0; k < cfg.additional_points; ++k) {
    // The label of a uniformly chosen reference point picks the mixture component.
    const Eigen::Index anchor = all[uniform_index(rng, all.size())];
    const int label = X.labeled() ? X.labels[anchor] : 0;
    const auto& pool = X.labeled() ? clusters[label] : all;
    fresh.push_back(draw_new_point(X, src, label, pool, cfg.noise_std, rng));
    fresh_labels.push_back(label);
  }

  const Eigen::Index total = static_cast<Eigen::Index>(survivors.size() + fresh.size());
  if (total == 0) {
    throw Error(ErrorKind::EmptySample, "corruption: sample is empty");
  }
  Eigen::MatrixXd points(total, d);
  std::vector<int> labels;
  if (X.labeled()) labels.reserve(static_cast<std::size_t>(total));
  out.origin.reserve(static_cast<std::size_t>(total));

  Eigen::Index row = 0;
  for (const Eigen::Index i : survivors) {
    points.row(row) = X.points.row(i);
    if (X.labeled()) labels.push_back(X.labels[i]);
    out.origin.emplace_back(i);
    ++row;
  }
  for (std::size_t k = 0; k < fresh.size(); ++k, ++row) {
    points.row(row) = fresh[k].transpose();
    if (X.labeled()) labels.push_back(fresh_labels[k]);
    out.origin.emplace_back(std::nullopt);
  }
  if (cfg.noise_std > 0.0) {
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(survivors.size()); ++r) {
      for (Eigen::Index k = 0; k < d; ++k) points(r, k) += cfg.noise_std * standard_normal(rng);
    }
  }
  out.data = DataSetd(std::move(points), std::move(labels));
  return out;
}

}  // namespace suq
