#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "suq/dataset.hpp"
#include "suq/error.hpp"
#include "suq/spectral.hpp"

namespace suq {

using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Running Monte Carlo sums over gauged cluster samples of a reference set.
/// Integer fields are order independent; floating sums depend on the order in
/// which samples and partial accumulators are combined.
template <typename Scalar>
struct Accumulator {
  std::int64_t M = 0;
  CountVector coverage_counts;
  Vector<Scalar> level_sums;
  Vector<Scalar> unit_level_sums;
  /// ODF sums over finite contributions; infinite ones are counted by sign.
  Vector<Scalar> odf_sums;
  CountVector odf_pos_inf;
  CountVector odf_neg_inf;
  std::int64_t symdiff_sum = 0;
  std::int64_t cardinality_sum = 0;
  std::int64_t warn_count = 0;
  std::int64_t gap_warn_count = 0;
  Scalar max_eigen_residual = Scalar(0);
  Scalar spectrum_min = std::numeric_limits<Scalar>::infinity();
  Scalar spectrum_max = -std::numeric_limits<Scalar>::infinity();

  Accumulator() = default;
  explicit Accumulator(Eigen::Index n)
      : coverage_counts(CountVector::Zero(n)),
        level_sums(Vector<Scalar>::Zero(n)),
        unit_level_sums(Vector<Scalar>::Zero(n)),
        odf_sums(Vector<Scalar>::Zero(n)),
        odf_pos_inf(CountVector::Zero(n)),
        odf_neg_inf(CountVector::Zero(n)) {}

  Eigen::Index size() const { return coverage_counts.size(); }

  /// Folds another accumulator into this one. Merge partials in a fixed order
  /// to keep floating sums reproducible.
  void merge(const Accumulator& other) {
    if (other.size() != size()) {
      throw Error(ErrorKind::InvalidInput, "Accumulator::merge: size mismatch");
    }
    M += other.M;
    coverage_counts += other.coverage_counts;
    level_sums += other.level_sums;
    unit_level_sums += other.unit_level_sums;
    odf_sums += other.odf_sums;
    odf_pos_inf += other.odf_pos_inf;
    odf_neg_inf += other.odf_neg_inf;
    symdiff_sum += other.symdiff_sum;
    cardinality_sum += other.cardinality_sum;
    warn_count += other.warn_count;
    gap_warn_count += other.gap_warn_count;
    max_eigen_residual = std::max(max_eigen_residual, other.max_eigen_residual);
    spectrum_min = std::min(spectrum_min, other.spectrum_min);
    spectrum_max = std::max(spectrum_max, other.spectrum_max);
  }
};

/// Adds one sample. The misclustering contribution is the Hamming distance
/// between the sample membership and the reference membership.
template <typename Scalar>
void accumulate(Accumulator<Scalar>& acc, const ClusterSample<Scalar>& s, const Membership& reference) {
  const Eigen::Index n = acc.size();
  if (s.membership.size() != n || s.levels.size() != n || s.odf.size() != n || reference.size() != n) {
    throw Error(ErrorKind::InvalidInput, "accumulate: sample length does not match accumulator");
  }
  ++acc.M;
  acc.coverage_counts += s.membership.template cast<std::int64_t>().matrix();
  acc.level_sums += s.levels;
  const Scalar norm = s.levels.norm();
  if (norm > Scalar(0)) acc.unit_level_sums += s.levels / norm;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar b = s.odf[i];
    if (std::isinf(b)) {
      ++(b > 0 ? acc.odf_pos_inf : acc.odf_neg_inf)[i];
    } else {
      acc.odf_sums[i] += b;
    }
  }
  acc.symdiff_sum += (s.membership != reference).count();
  acc.cardinality_sum += s.membership.count();
  acc.warn_count += s.warned ? 1 : 0;
  acc.gap_warn_count += s.degenerate_gap ? 1 : 0;
  acc.max_eigen_residual = std::max(acc.max_eigen_residual, s.eigen_residual);
  acc.spectrum_min = std::min(acc.spectrum_min, s.spectrum_min);
  acc.spectrum_max = std::max(acc.spectrum_max, s.spectrum_max);
}

namespace detail {
template <typename Scalar>
void require_samples(const Accumulator<Scalar>& acc) {
  if (acc.M < 1) throw Error(ErrorKind::NoSamples, "no Monte Carlo samples accumulated");
}
}  // namespace detail

/// Empirical coverage function: fraction of samples containing each point.
template <typename Scalar>
Vector<Scalar> coverage(const Accumulator<Scalar>& acc) {
  detail::require_samples(acc);
  return acc.coverage_counts.template cast<Scalar>() / static_cast<Scalar>(acc.M);
}

template <typename Scalar>
struct KovyazinResult {
  Membership set;
  Scalar t_star{};
  /// Target cardinality: nearest integer to gamma, ties rounded down.
  Eigen::Index target = 0;
  /// Set when {coverage > t*} alone already exceeds the target.
  bool overfull = false;
};

/// Empirical Vorob'ev expectation.
///
/// t* = inf{t in [0,1] : #{coverage >= t} <= gamma} is found exactly over the
/// distinct coverage values. The returned set holds every point with coverage
/// above t*, then points with coverage equal to t* in ascending index order
/// until the target cardinality is reached.
template <typename Scalar>
KovyazinResult<Scalar> kovyazin_mean(const Vector<Scalar>& cov, Scalar gamma) {
  const Eigen::Index n = cov.size();
  if (!(gamma >= Scalar(0)) || gamma > static_cast<Scalar>(n)) {
    throw Error(ErrorKind::InvalidInput, "kovyazin_mean: gamma must lie in [0, |X|]");
  }
  if (n > 0 && ((cov.array() < Scalar(0)).any() || (cov.array() > Scalar(1)).any())) {
    throw Error(ErrorKind::InvalidInput, "kovyazin_mean: coverage values must lie in [0, 1]");
  }
  std::vector<Scalar> levels(cov.data(), cov.data() + n);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  auto count_at_least = [&](Scalar t) { return static_cast<Scalar>((cov.array() >= t).count()); };

  KovyazinResult<Scalar> r;
  // #{cov >= t} is a left-continuous step function, constant on (u_j, u_{j+1}],
  // so the infimum is either 0 or one of the distinct values u_j.
  if (static_cast<Scalar>(n) <= gamma) {
    r.t_star = Scalar(0);
  } else {
    // Past the largest value the count is 0, so that value is the fallback.
    r.t_star = levels.back();
    for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
      if (count_at_least(levels[j + 1]) <= gamma) {
        r.t_star = levels[j];
        break;
      }
    }
  }

  r.target = static_cast<Eigen::Index>(std::ceil(static_cast<double>(gamma) - 0.5));
  r.set = (cov.array() > r.t_star);
  Eigen::Index size = r.set.count();
  r.overfull = size > r.target;
  for (Eigen::Index i = 0; i < n && size < r.target; ++i) {
    if (cov[i] == r.t_star) {
      r.set[i] = true;
      ++size;
    }
  }
  return r;
}

template <typename Scalar>
struct OdfExpectation {
  Membership set;
  Vector<Scalar> mean;
  /// Points whose mean is infinite or undefined.
  Eigen::Index infinite_points = 0;
};

/// Zero superlevel set of the mean ODF. A point with infinite contributions of
/// one sign gets that infinite mean; mixed signs leave the mean undefined (NaN)
/// and the point outside the set.
template <typename Scalar>
OdfExpectation<Scalar> odf_expectation(const Accumulator<Scalar>& acc) {
  detail::require_samples(acc);
  const Eigen::Index n = acc.size();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  OdfExpectation<Scalar> e;
  e.mean.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool pos = acc.odf_pos_inf[i] > 0;
    const bool neg = acc.odf_neg_inf[i] > 0;
    if (pos && neg) {
      e.mean[i] = std::numeric_limits<Scalar>::quiet_NaN();
    } else if (pos) {
      e.mean[i] = inf;
    } else if (neg) {
      e.mean[i] = -inf;
    } else {
      e.mean[i] = acc.odf_sums[i] / static_cast<Scalar>(acc.M);
    }
    if (pos || neg) ++e.infinite_points;
  }
  e.set = (e.mean.array() >= Scalar(0));
  return e;
}

template <typename Scalar>
Vector<Scalar> mean_levels(const Accumulator<Scalar>& acc) {
  detail::require_samples(acc);
  return acc.level_sums / static_cast<Scalar>(acc.M);
}

/// Zero superlevel set of the mean gauged level function.
template <typename Scalar>
Membership spectral_expectation(const Accumulator<Scalar>& acc) {
  return membership_of(mean_levels(acc));
}

template <typename Scalar>
struct ExpectationReport {
  Vector<Scalar> coverage;
  Scalar expected_misclustering_rate{};
  Membership vorobev_set;
  Membership odf_set;
  Membership spectral_set;
  Scalar t_star{};
  Scalar gamma{};
  Eigen::Index vorobev_target = 0;
  bool vorobev_overfull = false;
  Vector<Scalar> mean_levels;
  Vector<Scalar> mean_unit_levels;
  Vector<Scalar> mean_odf;
  Eigen::Index odf_infinite_points = 0;
  std::int64_t M = 0;
  std::int64_t warn_count = 0;
  std::int64_t gap_warn_count = 0;
  Scalar max_eigen_residual{};
  Scalar spectrum_min{};
  Scalar spectrum_max{};
};

template <typename Scalar>
ExpectationReport<Scalar> finalize(const Accumulator<Scalar>& acc, const Membership& reference) {
  detail::require_samples(acc);
  if (reference.size() != acc.size()) {
    throw Error(ErrorKind::InvalidInput, "finalize: reference membership length mismatch");
  }
  const auto M = static_cast<Scalar>(acc.M);
  ExpectationReport<Scalar> r;
  r.M = acc.M;
  r.coverage = coverage(acc);
  r.expected_misclustering_rate = static_cast<Scalar>(acc.symdiff_sum) / M;
  r.gamma = static_cast<Scalar>(acc.cardinality_sum) / M;
  const auto kov = kovyazin_mean(r.coverage, r.gamma);
  r.vorobev_set = kov.set;
  r.t_star = kov.t_star;
  r.vorobev_target = kov.target;
  r.vorobev_overfull = kov.overfull;
  auto odf = odf_expectation(acc);
  r.odf_set = std::move(odf.set);
  r.mean_odf = std::move(odf.mean);
  r.odf_infinite_points = odf.infinite_points;
  r.mean_levels = mean_levels(acc);
  r.mean_unit_levels = acc.unit_level_sums / M;
  r.spectral_set = membership_of(r.mean_levels);
  r.warn_count = acc.warn_count;
  r.gap_warn_count = acc.gap_warn_count;
  r.max_eigen_residual = acc.max_eigen_residual;
  r.spectrum_min = acc.spectrum_min;
  r.spectrum_max = acc.spectrum_max;
  return r;
}

}  // namespace suq
