#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "suq/dataset.hpp"
#include "suq/error.hpp"
#include "suq/kernel.hpp"
#include "suq/odf.hpp"

namespace suq {

/// Gap below which the second and third eigenvalues count as coincident.
inline constexpr double kDegenerateGap = 1e-10;

/// Distance of lambda from 1 below which the eigenfunction representation is refused.
inline constexpr double kEigenvalueOneTolerance = 1e-8;

/// How the eigenvector is continued to points outside the source set.
enum class ExtensionMode {
  /// Integrates against the degree-normalized similarity h(x,y) = k(x,y)/sqrt(d(x)d(y));
  /// reproduces the eigenvector exactly on the source points.
  Normalized,
  /// Uses the raw kernel k(x,y); kept for comparison only.
  Raw,
};

template <typename Scalar>
struct FiedlerPair {
  Scalar lambda{};
  Vector<Scalar> v;
  /// lambda_3 - lambda_2, +inf when n == 2.
  Scalar gap{};
  bool degenerate_gap = false;
  /// Smallest and largest eigenvalue of L, kept for diagnostics.
  Scalar spectrum_min{};
  Scalar spectrum_max{};
};

/// Second-smallest eigenpair of L from a full dense symmetric eigendecomposition.
/// The eigenvector sign is whatever the solver returns; see gauge_sign.
template <typename Scalar>
FiedlerPair<Scalar> fiedler_pair(const LaplacianBundle<Scalar>& bundle) {
  const Eigen::Index n = bundle.size();
  if (n < 2) {
    throw Error(ErrorKind::InvalidInput, "fiedler_pair: need at least two points");
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(bundle.L);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::Numeric, "fiedler_pair: symmetric eigensolver did not converge");
  }
  const auto& values = solver.eigenvalues();
  FiedlerPair<Scalar> pair;
  pair.lambda = values[1];
  pair.v = solver.eigenvectors().col(1).normalized();
  pair.gap = n > 2 ? values[2] - values[1] : std::numeric_limits<Scalar>::infinity();
  pair.degenerate_gap = pair.gap < static_cast<Scalar>(kDegenerateGap);
  pair.spectrum_min = values[0];
  pair.spectrum_max = values[n - 1];
  if (!pair.v.allFinite() || !std::isfinite(static_cast<double>(pair.lambda))) {
    throw Error(ErrorKind::Numeric, "fiedler_pair: non-finite eigenpair");
  }
  return pair;
}

/// ||L v - lambda v||_2
template <typename Scalar>
Scalar eigen_residual(const LaplacianBundle<Scalar>& bundle, const FiedlerPair<Scalar>& pair) {
  return (bundle.L * pair.v - pair.lambda * pair.v).norm();
}

struct BiPartition {
  std::vector<Eigen::Index> cluster;
  std::vector<Eigen::Index> complement;
};

/// Points with a nonnegative level form the cluster; ties at 0 go to the cluster.
template <typename Derived>
Membership membership_of(const Eigen::MatrixBase<Derived>& levels) {
  return (levels.array() >= typename Derived::Scalar(0));
}

template <typename Derived>
BiPartition bi_cluster(const Eigen::MatrixBase<Derived>& levels) {
  BiPartition p;
  for (Eigen::Index i = 0; i < levels.size(); ++i) {
    (levels[i] >= typename Derived::Scalar(0) ? p.cluster : p.complement).push_back(i);
  }
  return p;
}

/// Closure data for evaluating the continued eigenfunction of a source set at
/// arbitrary points.
template <typename Scalar>
struct ExtendedEigenfunction {
  DataSet<Scalar> source;
  Vector<Scalar> v;
  Scalar lambda{};
  /// d(y) = (1/|source|) sum_z k(y, z) for every source point y.
  Vector<Scalar> source_degrees;
  Scalar sigma{};
  ExtensionMode mode = ExtensionMode::Normalized;
};

template <typename Scalar>
ExtendedEigenfunction<Scalar> make_eigenfunction(DataSet<Scalar> source, const LaplacianBundle<Scalar>& bundle,
                                                 const FiedlerPair<Scalar>& pair, Scalar sigma,
                                                 ExtensionMode mode = ExtensionMode::Normalized) {
  if (bundle.size() != source.size() || pair.v.size() != source.size()) {
    throw Error(ErrorKind::InvalidInput, "make_eigenfunction: size mismatch between source, bundle and eigenvector");
  }
  ExtendedEigenfunction<Scalar> ef;
  ef.source_degrees = bundle.degrees / static_cast<Scalar>(source.size());
  ef.source = std::move(source);
  ef.v = pair.v;
  ef.lambda = pair.lambda;
  ef.sigma = sigma;
  ef.mode = mode;
  return ef;
}

/// Evaluates the continued eigenfunction at every row of `targets`:
///   f(x) = 1/(1-lambda) * 1/|S| * sum_{y in S} h_S(x, y) v_y
/// with S the source set (or the raw kernel in place of h_S in Raw mode).
template <typename Scalar>
Vector<Scalar> extend(const ExtendedEigenfunction<Scalar>& ef, const DataSet<Scalar>& targets) {
  if (targets.dimension() != ef.source.dimension()) {
    throw Error(ErrorKind::InvalidInput, "extend: target dimension differs from source dimension");
  }
  if (std::abs(Scalar(1) - ef.lambda) <= static_cast<Scalar>(kEigenvalueOneTolerance)) {
    throw Error(ErrorKind::EigenvalueOne, "extend: eigenvalue 1 has no eigenfunction representation");
  }
  const auto m = static_cast<Scalar>(ef.source.size());
  const Scalar scale = Scalar(1) / ((Scalar(1) - ef.lambda) * m);
  const Matrix<Scalar> M = cross_similarity(targets.points, ef.source.points, ef.sigma);
  if (ef.mode == ExtensionMode::Raw) {
    return scale * (M * ef.v);
  }
  const Vector<Scalar> target_degrees = M.rowwise().sum() / m;
  const Vector<Scalar> weighted = ef.v.cwiseQuotient(ef.source_degrees.cwiseSqrt());
  return scale * (M * weighted).cwiseQuotient(target_degrees.cwiseSqrt());
}

/// Sign anchor for eigenvector continuations on the reference set.
template <typename Scalar>
struct GaugeContext {
  Vector<Scalar> reference_levels;
  /// Warn when |cos angle| between levels and reference drops below this.
  Scalar tolerance = Scalar(1e-2);

  GaugeContext() = default;
  GaugeContext(Vector<Scalar> reference, Scalar tol) : reference_levels(std::move(reference)), tolerance(tol) {
    if (!(reference_levels.norm() > Scalar(0))) {
      throw Error(ErrorKind::InvalidInput, "GaugeContext: reference levels have zero norm");
    }
    if (!(tolerance >= Scalar(0))) {
      throw Error(ErrorKind::InvalidInput, "GaugeContext: tolerance must be nonnegative");
    }
  }
};

struct GaugeResult {
  int sign = 1;
  bool warned = false;
};

template <typename Scalar>
GaugeResult gauge_sign(const Vector<Scalar>& levels, const GaugeContext<Scalar>& ctx) {
  if (levels.size() != ctx.reference_levels.size()) {
    throw Error(ErrorKind::InvalidInput, "gauge_sign: length mismatch");
  }
  const Scalar norms = levels.norm() * ctx.reference_levels.norm();
  if (!(norms > Scalar(0))) {
    throw Error(ErrorKind::InvalidInput, "gauge_sign: zero-norm level vector");
  }
  const Scalar inner = levels.dot(ctx.reference_levels);
  return {inner >= Scalar(0) ? 1 : -1, std::abs(inner) / norms < ctx.tolerance};
}

/// One gauged realization of the reference clustering under a sample set.
template <typename Scalar>
struct ClusterSample {
  Membership membership;
  Vector<Scalar> levels;
  Vector<Scalar> odf;
  Eigen::Index sample_cardinality = 0;
  bool warned = false;
  bool degenerate_gap = false;
  Scalar lambda{};
  Scalar eigen_residual{};
  Scalar spectrum_min{};
  Scalar spectrum_max{};
};

/// Clusters `sample`, continues its Fiedler vector onto the reference points,
/// fixes the sign against the gauge anchor and thresholds at 0.
template <typename Scalar>
ClusterSample<Scalar> cluster_reference_under_sample(const DataSet<Scalar>& X, const DataSet<Scalar>& sample,
                                                     Scalar sigma, const GaugeContext<Scalar>& ctx,
                                                     ExtensionMode mode = ExtensionMode::Normalized) {
  if (sample.size() < 2) {
    throw Error(ErrorKind::InvalidInput, "cluster_reference_under_sample: sample needs at least two points");
  }
  const LaplacianBundle<Scalar> bundle = laplacian(sample, sigma);
  const FiedlerPair<Scalar> pair = fiedler_pair(bundle);
  const auto ef = make_eigenfunction(sample, bundle, pair, sigma, mode);

  ClusterSample<Scalar> s;
  s.levels = extend(ef, X);
  const GaugeResult g = gauge_sign(s.levels, ctx);
  if (g.sign < 0) s.levels = -s.levels;
  s.warned = g.warned;
  s.membership = membership_of(s.levels);
  s.sample_cardinality = s.membership.count();
  s.odf = odf_values(s.membership, X);
  s.degenerate_gap = pair.degenerate_gap;
  s.lambda = pair.lambda;
  s.eigen_residual = eigen_residual(bundle, pair);
  s.spectrum_min = pair.spectrum_min;
  s.spectrum_max = pair.spectrum_max;
  return s;
}

/// Algorithm-one clustering of the reference set plus its gauge anchor.
template <typename Scalar>
struct ReferenceClustering {
  Scalar sigma{};
  FiedlerPair<Scalar> pair;
  Membership membership;
  GaugeContext<Scalar> gauge;
  Scalar eigen_residual{};
};

template <typename Scalar>
ReferenceClustering<Scalar> cluster_reference(const DataSet<Scalar>& X, Scalar sigma, Scalar gauge_tolerance) {
  const LaplacianBundle<Scalar> bundle = laplacian(X, sigma);
  ReferenceClustering<Scalar> ref;
  ref.sigma = sigma;
  ref.pair = fiedler_pair(bundle);
  ref.membership = membership_of(ref.pair.v);
  ref.gauge = GaugeContext<Scalar>(ref.pair.v, gauge_tolerance);
  ref.eigen_residual = eigen_residual(bundle, ref.pair);
  return ref;
}

}  // namespace suq
