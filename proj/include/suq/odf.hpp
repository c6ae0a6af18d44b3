#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "suq/dataset.hpp"
#include "suq/error.hpp"

namespace suq {

/// Oriented distance b_C(x) = d_{X\C}(x) - d_C(x) for every x in X, with
/// Euclidean point-to-set distances and d_{empty} = +inf. An empty complement
/// yields +inf everywhere, an empty cluster -inf everywhere.
template <typename Scalar>
Vector<Scalar> odf_values(const Membership& in_cluster, const DataSet<Scalar>& X) {
  const Eigen::Index n = X.size();
  if (in_cluster.size() != n) {
    throw Error(ErrorKind::InvalidInput, "odf_values: membership length does not match data set");
  }
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  Vector<Scalar> to_cluster = Vector<Scalar>::Constant(n, inf);
  Vector<Scalar> to_complement = Vector<Scalar>::Constant(n, inf);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (in_cluster[i]) {
      to_cluster[i] = Scalar(0);
    } else {
      to_complement[i] = Scalar(0);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (in_cluster[j] == in_cluster[i]) continue;
      const Scalar d = (X.points.row(i) - X.points.row(j)).squaredNorm();
      Scalar& slot = in_cluster[j] ? to_cluster[i] : to_complement[i];
      if (d < slot) slot = d;
    }
  }
  Vector<Scalar> b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar dc = std::sqrt(to_complement[i]);
    const Scalar da = std::sqrt(to_cluster[i]);
    if (std::isinf(dc)) {
      b[i] = inf;
    } else if (std::isinf(da)) {
      b[i] = -inf;
    } else {
      b[i] = dc - da;
    }
  }
  return b;
}

}  // namespace suq
