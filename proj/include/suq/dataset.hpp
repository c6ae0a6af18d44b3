#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "suq/error.hpp"

namespace suq {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Per-point cluster membership bits over a reference set.
using Membership = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// A finite point set. Row i of `points` is the point with stable index i.
/// `labels` is either empty or holds one cluster tag per point.
template <typename Scalar>
struct DataSet {
  Matrix<Scalar> points;
  std::vector<int> labels;

  DataSet() = default;
  explicit DataSet(Matrix<Scalar> pts, std::vector<int> lbls = {})
      : points(std::move(pts)), labels(std::move(lbls)) {
    validate();
  }

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dimension() const { return points.cols(); }
  bool labeled() const { return !labels.empty(); }

  void validate() const {
    if (points.rows() < 1 || points.cols() < 1) {
      throw Error(ErrorKind::InvalidInput, "data set needs at least one point of dimension >= 1");
    }
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != points.rows()) {
      throw Error(ErrorKind::InvalidInput, "label count does not match point count");
    }
    if (!points.allFinite()) {
      throw Error(ErrorKind::InvalidInput, "data set contains non-finite coordinates");
    }
  }
};

using DataSetd = DataSet<double>;

}  // namespace suq
