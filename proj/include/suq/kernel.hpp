#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "suq/dataset.hpp"
#include "suq/error.hpp"

namespace suq {

/// Bandwidth selection. A fixed `sigma` wins when positive; otherwise sigma is
/// `scale` times the longest edge of a Euclidean minimum spanning tree.
struct SimilarityConfig {
  double sigma = 0.0;
  double scale = 1.0;
  bool recompute_per_sample = false;

  bool uses_mst() const { return !(sigma > 0.0); }
};

template <typename Scalar>
struct LaplacianBundle {
  Matrix<Scalar> K;
  Vector<Scalar> degrees;
  Matrix<Scalar> L;

  Eigen::Index size() const { return K.rows(); }
};

namespace detail {

template <typename Scalar>
void check_sigma(Scalar sigma) {
  if (!(sigma > Scalar(0)) || !std::isfinite(static_cast<double>(sigma))) {
    throw Error(ErrorKind::InvalidInput, "kernel bandwidth sigma must be positive and finite");
  }
}

}  // namespace detail

/// k(x, y) = exp(-|x - y|^2 / (2 sigma^2)).
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar gaussian_similarity(const Eigen::MatrixBase<DerivedX>& x,
                                              const Eigen::MatrixBase<DerivedY>& y,
                                              typename DerivedX::Scalar sigma) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) {
    throw Error(ErrorKind::InvalidInput, "gaussian_similarity: dimension mismatch");
  }
  detail::check_sigma(sigma);
  const Scalar sq = (x - y).squaredNorm();
  return std::exp(-sq / (Scalar(2) * sigma * sigma));
}

/// Rectangular kernel block [k(a_i, b_j)] between the rows of two point matrices.
template <typename Scalar>
Matrix<Scalar> cross_similarity(const Matrix<Scalar>& rows, const Matrix<Scalar>& cols, Scalar sigma) {
  if (rows.cols() != cols.cols()) {
    throw Error(ErrorKind::InvalidInput, "cross_similarity: dimension mismatch");
  }
  detail::check_sigma(sigma);
  const Scalar inv = Scalar(1) / (Scalar(2) * sigma * sigma);
  Matrix<Scalar> M(rows.rows(), cols.rows());
  for (Eigen::Index j = 0; j < cols.rows(); ++j) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      M(i, j) = std::exp(-(rows.row(i) - cols.row(j)).squaredNorm() * inv);
    }
  }
  return M;
}

/// Similarity matrix K_X. Only the upper triangle is evaluated, so K is
/// exactly symmetric.
template <typename Scalar>
Matrix<Scalar> similarity_matrix(const DataSet<Scalar>& X, Scalar sigma) {
  detail::check_sigma(sigma);
  const Eigen::Index n = X.size();
  const Scalar inv = Scalar(1) / (Scalar(2) * sigma * sigma);
  Matrix<Scalar> K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) = Scalar(1);
    for (Eigen::Index i = 0; i < j; ++i) {
      const Scalar k = std::exp(-(X.points.row(i) - X.points.row(j)).squaredNorm() * inv);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

/// Longest edge of the Euclidean minimum spanning tree, via dense Prim.
template <typename Scalar>
Scalar mst_max_edge(const DataSet<Scalar>& X) {
  const Eigen::Index n = X.size();
  if (n < 2) {
    throw Error(ErrorKind::DegenerateData, "minimum spanning tree needs at least two points");
  }
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> best(static_cast<std::size_t>(n), inf);
  std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
  best[0] = Scalar(0);
  Scalar longest = Scalar(0);
  for (Eigen::Index step = 0; step < n; ++step) {
    Eigen::Index u = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!in_tree[i] && (u < 0 || best[i] < best[u])) u = i;
    }
    in_tree[u] = true;
    longest = std::max(longest, best[u]);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_tree[i]) continue;
      const Scalar d = (X.points.row(u) - X.points.row(i)).squaredNorm();
      if (d < best[i]) best[i] = d;
    }
  }
  return std::sqrt(longest);
}

template <typename Scalar>
Scalar mst_sigma(const DataSet<Scalar>& X, Scalar scale = Scalar(1)) {
  if (!(scale > Scalar(0))) {
    throw Error(ErrorKind::InvalidInput, "mst_sigma: scale must be positive");
  }
  const Scalar edge = mst_max_edge(X);
  if (!(edge > Scalar(0))) {
    throw Error(ErrorKind::DegenerateData, "mst_sigma: all points coincide, sigma would be zero");
  }
  return scale * edge;
}

template <typename Scalar>
Scalar resolve_sigma(const SimilarityConfig& cfg, const DataSet<Scalar>& X) {
  if (!cfg.uses_mst()) return static_cast<Scalar>(cfg.sigma);
  return mst_sigma(X, static_cast<Scalar>(cfg.scale));
}

/// Symmetric normalized graph Laplacian L = I - D^{-1/2} K D^{-1/2}.
template <typename Scalar>
LaplacianBundle<Scalar> laplacian(Matrix<Scalar> K) {
  if (K.rows() != K.cols() || K.rows() < 1) {
    throw Error(ErrorKind::InvalidInput, "laplacian: similarity matrix must be square and nonempty");
  }
  LaplacianBundle<Scalar> b;
  b.degrees = K.rowwise().sum();
  if (!(b.degrees.array() > Scalar(0)).all()) {
    throw Error(ErrorKind::InvalidSimilarity, "laplacian: similarity matrix has a nonpositive row sum");
  }
  const Vector<Scalar> inv_sqrt = b.degrees.array().rsqrt().matrix();
  const Eigen::Index n = K.rows();
  b.L = -(inv_sqrt.asDiagonal() * K * inv_sqrt.asDiagonal());
  b.L.diagonal().array() += Scalar(1);
  // Symmetrize away the rounding asymmetry of the two diagonal scalings.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const Scalar m = (b.L(i, j) + b.L(j, i)) / Scalar(2);
      b.L(i, j) = m;
      b.L(j, i) = m;
    }
  }
  b.K = std::move(K);
  return b;
}

template <typename Scalar>
LaplacianBundle<Scalar> laplacian(const DataSet<Scalar>& X, Scalar sigma) {
  return laplacian<Scalar>(similarity_matrix(X, sigma));
}

}  // namespace suq
