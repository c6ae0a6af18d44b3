#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "suq/kernel.hpp"

using namespace suq;

namespace {
DataSetd line(std::initializer_list<double> xs) {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) p(i++, 0) = x;
  return DataSetd(p);
}
}  // namespace

TEST_CASE("gaussian similarity") {
  Eigen::Vector2d x(0.3, -1.2);
  CHECK(gaussian_similarity(x, x, 0.7) == 1.0);
  Eigen::Vector2d a(0.0, 0.0), b(1.0, 1.0);
  CHECK(gaussian_similarity(a, b, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int k = 0; k < 100; ++k) {
    Eigen::Vector3d u(g(rng), g(rng), g(rng)), v(g(rng), g(rng), g(rng));
    const double s = std::abs(g(rng)) + 0.1;
    CHECK(gaussian_similarity(u, v, s) == gaussian_similarity(v, u, s));
    CHECK(gaussian_similarity(u, v, s) > 0.0);
  }

  const Eigen::VectorXd a2 = Eigen::VectorXd::Zero(2), c3 = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(gaussian_similarity(a2, c3, 1.0), Error);
  CHECK_THROWS_AS(gaussian_similarity(a, b, 0.0), Error);
}

TEST_CASE("mst_sigma on small sets") {
  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 3, 0;
  CHECK(mst_sigma(DataSetd(two), 1.0) == doctest::Approx(3.0));
  CHECK(mst_sigma(line({0, 1, 5}), 1.0) == doctest::Approx(4.0));
  CHECK(mst_sigma(line({0, 1, 5}), 0.5) == doctest::Approx(2.0));

  Eigen::MatrixXd same = Eigen::MatrixXd::Zero(2, 2);
  try {
    mst_sigma(DataSetd(same), 1.0);
    FAIL("expected degenerate-data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateData);
  }
  CHECK_THROWS_AS(mst_sigma(line({1.0}), 1.0), Error);
}

TEST_CASE("mst_sigma agrees with exhaustive Kruskal") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 7;
    const int d = 1 + trial % 3;
    const Eigen::MatrixXd p = oracle::random_points(n, d, rng);
    CHECK(mst_sigma(DataSetd(p), 1.0) == doctest::Approx(oracle::kruskal_max_edge(p)).epsilon(1e-12));
  }
}

TEST_CASE("similarity matrix") {
  CHECK(similarity_matrix(line({2.0}), 1.0) == Eigen::MatrixXd::Ones(1, 1));

  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 1, 1;
  const auto K = similarity_matrix(DataSetd(two), 1.0);
  CHECK(K(0, 0) == 1.0);
  CHECK(K(1, 1) == 1.0);
  CHECK(K(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(K(1, 0) == K(0, 1));

  std::mt19937_64 rng(3);
  const DataSetd X(oracle::random_points(40, 3, rng));
  const auto K2 = similarity_matrix(X, 0.8);
  CHECK((K2 - K2.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((K2.array() > 0.0).all());
  CHECK(K2.diagonal().isOnes());
}

TEST_CASE("laplacian closed forms") {
  Eigen::MatrixXd K = Eigen::MatrixXd::Ones(2, 2);
  const auto b = laplacian<double>(K);
  CHECK(b.degrees.isApprox(Eigen::Vector2d(2, 2)));
  Eigen::Matrix2d L;
  L << 0.5, -0.5, -0.5, 0.5;
  CHECK((b.L - L).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.L);
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.0));
  CHECK(es.eigenvalues()[1] == doctest::Approx(1.0));

  for (double a : {0.1, 0.5, 0.9}) {
    Eigen::MatrixXd Ka(2, 2);
    Ka << 1, a, a, 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(laplacian<double>(Ka).L);
    CHECK(std::abs(ea.eigenvalues()[0]) < 1e-15);
    CHECK(ea.eigenvalues()[1] == doctest::Approx(2 * a / (1 + a)).epsilon(1e-14));
  }

  const auto one = laplacian<double>(Eigen::MatrixXd::Ones(1, 1));
  CHECK(one.L(0, 0) == 0.0);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, -2, -2, 1;
  try {
    laplacian<double>(bad);
    FAIL("expected invalid-similarity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidSimilarity);
  }
}

TEST_CASE("laplacian spectrum and null vector on random sets") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 5 + trial * 3;
    const DataSetd X(oracle::random_points(n, 1 + trial % 4, rng));
    const double sigma = mst_sigma(X);
    const auto b = laplacian(X, sigma);
    CHECK((b.L - b.L.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.L);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    CHECK(es.eigenvalues().maxCoeff() <= 2 + 1e-8);
    const Eigen::VectorXd null = b.degrees.cwiseSqrt();
    CHECK((b.L * null).norm() <= 1e-8 * null.norm());
  }
}

TEST_CASE("kernel templates work in single precision") {
  Eigen::MatrixXf p(3, 1);
  p << 0.f, 1.f, 5.f;
  const DataSet<float> X(p);
  CHECK(mst_sigma(X) == doctest::Approx(4.0f));
  const auto b = laplacian(X, 1.0f);
  CHECK(b.L.rows() == 3);
}
