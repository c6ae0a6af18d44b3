#pragma once

// Test-only reference computations, written independently of the library code
// paths they check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

/// Longest edge of a minimum spanning tree by exhaustive Kruskal on the complete graph.
inline double kruskal_max_edge(const Eigen::MatrixXd& pts) {
  const auto n = static_cast<int>(pts.rows());
  struct Edge {
    double w;
    int a, b;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.push_back({(pts.row(i) - pts.row(j)).norm(), i, j});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  double longest = 0.0;
  int joined = 0;
  for (const auto& e : edges) {
    const int ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    longest = std::max(longest, e.w);
    if (++joined == n - 1) break;
  }
  return longest;
}

/// Mean symmetric difference between a candidate set (bitmask) and samples (bitmasks).
inline double mean_symdiff(std::uint32_t candidate, const std::vector<std::uint32_t>& samples) {
  double total = 0.0;
  for (const auto s : samples) total += static_cast<double>(__builtin_popcount(candidate ^ s));
  return total / static_cast<double>(samples.size());
}

/// Smallest mean symmetric difference over all subsets of a given cardinality.
inline double best_symdiff_with_size(int n, int size, const std::vector<std::uint32_t>& samples) {
  double best = INFINITY;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    if (__builtin_popcount(m) != size) continue;
    best = std::min(best, mean_symdiff(m, samples));
  }
  return best;
}

inline Eigen::MatrixXd random_points(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd p(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) p(i, k) = g(rng);
  return p;
}

}  // namespace oracle
