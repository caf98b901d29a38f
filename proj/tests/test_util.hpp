#pragma once

#include <cmath>
#include <set>

#include "herofilter/graph.hpp"
#include "herofilter/rng.hpp"

namespace herofilter::testutil {

// Erdos-Renyi-style random graph with random labels/features, used as a
// neutral input for property tests.
inline Graph random_graph(int n, double edge_prob, int classes, int feature_dim,
                          std::uint64_t seed) {
  Rng rng(splitmix64(seed ^ 0x54455354ULL));
  Graph g;
  g.num_nodes = n;
  g.num_classes = classes;
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < edge_prob) edges.emplace_back(u, v);
  g.edges = canonicalize_edges(std::move(edges));
  g.labels.resize(n);
  for (int i = 0; i < n; ++i) g.labels[i] = static_cast<int>(rng.uniform_index(classes));
  g.features = Matrix(n, feature_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < feature_dim; ++j) g.features.at(i, j) = rng.normal();
  for (int i = 0; i < n; ++i) {
    if (i % 5 == 4)
      g.test_idx.push_back(i);
    else if (i % 5 == 3)
      g.val_idx.push_back(i);
    else
      g.train_idx.push_back(i);
  }
  return g;
}

inline Graph triangle_graph() {
  Graph g;
  g.num_nodes = 3;
  g.num_classes = 2;
  g.edges = {{0, 1}, {0, 2}, {1, 2}};
  g.labels = {0, 0, 1};
  g.features = Matrix(3, 2);
  for (int i = 0; i < 3; ++i) g.features.at(i, 0) = 1.0 + i;
  g.train_idx = {0};
  g.val_idx = {1};
  g.test_idx = {2};
  return g;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace herofilter::testutil
