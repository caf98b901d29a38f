#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "herofilter/linalg.hpp"

namespace herofilter {

using Edge = std::pair<int, int>;  // canonical: first < second

// Undirected attributed graph with train/val/test splits.
// Edges are stored canonically (u < v, sorted, deduplicated, no
// self-loops); symmetrization is implied everywhere they are consumed.
struct Graph {
  int num_nodes = 0;
  int num_classes = 0;
  std::vector<Edge> edges;
  Matrix features;          // num_nodes x feature_dim
  std::vector<int> labels;  // in [0, num_classes)
  std::vector<int> train_idx;
  std::vector<int> val_idx;
  std::vector<int> test_idx;

  int feature_dim() const { return static_cast<int>(features.cols); }
  std::size_t num_edges() const { return edges.size(); }

  bool operator==(const Graph&) const = default;
};

enum class NormMode { sym, sym_selfloop };

struct NormalizedAdjacency {
  Matrix a;  // dense symmetric n x n
  NormMode mode = NormMode::sym;
};

// Sorts, deduplicates, drops self-loops and flips pairs to u < v.
std::vector<Edge> canonicalize_edges(std::vector<Edge> edges);

// Validates endpoints/labels/splits against n and throws on violation.
void validate_graph(const Graph& g);

std::vector<int> degree_vector(const Graph& g);

// D^{-1/2} A D^{-1/2}, optionally with self-loops added first.
// Zero-degree nodes contribute zero rows/columns.
NormalizedAdjacency normalize_adjacency(const Graph& g, NormMode mode = NormMode::sym);

// Dataset directory layout: meta.json, edges.csv, features.csv,
// labels.csv, splits.json.
Graph load_dataset(const std::string& dir);
void save_dataset(const Graph& g, const std::string& dir);

}  // namespace herofilter
