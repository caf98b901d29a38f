#pragma once

#include <vector>

#include "herofilter/graph.hpp"
#include "herofilter/spectral.hpp"

namespace herofilter {

enum class PatchMode { spectral, fast };

// Row v lists the p nodes most relevant to v, scores descending; equal
// scores are ordered by ascending node index.
struct PatchSet {
  std::vector<std::vector<int>> indices;    // n rows of p node ids
  std::vector<Vec> scores;                  // matching relevance scores
  PatchMode mode = PatchMode::spectral;
  int p = 0;

  std::size_t size() const { return indices.size(); }
};

// Personalized ranking vector for one source node.
struct RankVector {
  int owner = 0;
  Vec r;
  double c = 0.5;
  int k_used = -1;  // Neumann truncation order, -1 for the closed form
};

PatchSet top_p_columns(const Matrix& r, int p);

// n x p x d tensor flattened as [node][slot][feature].
std::vector<Matrix> extract_patches(const Graph& g, const PatchSet& ps);

PatchSet spectral_patch(const SpectralDecomposition& dec, const PolyFilter& f, int p);

// J(r) = c r^T (I - A~) r + (1 - c) ||r - e_v||^2
double ppr_objective(const Vec& r, int v, const NormalizedAdjacency& a, double c);

// r_v = (1 - c)(I - c A~)^{-1} e_v via an SPD solve.
RankVector ppr_closed_form(int v, const NormalizedAdjacency& a, double c);

// Truncated Neumann series evaluated in Horner form,
// r <- c A~ r + (1 - c) e_v, never materializing powers of A~.
RankVector ppr_neumann(int v, const NormalizedAdjacency& a, double c, int k);

// Stacks per-node rank vectors (parallel across nodes) and selects
// top-p per row. Output is independent of the schedule.
PatchSet fast_patch(const NormalizedAdjacency& a, double c, int k, int p);

// Undirected edges {v, u} for every u selected by v (self excluded).
std::vector<Edge> patch_induced_graph(const PatchSet& ps);

}  // namespace herofilter
