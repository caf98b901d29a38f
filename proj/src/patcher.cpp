#include "herofilter/patcher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "herofilter/errors.hpp"
#include "herofilter/parallel.hpp"

namespace herofilter {

PatchSet top_p_columns(const Matrix& r, int p) {
  const int n = static_cast<int>(r.rows);
  if (r.rows != r.cols) throw ShapeError("top_p_columns: square score matrix required");
  if (p < 1 || p > n) throw SizeError("top_p_columns: p must be in [1, n]");

  PatchSet ps;
  ps.p = p;
  ps.indices.assign(n, std::vector<int>(p));
  ps.scores.assign(n, Vec(p));
  std::vector<int> order(n);
  for (int v = 0; v < n; ++v) {
    const double* row = r.row(v);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + p, order.end(), [&](int i, int j) {
      if (row[i] != row[j]) return row[i] > row[j];
      return i < j;
    });
    for (int j = 0; j < p; ++j) {
      ps.indices[v][j] = order[j];
      ps.scores[v][j] = row[order[j]];
    }
  }
  return ps;
}

std::vector<Matrix> extract_patches(const Graph& g, const PatchSet& ps) {
  if (static_cast<int>(ps.size()) != g.num_nodes)
    throw ShapeError("extract_patches: patch set does not match graph");
  const int d = g.feature_dim();
  std::vector<Matrix> patches(ps.size());
  for (std::size_t v = 0; v < ps.size(); ++v) {
    Matrix block(ps.p, d);
    for (int j = 0; j < ps.p; ++j) {
      const int u = ps.indices[v][j];
      if (u < 0 || u >= g.num_nodes) throw IndexError("extract_patches: index out of range");
      for (int f = 0; f < d; ++f) block.at(j, f) = g.features.at(u, f);
    }
    patches[v] = std::move(block);
  }
  return patches;
}

PatchSet spectral_patch(const SpectralDecomposition& dec, const PolyFilter& f, int p) {
  PatchSet ps = top_p_columns(relevance_matrix(dec, f), p);
  ps.mode = PatchMode::spectral;
  return ps;
}

double ppr_objective(const Vec& r, int v, const NormalizedAdjacency& a, double c) {
  const std::size_t n = a.a.rows;
  if (r.size() != n) throw ShapeError("ppr_objective: dimension mismatch");
  if (c < 0.0 || c >= 1.0) throw ParamError("ppr_objective: c must be in [0, 1)");
  const Vec ar = matvec(a.a, r);
  double smooth = 0.0;
  double anchor = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    smooth += r[i] * (r[i] - ar[i]);
    const double diff = r[i] - (static_cast<int>(i) == v ? 1.0 : 0.0);
    anchor += diff * diff;
  }
  return c * smooth + (1.0 - c) * anchor;
}

RankVector ppr_closed_form(int v, const NormalizedAdjacency& a, double c) {
  const std::size_t n = a.a.rows;
  if (v < 0 || static_cast<std::size_t>(v) >= n) throw IndexError("ppr_closed_form: bad node id");
  if (c < 0.0 || c >= 1.0) throw ParamError("ppr_closed_form: c must be in [0, 1)");
  // I - cA~ is positive definite for c < 1 because rho(A~) <= 1.
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = (i == j ? 1.0 : 0.0) - c * a.a.at(i, j);
  Vec rhs(n, 0.0);
  rhs[v] = 1.0 - c;
  Cholesky chol(m);
  RankVector out;
  out.owner = v;
  out.c = c;
  out.k_used = -1;
  out.r = chol.solve(rhs);
  return out;
}

RankVector ppr_neumann(int v, const NormalizedAdjacency& a, double c, int k) {
  const std::size_t n = a.a.rows;
  if (v < 0 || static_cast<std::size_t>(v) >= n) throw IndexError("ppr_neumann: bad node id");
  if (c < 0.0 || c >= 1.0) throw ParamError("ppr_neumann: c must be in [0, 1)");
  if (k < 0) throw ParamError("ppr_neumann: K must be >= 0");
  RankVector out;
  out.owner = v;
  out.c = c;
  out.k_used = k;
  out.r.assign(n, 0.0);
  out.r[v] = 1.0 - c;
  for (int step = 0; step < k; ++step) {
    Vec next = matvec(a.a, out.r);
    for (std::size_t i = 0; i < n; ++i) next[i] *= c;
    next[v] += 1.0 - c;
    out.r = std::move(next);
  }
  return out;
}

PatchSet fast_patch(const NormalizedAdjacency& a, double c, int k, int p) {
  const int n = static_cast<int>(a.a.rows);
  Matrix scores(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t v) {
    const RankVector rv = ppr_neumann(static_cast<int>(v), a, c, k);
    double* row = scores.row(v);
    for (int j = 0; j < n; ++j) row[j] = rv.r[j];
  });
  PatchSet ps = top_p_columns(scores, p);
  ps.mode = PatchMode::fast;
  return ps;
}

std::vector<Edge> patch_induced_graph(const PatchSet& ps) {
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < ps.size(); ++v)
    for (int u : ps.indices[v])
      if (u != static_cast<int>(v)) edges.emplace_back(static_cast<int>(v), u);
  return canonicalize_edges(std::move(edges));
}

}  // namespace herofilter
