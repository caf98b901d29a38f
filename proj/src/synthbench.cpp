#include "herofilter/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "herofilter/errors.hpp"
#include "herofilter/parallel.hpp"
#include "herofilter/patcher.hpp"
#include "herofilter/rng.hpp"

namespace herofilter {

Graph synth_graph(const SynthSpec& spec) {
  const int n = spec.num_nodes;
  const int classes = spec.num_classes;
  if (n < 2) throw ParamError("synth_graph: need at least 2 nodes");
  if (classes < 2) throw ParamError("synth_graph: need at least 2 classes");
  if (spec.target_h < 0.0 || spec.target_h > 1.0)
    throw ParamError("synth_graph: target_h must be in [0,1]");
  if (spec.avg_degree < 1.0) throw ParamError("synth_graph: avg_degree must be >= 1");
  if (spec.feature_dim < classes)
    throw ParamError("synth_graph: feature_dim must be >= num_classes for orthogonal means");
  const long target_edges = std::lround(n * spec.avg_degree / 2.0);
  if (target_edges > static_cast<long>(n) * (n - 1) / 2)
    throw ParamError("synth_graph: requested degree infeasible without multi-edges");

  Rng rng(splitmix64(spec.seed ^ 0x53594e5448ULL));

  Graph g;
  g.num_nodes = n;
  g.num_classes = classes;
  g.labels.resize(n);
  std::vector<std::vector<int>> by_class(classes);
  for (int i = 0; i < n; ++i) {
    g.labels[i] = static_cast<int>(rng.uniform_index(classes));
    by_class[g.labels[i]].push_back(i);
  }
  // Uniform labels can still leave a class empty on small n; different-
  // class sampling needs at least two populated classes.
  int populated = 0;
  for (const auto& members : by_class)
    if (!members.empty()) ++populated;
  if (populated < 2) throw ParamError("synth_graph: degenerate label assignment, resize or reseed");

  std::vector<std::set<int>> adjacency(n);
  std::vector<Edge> edges;
  edges.reserve(target_edges);
  const long attempt_cap = 200L * target_edges + 1000;
  long attempts = 0;
  long placed = 0;
  // Round-robin sources keep degrees near-uniform and guarantee every
  // node at least one edge once avg_degree >= 2.
  int source_cursor = 0;
  while (placed < target_edges) {
    if (++attempts > attempt_cap)
      throw ParamError("synth_graph: could not place requested edges without multi-edges");
    const int u = source_cursor;
    const bool same_class = !rng.bernoulli(spec.target_h);
    int v = -1;
    if (same_class) {
      const auto& pool = by_class[g.labels[u]];
      if (pool.size() < 2) continue;
      v = pool[rng.uniform_index(pool.size())];
    } else {
      int cls;
      do {
        cls = static_cast<int>(rng.uniform_index(classes));
      } while (cls == g.labels[u] || by_class[cls].empty());
      const auto& pool = by_class[cls];
      v = pool[rng.uniform_index(pool.size())];
    }
    if (v == u || adjacency[u].count(v)) continue;
    adjacency[u].insert(v);
    adjacency[v].insert(u);
    edges.emplace_back(std::min(u, v), std::max(u, v));
    ++placed;
    source_cursor = (source_cursor + 1) % n;
  }
  g.edges = canonicalize_edges(std::move(edges));

  g.features = Matrix(n, spec.feature_dim);
  for (int i = 0; i < n; ++i) {
    g.features.at(i, g.labels[i]) = 1.0;  // orthogonal unit class means
    for (int j = 0; j < spec.feature_dim; ++j)
      g.features.at(i, j) += spec.feature_noise * rng.normal();
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const int train_end = static_cast<int>(std::lround(0.48 * n));
  const int val_end = train_end + static_cast<int>(std::lround(0.32 * n));
  g.train_idx.assign(order.begin(), order.begin() + train_end);
  g.val_idx.assign(order.begin() + train_end, order.begin() + val_end);
  g.test_idx.assign(order.begin() + val_end, order.end());
  std::sort(g.train_idx.begin(), g.train_idx.end());
  std::sort(g.val_idx.begin(), g.val_idx.end());
  std::sort(g.test_idx.begin(), g.test_idx.end());

  validate_graph(g);
  return g;
}

SweepResult heterophily_sweep(const std::vector<double>& h_values, const std::vector<Band>& bands,
                              const SynthSpec& base_spec, const TrainConfig& cfg, int jobs) {
  if (h_values.empty() || bands.empty()) throw ParamError("heterophily_sweep: empty grid");
  for (const Band& b : bands)
    if (!(b.lo < b.hi)) throw ParamError("heterophily_sweep: band lo must be < hi");

  SweepResult sweep;
  sweep.h_values = h_values;
  sweep.bands = bands;
  sweep.cells.resize(h_values.size() * bands.size());

  parallel_for(
      sweep.cells.size(),
      [&](std::size_t cell) {
        const std::size_t hi_idx = cell / bands.size();
        const std::size_t band_idx = cell % bands.size();
        SynthSpec spec = base_spec;
        spec.target_h = h_values[hi_idx];
        spec.seed = splitmix64(base_spec.seed ^ (0x57454550ULL + cell));
        const Graph g = synth_graph(spec);

        const NormalizedAdjacency a = normalize_adjacency(g, cfg.norm_mode);
        const SpectralDecomposition dec = eigendecompose(a);
        const Vec response =
            band_filter(dec.eigenvalues, bands[band_idx].lo, bands[band_idx].hi);
        const Matrix r = relevance_from_response(dec, response);
        const PatchSet ps = top_p_columns(r, std::min(cfg.patch_size, g.num_nodes));

        TrainConfig cell_cfg = cfg;
        cell_cfg.seed = splitmix64(cfg.seed ^ (0x43454c4cULL + cell));
        cell_cfg.patch_size = ps.p;
        const TrainResult res = train_with_patches(g, cell_cfg, ps);

        SweepCell& out = sweep.cells[cell];
        out.h = h_values[hi_idx];
        out.band = bands[band_idx];
        out.test_acc = res.report.test_acc;
        out.seed = spec.seed;
      },
      jobs);
  return sweep;
}

namespace {

void write_f17(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "h,band_lo,band_hi,test_acc,seed\n";
  for (const SweepCell& c : sweep.cells) {
    write_f17(out, c.h);
    out << ",";
    write_f17(out, c.band.lo);
    out << ",";
    write_f17(out, c.band.hi);
    out << ",";
    write_f17(out, c.test_acc);
    out << "," << c.seed << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void frequency_response_export(const Vec& response, const Vec& lambda, const std::string& path) {
  if (response.size() != lambda.size())
    throw ShapeError("frequency_response_export: dimension mismatch");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "lambda_lap,response,log10_response\n";
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    write_f17(out, 1.0 - lambda[i]);
    out << ",";
    write_f17(out, response[i]);
    out << ",";
    write_f17(out, std::log10(response[i] + 1e-12));
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void frequency_response_export(const PolyFilter& f, const SpectralDecomposition& dec,
                               const std::string& path) {
  frequency_response_export(filter_response(f, dec.eigenvalues), dec.eigenvalues, path);
}

}  // namespace herofilter
