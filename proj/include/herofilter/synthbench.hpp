#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "herofilter/graph.hpp"
#include "herofilter/spectral.hpp"
#include "herofilter/training.hpp"

namespace herofilter {

// Synthetic graph recipe: class-conditioned edge generation targeting a
// mean node heterophily, with orthogonal class-mean features.
struct SynthSpec {
  int num_nodes = 500;
  int num_classes = 5;
  double target_h = 0.5;
  double avg_degree = 10.0;
  int feature_dim = 5;
  double feature_noise = 1.0;
  std::uint64_t seed = 0;
};

// Labels drawn uniformly; each edge picks a same-class partner with
// probability 1 - target_h and a uniformly different-class partner
// otherwise. Splits are 48/32/20 at random.
Graph synth_graph(const SynthSpec& spec);

struct Band {
  double lo = 0.0;
  double hi = 2.0;
};

struct SweepCell {
  double h = 0.0;
  Band band;
  double test_acc = 0.0;
  std::uint64_t seed = 0;
};

struct SweepResult {
  std::vector<double> h_values;
  std::vector<Band> bands;
  std::vector<SweepCell> cells;  // row-major over (h, band)
};

// For each (h, band): generate a graph, build patches from the
// band-filtered relevance matrix, train the mixer, record test accuracy.
// Cells run in parallel up to `jobs` threads.
SweepResult heterophily_sweep(const std::vector<double>& h_values, const std::vector<Band>& bands,
                              const SynthSpec& base_spec, const TrainConfig& cfg, int jobs = 0);

void write_sweep_csv(const SweepResult& sweep, const std::string& path);

// CSV of (lambda_lap, response, log10(response + 1e-12)) rows.
void frequency_response_export(const PolyFilter& f, const SpectralDecomposition& dec,
                               const std::string& path);
void frequency_response_export(const Vec& response, const Vec& lambda, const std::string& path);

}  // namespace herofilter
