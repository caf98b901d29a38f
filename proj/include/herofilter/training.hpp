#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "herofilter/graph.hpp"
#include "herofilter/mixer.hpp"
#include "herofilter/patcher.hpp"
#include "herofilter/spectral.hpp"

namespace herofilter {

enum class PatcherChoice {
  spectral,      // adaptive: trainable filter, relevance scores as soft weights
  fast,          // PPR/Neumann patches, fixed
  fixed_filter,  // "static": spectral patches from the initial filter, fixed
};

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  int max_epochs = 500;
  int patience = 50;
  int hidden = 64;  // feature-MLP and head hidden width
  double dropout = 0.5;
  int layers = 2;
  int patch_size = 8;
  int filter_order = 2;  // K
  PatcherChoice patcher = PatcherChoice::fixed_filter;
  int refresh_interval = 0;  // epochs between patch refreshes, 0 = never
  std::uint64_t seed = 0;
  Aggregation aggregation = Aggregation::mean;
  Nonlinearity nonlinearity = Nonlinearity::gelu;
  bool residual = false;
  PatchNormAxis patch_norm_axis = PatchNormAxis::feature;
  double ppr_c = 0.5;
  int neumann_k = 20;
  NormMode norm_mode = NormMode::sym;
  Activation filter_activation = Activation::tanh;
  bool apply_activation_in_relevance = true;
  bool shared_filter_weights = false;

  void validate() const;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based epoch index with minimal val_loss
  double best_val_loss = 0.0;
  double test_acc = 0.0;
  double wall_time_sec = 0.0;
};

// Everything needed to reproduce predictions: mixer parameters, the
// trained filter, the filter snapshot that defined the active patch
// indices, and the patch set itself.
struct TrainedModel {
  MixerModel mixer;
  TrainConfig cfg;
  PolyFilter filter;
  PolyFilter patch_filter;
  PatchSet patches;
  bool soft_weighted = false;  // patch rows scaled by relevance scores
};

struct TrainResult {
  TrainedModel model;
  TrainReport report;
};

struct AdamState {
  Vec m;
  Vec v;
  long t = 0;
};

// Classic Adam with L2-coupled weight decay and bias correction.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
               double eps_opt = 1e-8);

// Initial polynomial filter: w_1 = 1, higher orders 0 (tanh-squashed
// first-order adjacency response).
PolyFilter initial_filter(int order, std::size_t n, const TrainConfig& cfg);

TrainResult train(const Graph& g, const TrainConfig& cfg);

// Trains on an externally supplied patch set (sweeps, ablations).
TrainResult train_with_patches(const Graph& g, const TrainConfig& cfg, const PatchSet& ps);

// Reference model: features smoothed by the built-in low-pass filter,
// fed through the same mixer as single-row patches.
TrainResult train_low_pass_baseline(const Graph& g, const TrainConfig& cfg);

struct EvalResult {
  double loss = 0.0;
  double acc = 0.0;
};

EvalResult evaluate(const TrainedModel& tm, const Graph& g, const PatchSet& ps,
                    const std::vector<int>& split);

struct AblationResult {
  double acc_ranked = 0.0;
  double acc_random = 0.0;
};

// Trains twice per trial: patches as ranked, then with each row's order
// shuffled. Returns mean test accuracies.
AblationResult ranked_vs_random_ablation(const Graph& g, const TrainConfig& cfg, int trials);

// Smoothed features (2I - A~)^{-1} X == U diag(1/(2 - lambda)) U^T X.
Matrix low_pass_smooth_features(const Matrix& features, const NormalizedAdjacency& a);

// Checkpoint: 8-byte little-endian JSON header length, the JSON header,
// then all tensors as little-endian 64-bit floats (see docs in README).
void save_checkpoint(const TrainedModel& tm, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace herofilter
