#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "herofilter/linalg.hpp"

namespace herofilter {

enum class Aggregation { mean, sum, flatten };
enum class Nonlinearity { gelu, relu, tanh };

// Axis normalized ahead of the patch-mixing MLP. `feature` follows the
// MLP-Mixer convention (normalize channels, then mix tokens) and keeps
// the class-mean component of a patch alive; `patch` normalizes the
// mixed axis itself, which cancels any signal that is constant across
// the patch.
enum class PatchNormAxis { feature, patch };

double mix_nonlinearity(Nonlinearity nl, double x);
double mix_nonlinearity_grad(Nonlinearity nl, double x);

// (x - mean) / sqrt(var + eps) * gain + bias over the last axis.
Vec layer_norm(const Vec& x, const Vec& gain, const Vec& bias, double eps = 1e-5);

struct MixerConfig {
  int patch_size = 0;   // p
  int feature_dim = 0;  // d
  int num_classes = 0;  // C
  int layers = 2;       // m
  int hidden_patch = 0;  // 0 -> 2p
  int hidden_feature = 64;
  int hidden_head = 64;
  double dropout = 0.5;
  Aggregation aggregation = Aggregation::mean;
  Nonlinearity nonlinearity = Nonlinearity::gelu;
  bool residual = false;
  PatchNormAxis patch_norm_axis = PatchNormAxis::feature;

  int resolved_hidden_patch() const { return hidden_patch > 0 ? hidden_patch : 2 * patch_size; }
  int patch_norm_len() const {
    return patch_norm_axis == PatchNormAxis::patch ? patch_size : feature_dim;
  }
  int aggregated_dim() const {
    return aggregation == Aggregation::flatten ? patch_size * feature_dim : feature_dim;
  }
};

// Offsets of one tensor inside the flat parameter buffer.
struct TensorView {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;  // 1 for vectors
  std::size_t size() const { return rows * cols; }
};

struct MixerLayerViews {
  TensorView ln1_gain, ln1_bias;  // patch-axis norm, length p
  TensorView pw1, pb1, pw2, pb2;  // p -> hidden_p -> p
  TensorView ln2_gain, ln2_bias;  // feature-axis norm, length d
  TensorView fw1, fb1, fw2, fb2;  // d -> hidden_f -> d
};

struct MixerHeadViews {
  TensorView w1, b1, w2, b2;  // agg_dim -> hidden_head -> C
};

// All parameters live in one flat buffer so the optimizer and the
// checkpoint writer can treat the model as a single vector.
struct MixerModel {
  MixerConfig cfg;
  std::vector<double> params;
  std::vector<MixerLayerViews> layer_views;
  MixerHeadViews head_views;
  std::uint64_t init_seed = 0;

  double* view(const TensorView& v) { return params.data() + v.offset; }
  const double* view(const TensorView& v) const { return params.data() + v.offset; }
};

// Glorot-uniform dense weights, zero biases, unit layer-norm gains.
MixerModel init_mixer(const MixerConfig& cfg, std::uint64_t seed);

// One mixing block applied to a single p x d patch, dropout-free.
// patch_mixing normalizes and mixes along the patch axis (per feature
// column); feature_mixing does the same along the feature axis.
Matrix patch_mixing(const Matrix& block, const MixerModel& model, int layer);
Matrix feature_mixing(const Matrix& block, const MixerModel& model, int layer);

// Cached activations for one node and layer.
struct BlockTape {
  Vec ln_mean, ln_rstd;  // one entry per normalized vector
  Matrix ln_normed;      // pre gain/bias, same shape as the block input
  Matrix ln_out;
  Matrix t1;  // pre-nonlinearity hidden activations
  Matrix a1;  // post-nonlinearity
  Matrix pre_dropout;
  Matrix dropout_scale;  // elementwise multiplier (1 when disabled)
};

struct NodeLayerTape {
  Matrix input;  // p x d
  BlockTape patch;
  Matrix mid;  // after the patch block
  BlockTape feature;
  Matrix output;
};

struct NodeHeadTape {
  Vec aggregated;
  Vec t1;
  Vec a1;
};

struct ForwardTape {
  std::uint64_t seed = 0;
  bool train_mode = false;
  std::uint64_t param_checksum = 0;
  std::vector<std::vector<NodeLayerTape>> layers;  // [node][layer]
  std::vector<NodeHeadTape> head;
};

struct ForwardResult {
  Matrix logits;  // n x C
  ForwardTape tape;
};

// Patches are one p x d block per node. Dropout fires only in train
// mode; eval mode is deterministic and mask-free. Masks are drawn from
// per-node streams derived from the seed, so results do not depend on
// any execution schedule.
ForwardResult mixer_forward(const std::vector<Matrix>& patches, const MixerModel& model,
                            bool train_mode, std::uint64_t seed);

struct BackwardResult {
  std::vector<double> param_grads;    // aligned with model.params
  std::vector<Matrix> input_grads;    // d loss / d patches
};

// Exact reverse-mode gradients. Throws StateError when the tape was
// recorded against different parameter values.
BackwardResult mixer_backward(const MixerModel& model, const ForwardTape& tape,
                              const Matrix& dlogits);

struct LossGrad {
  double loss = 0.0;
  Matrix dlogits;
};

// Mean masked softmax cross-entropy, stabilized by max subtraction.
LossGrad cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                       const std::vector<int>& mask);

// Fraction of argmax hits over the mask; ties resolve to the lowest
// class index.
double accuracy(const Matrix& logits, const std::vector<int>& labels,
                const std::vector<int>& mask);

std::uint64_t checksum_params(const std::vector<double>& params);

}  // namespace herofilter
