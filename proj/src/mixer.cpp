#include "herofilter/mixer.hpp"

#include <cmath>
#include <cstring>

#include "herofilter/errors.hpp"
#include "herofilter/rng.hpp"

namespace herofilter {

namespace {

constexpr double kLnEps = 1e-5;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / M_SQRT2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / M_SQRT2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

TensorView reserve(std::size_t& cursor, std::size_t rows, std::size_t cols) {
  TensorView v{cursor, rows, cols};
  cursor += rows * cols;
  return v;
}

struct Layout {
  std::vector<MixerLayerViews> layers;
  MixerHeadViews head;
  std::size_t total = 0;
};

Layout build_layout(const MixerConfig& cfg) {
  const std::size_t p = cfg.patch_size;
  const std::size_t d = cfg.feature_dim;
  const std::size_t hp = cfg.resolved_hidden_patch();
  const std::size_t hf = cfg.hidden_feature;
  const std::size_t hh = cfg.hidden_head;
  const std::size_t agg = cfg.aggregated_dim();
  const std::size_t classes = cfg.num_classes;

  const std::size_t ln1 = cfg.patch_norm_len();
  Layout lay;
  std::size_t cursor = 0;
  for (int l = 0; l < cfg.layers; ++l) {
    MixerLayerViews v;
    v.ln1_gain = reserve(cursor, ln1, 1);
    v.ln1_bias = reserve(cursor, ln1, 1);
    v.pw1 = reserve(cursor, hp, p);
    v.pb1 = reserve(cursor, hp, 1);
    v.pw2 = reserve(cursor, p, hp);
    v.pb2 = reserve(cursor, p, 1);
    v.ln2_gain = reserve(cursor, d, 1);
    v.ln2_bias = reserve(cursor, d, 1);
    v.fw1 = reserve(cursor, hf, d);
    v.fb1 = reserve(cursor, hf, 1);
    v.fw2 = reserve(cursor, d, hf);
    v.fb2 = reserve(cursor, d, 1);
    lay.layers.push_back(v);
  }
  lay.head.w1 = reserve(cursor, hh, agg);
  lay.head.b1 = reserve(cursor, hh, 1);
  lay.head.w2 = reserve(cursor, classes, hh);
  lay.head.b2 = reserve(cursor, classes, 1);
  lay.total = cursor;
  return lay;
}

void glorot_fill(double* w, std::size_t fan_out, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < fan_out * fan_in; ++i) w[i] = rng.uniform(-bound, bound);
}

// y = W x + b for a row-major (out x in) weight view.
void dense_forward(const double* w, const double* b, std::size_t out, std::size_t in,
                   const double* x, double* y) {
  for (std::size_t i = 0; i < out; ++i) {
    const double* wi = w + i * in;
    double acc = b[i];
    for (std::size_t j = 0; j < in; ++j) acc += wi[j] * x[j];
    y[i] = acc;
  }
}

// Accumulates dW += dy x^T, db += dy and returns dx = W^T dy.
void dense_backward(const double* w, std::size_t out, std::size_t in, const double* x,
                    const double* dy, double* dw, double* db, double* dx) {
  for (std::size_t j = 0; j < in; ++j) dx[j] = 0.0;
  for (std::size_t i = 0; i < out; ++i) {
    const double* wi = w + i * in;
    double* dwi = dw + i * in;
    const double g = dy[i];
    db[i] += g;
    for (std::size_t j = 0; j < in; ++j) {
      dwi[j] += g * x[j];
      dx[j] += wi[j] * g;
    }
  }
}

struct LnCache {
  double mean;
  double rstd;
};

LnCache ln_forward(const double* x, std::size_t len, const double* gain, const double* bias,
                   double* normed, double* out) {
  double mean = 0.0;
  for (std::size_t i = 0; i < len; ++i) mean += x[i];
  mean /= static_cast<double>(len);
  double var = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double c = x[i] - mean;
    var += c * c;
  }
  var /= static_cast<double>(len);
  const double rstd = 1.0 / std::sqrt(var + kLnEps);
  for (std::size_t i = 0; i < len; ++i) {
    normed[i] = (x[i] - mean) * rstd;
    out[i] = normed[i] * gain[i] + bias[i];
  }
  return LnCache{mean, rstd};
}

// dy -> dx given the cached normalization; accumulates dgain/dbias.
void ln_backward(const double* dy, std::size_t len, const double* gain, const double* normed,
                 double rstd, double* dgain, double* dbias, double* dx) {
  double sum_dxn = 0.0;
  double sum_dxn_xn = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    dgain[i] += dy[i] * normed[i];
    dbias[i] += dy[i];
    const double dxn = dy[i] * gain[i];
    sum_dxn += dxn;
    sum_dxn_xn += dxn * normed[i];
  }
  const double inv_len = 1.0 / static_cast<double>(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double dxn = dy[i] * gain[i];
    dx[i] = rstd * (dxn - inv_len * sum_dxn - normed[i] * inv_len * sum_dxn_xn);
  }
}

}  // namespace

double mix_nonlinearity(Nonlinearity nl, double x) {
  switch (nl) {
    case Nonlinearity::gelu:
      return gelu(x);
    case Nonlinearity::relu:
      return x > 0.0 ? x : 0.0;
    case Nonlinearity::tanh:
      return std::tanh(x);
  }
  return x;
}

double mix_nonlinearity_grad(Nonlinearity nl, double x) {
  switch (nl) {
    case Nonlinearity::gelu:
      return gelu_grad(x);
    case Nonlinearity::relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Nonlinearity::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

Vec layer_norm(const Vec& x, const Vec& gain, const Vec& bias, double eps) {
  if (x.empty()) throw ShapeError("layer_norm: empty input");
  if (gain.size() != x.size() || bias.size() != x.size())
    throw ShapeError("layer_norm: gain/bias must match input length");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double rstd = 1.0 / std::sqrt(var + eps);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * rstd * gain[i] + bias[i];
  return out;
}

MixerModel init_mixer(const MixerConfig& cfg, std::uint64_t seed) {
  if (cfg.patch_size < 1 || cfg.feature_dim < 1 || cfg.num_classes < 1 || cfg.layers < 0)
    throw ParamError("init_mixer: invalid dimensions");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw ParamError("init_mixer: dropout in [0,1)");

  MixerModel model;
  model.cfg = cfg;
  model.init_seed = seed;
  Layout lay = build_layout(cfg);
  model.layer_views = std::move(lay.layers);
  model.head_views = lay.head;
  model.params.assign(lay.total, 0.0);

  Rng rng(splitmix64(seed ^ 0x6d69786572ULL));
  for (const auto& v : model.layer_views) {
    for (std::size_t i = 0; i < v.ln1_gain.size(); ++i) model.view(v.ln1_gain)[i] = 1.0;
    for (std::size_t i = 0; i < v.ln2_gain.size(); ++i) model.view(v.ln2_gain)[i] = 1.0;
    glorot_fill(model.view(v.pw1), v.pw1.rows, v.pw1.cols, rng);
    glorot_fill(model.view(v.pw2), v.pw2.rows, v.pw2.cols, rng);
    glorot_fill(model.view(v.fw1), v.fw1.rows, v.fw1.cols, rng);
    glorot_fill(model.view(v.fw2), v.fw2.rows, v.fw2.cols, rng);
  }
  glorot_fill(model.view(model.head_views.w1), model.head_views.w1.rows,
              model.head_views.w1.cols, rng);
  glorot_fill(model.view(model.head_views.w2), model.head_views.w2.rows,
              model.head_views.w2.cols, rng);
  return model;
}

Matrix patch_mixing(const Matrix& block, const MixerModel& model, int layer) {
  const MixerConfig& cfg = model.cfg;
  const int p = cfg.patch_size;
  const int d = cfg.feature_dim;
  const int hp = cfg.resolved_hidden_patch();
  if (static_cast<int>(block.rows) != p || static_cast<int>(block.cols) != d)
    throw ShapeError("patch_mixing: block shape mismatch");
  if (layer < 0 || layer >= cfg.layers) throw IndexError("patch_mixing: layer out of range");
  const MixerLayerViews& vw = model.layer_views[layer];

  Matrix ln_out(p, d);
  if (cfg.patch_norm_axis == PatchNormAxis::patch) {
    Vec col(p), normed(p), ln(p);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < p; ++i) col[i] = block.at(i, j);
      ln_forward(col.data(), p, model.view(vw.ln1_gain), model.view(vw.ln1_bias), normed.data(),
                 ln.data());
      for (int i = 0; i < p; ++i) ln_out.at(i, j) = ln[i];
    }
  } else {
    Vec normed(d), ln(d);
    for (int i = 0; i < p; ++i) {
      ln_forward(block.row(i), d, model.view(vw.ln1_gain), model.view(vw.ln1_bias),
                 normed.data(), ln.data());
      for (int j = 0; j < d; ++j) ln_out.at(i, j) = ln[j];
    }
  }

  Matrix out(p, d);
  Vec col(p), hidden(hp), mixed(p);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < p; ++i) col[i] = ln_out.at(i, j);
    dense_forward(model.view(vw.pw1), model.view(vw.pb1), hp, p, col.data(), hidden.data());
    for (int k = 0; k < hp; ++k) hidden[k] = mix_nonlinearity(cfg.nonlinearity, hidden[k]);
    dense_forward(model.view(vw.pw2), model.view(vw.pb2), p, hp, hidden.data(), mixed.data());
    for (int i = 0; i < p; ++i)
      out.at(i, j) = mixed[i] + (cfg.residual ? block.at(i, j) : 0.0);
  }
  return out;
}

Matrix feature_mixing(const Matrix& block, const MixerModel& model, int layer) {
  const MixerConfig& cfg = model.cfg;
  const int p = cfg.patch_size;
  const int d = cfg.feature_dim;
  const int hf = cfg.hidden_feature;
  if (static_cast<int>(block.rows) != p || static_cast<int>(block.cols) != d)
    throw ShapeError("feature_mixing: block shape mismatch");
  if (layer < 0 || layer >= cfg.layers) throw IndexError("feature_mixing: layer out of range");
  const MixerLayerViews& vw = model.layer_views[layer];

  Matrix out(p, d);
  Vec normed(d), ln(d), hidden(hf), mixed(d);
  for (int i = 0; i < p; ++i) {
    ln_forward(block.row(i), d, model.view(vw.ln2_gain), model.view(vw.ln2_bias), normed.data(),
               ln.data());
    dense_forward(model.view(vw.fw1), model.view(vw.fb1), hf, d, ln.data(), hidden.data());
    for (int k = 0; k < hf; ++k) hidden[k] = mix_nonlinearity(cfg.nonlinearity, hidden[k]);
    dense_forward(model.view(vw.fw2), model.view(vw.fb2), d, hf, hidden.data(), mixed.data());
    for (int j = 0; j < d; ++j)
      out.at(i, j) = mixed[j] + (cfg.residual ? block.at(i, j) : 0.0);
  }
  return out;
}

std::uint64_t checksum_params(const std::vector<double>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : params) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    h ^= bits;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ForwardResult mixer_forward(const std::vector<Matrix>& patches, const MixerModel& model,
                            bool train_mode, std::uint64_t seed) {
  const MixerConfig& cfg = model.cfg;
  const int n = static_cast<int>(patches.size());
  const int p = cfg.patch_size;
  const int d = cfg.feature_dim;
  const int hp = cfg.resolved_hidden_patch();
  const int hf = cfg.hidden_feature;
  const int hh = cfg.hidden_head;
  const int agg_dim = cfg.aggregated_dim();
  for (const auto& block : patches)
    if (static_cast<int>(block.rows) != p || static_cast<int>(block.cols) != d)
      throw ShapeError("mixer_forward: patch block shape mismatch");

  const bool dropping = train_mode && cfg.dropout > 0.0;
  const double keep = 1.0 - cfg.dropout;

  ForwardResult res;
  res.logits = Matrix(n, cfg.num_classes);
  res.tape.seed = seed;
  res.tape.train_mode = train_mode;
  res.tape.param_checksum = checksum_params(model.params);
  res.tape.layers.resize(n);
  res.tape.head.resize(n);

  Vec col_in(p), col_norm(p), col_out(p), col_hidden(hp), col_mix(p);
  Vec row_norm(d), row_out(d), row_hidden(hf), row_mix(d);

  for (int v = 0; v < n; ++v) {
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(v));
    auto& node_tape = res.tape.layers[v];
    node_tape.resize(cfg.layers);
    Matrix z = patches[v];

    for (int l = 0; l < cfg.layers; ++l) {
      const MixerLayerViews& vw = model.layer_views[l];
      NodeLayerTape& lt = node_tape[l];
      lt.input = z;

      // Patch mixing: normalize along the configured axis, then mix each
      // feature column along p.
      BlockTape& pt = lt.patch;
      pt.ln_normed = Matrix(p, d);
      pt.ln_out = Matrix(p, d);
      pt.t1 = Matrix(hp, d);
      pt.a1 = Matrix(hp, d);
      pt.pre_dropout = Matrix(p, d);
      pt.dropout_scale = Matrix(p, d, 1.0);
      if (cfg.patch_norm_axis == PatchNormAxis::patch) {
        pt.ln_mean.resize(d);
        pt.ln_rstd.resize(d);
        for (int j = 0; j < d; ++j) {
          for (int i = 0; i < p; ++i) col_in[i] = z.at(i, j);
          const LnCache c = ln_forward(col_in.data(), p, model.view(vw.ln1_gain),
                                       model.view(vw.ln1_bias), col_norm.data(), col_out.data());
          pt.ln_mean[j] = c.mean;
          pt.ln_rstd[j] = c.rstd;
          for (int i = 0; i < p; ++i) {
            pt.ln_normed.at(i, j) = col_norm[i];
            pt.ln_out.at(i, j) = col_out[i];
          }
        }
      } else {
        pt.ln_mean.resize(p);
        pt.ln_rstd.resize(p);
        for (int i = 0; i < p; ++i) {
          const LnCache c = ln_forward(z.row(i), d, model.view(vw.ln1_gain),
                                       model.view(vw.ln1_bias), row_norm.data(), row_out.data());
          pt.ln_mean[i] = c.mean;
          pt.ln_rstd[i] = c.rstd;
          for (int j = 0; j < d; ++j) {
            pt.ln_normed.at(i, j) = row_norm[j];
            pt.ln_out.at(i, j) = row_out[j];
          }
        }
      }
      Matrix mid(p, d);
      for (int j = 0; j < d; ++j) {
        for (int i = 0; i < p; ++i) col_out[i] = pt.ln_out.at(i, j);
        dense_forward(model.view(vw.pw1), model.view(vw.pb1), hp, p, col_out.data(),
                      col_hidden.data());
        for (int k = 0; k < hp; ++k) {
          pt.t1.at(k, j) = col_hidden[k];
          col_hidden[k] = mix_nonlinearity(cfg.nonlinearity, col_hidden[k]);
          pt.a1.at(k, j) = col_hidden[k];
        }
        dense_forward(model.view(vw.pw2), model.view(vw.pb2), p, hp, col_hidden.data(),
                      col_mix.data());
        for (int i = 0; i < p; ++i)
          pt.pre_dropout.at(i, j) = col_mix[i] + (cfg.residual ? z.at(i, j) : 0.0);
      }
      if (dropping) {
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < d; ++j)
            pt.dropout_scale.at(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
      }
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < d; ++j)
          mid.at(i, j) = pt.pre_dropout.at(i, j) * pt.dropout_scale.at(i, j);
      lt.mid = mid;

      // Feature mixing: normalize and mix each patch row along d.
      BlockTape& ft = lt.feature;
      ft.ln_mean.resize(p);
      ft.ln_rstd.resize(p);
      ft.ln_normed = Matrix(p, d);
      ft.ln_out = Matrix(p, d);
      ft.t1 = Matrix(p, hf);
      ft.a1 = Matrix(p, hf);
      ft.pre_dropout = Matrix(p, d);
      ft.dropout_scale = Matrix(p, d, 1.0);
      Matrix out(p, d);
      for (int i = 0; i < p; ++i) {
        const LnCache c = ln_forward(mid.row(i), d, model.view(vw.ln2_gain),
                                     model.view(vw.ln2_bias), row_norm.data(), row_out.data());
        ft.ln_mean[i] = c.mean;
        ft.ln_rstd[i] = c.rstd;
        for (int j = 0; j < d; ++j) {
          ft.ln_normed.at(i, j) = row_norm[j];
          ft.ln_out.at(i, j) = row_out[j];
        }
        dense_forward(model.view(vw.fw1), model.view(vw.fb1), hf, d, row_out.data(),
                      row_hidden.data());
        for (int k = 0; k < hf; ++k) {
          ft.t1.at(i, k) = row_hidden[k];
          row_hidden[k] = mix_nonlinearity(cfg.nonlinearity, row_hidden[k]);
          ft.a1.at(i, k) = row_hidden[k];
        }
        dense_forward(model.view(vw.fw2), model.view(vw.fb2), d, hf, row_hidden.data(),
                      row_mix.data());
        for (int j = 0; j < d; ++j)
          ft.pre_dropout.at(i, j) = row_mix[j] + (cfg.residual ? mid.at(i, j) : 0.0);
      }
      if (dropping) {
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < d; ++j)
            ft.dropout_scale.at(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
      }
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < d; ++j)
          out.at(i, j) = ft.pre_dropout.at(i, j) * ft.dropout_scale.at(i, j);
      lt.output = out;
      z = std::move(out);
    }

    NodeHeadTape& ht = res.tape.head[v];
    ht.aggregated.assign(agg_dim, 0.0);
    switch (cfg.aggregation) {
      case Aggregation::mean:
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < d; ++j) ht.aggregated[j] += z.at(i, j) / static_cast<double>(p);
        break;
      case Aggregation::sum:
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < d; ++j) ht.aggregated[j] += z.at(i, j);
        break;
      case Aggregation::flatten:
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < d; ++j) ht.aggregated[i * d + j] = z.at(i, j);
        break;
    }
    ht.t1.resize(hh);
    ht.a1.resize(hh);
    dense_forward(model.view(model.head_views.w1), model.view(model.head_views.b1), hh, agg_dim,
                  ht.aggregated.data(), ht.t1.data());
    for (int k = 0; k < hh; ++k) ht.a1[k] = mix_nonlinearity(cfg.nonlinearity, ht.t1[k]);
    dense_forward(model.view(model.head_views.w2), model.view(model.head_views.b2),
                  cfg.num_classes, hh, ht.a1.data(), res.logits.row(v));
  }
  return res;
}

BackwardResult mixer_backward(const MixerModel& model, const ForwardTape& tape,
                              const Matrix& dlogits) {
  if (tape.param_checksum != checksum_params(model.params))
    throw StateError("mixer_backward: tape is stale (parameters changed since forward)");
  const MixerConfig& cfg = model.cfg;
  const int n = static_cast<int>(tape.layers.size());
  if (static_cast<int>(dlogits.rows) != n || static_cast<int>(dlogits.cols) != cfg.num_classes)
    throw ShapeError("mixer_backward: dlogits shape mismatch");

  const int p = cfg.patch_size;
  const int d = cfg.feature_dim;
  const int hp = cfg.resolved_hidden_patch();
  const int hf = cfg.hidden_feature;
  const int hh = cfg.hidden_head;
  const int agg_dim = cfg.aggregated_dim();

  BackwardResult res;
  res.param_grads.assign(model.params.size(), 0.0);
  res.input_grads.assign(n, Matrix(p, d));
  auto grad = [&](const TensorView& v) { return res.param_grads.data() + v.offset; };

  Vec dhead_a1(hh), dhead_t1(hh), dagg(agg_dim);
  Vec col_dy(p), col_dln(p), col_dhidden(hp), col_dt1(hp), col_dx(p);
  Vec row_dy(d), row_dln(d), row_dhidden(hf), row_dt1(hf), row_dx(d);

  for (int v = 0; v < n; ++v) {
    const NodeHeadTape& ht = tape.head[v];

    // Head.
    for (int k = 0; k < hh; ++k) dhead_a1[k] = 0.0;
    dense_backward(model.view(model.head_views.w2), cfg.num_classes, hh, ht.a1.data(),
                   dlogits.row(v), grad(model.head_views.w2), grad(model.head_views.b2),
                   dhead_a1.data());
    for (int k = 0; k < hh; ++k)
      dhead_t1[k] = dhead_a1[k] * mix_nonlinearity_grad(cfg.nonlinearity, ht.t1[k]);
    dense_backward(model.view(model.head_views.w1), hh, agg_dim, ht.aggregated.data(),
                   dhead_t1.data(), grad(model.head_views.w1), grad(model.head_views.b1),
                   dagg.data());

    Matrix dz(p, d);
    switch (cfg.aggregation) {
      case Aggregation::mean:
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < d; ++j) dz.at(i, j) = dagg[j] / static_cast<double>(p);
        break;
      case Aggregation::sum:
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < d; ++j) dz.at(i, j) = dagg[j];
        break;
      case Aggregation::flatten:
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < d; ++j) dz.at(i, j) = dagg[i * d + j];
        break;
    }

    for (int l = cfg.layers - 1; l >= 0; --l) {
      const MixerLayerViews& vw = model.layer_views[l];
      const NodeLayerTape& lt = tape.layers[v][l];

      // Feature block.
      Matrix dmid(p, d);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < d; ++j)
          row_dy[j] = dz.at(i, j) * lt.feature.dropout_scale.at(i, j);
        // row_dy is the gradient at the block's pre-dropout output.
        for (int k = 0; k < hf; ++k) row_dhidden[k] = 0.0;
        dense_backward(model.view(vw.fw2), d, hf, lt.feature.a1.row(i), row_dy.data(),
                       grad(vw.fw2), grad(vw.fb2), row_dhidden.data());
        for (int k = 0; k < hf; ++k)
          row_dt1[k] =
              row_dhidden[k] * mix_nonlinearity_grad(cfg.nonlinearity, lt.feature.t1.at(i, k));
        dense_backward(model.view(vw.fw1), hf, d, lt.feature.ln_out.row(i), row_dt1.data(),
                       grad(vw.fw1), grad(vw.fb1), row_dln.data());
        ln_backward(row_dln.data(), d, model.view(vw.ln2_gain), lt.feature.ln_normed.row(i),
                    lt.feature.ln_rstd[i], grad(vw.ln2_gain), grad(vw.ln2_bias), row_dx.data());
        for (int j = 0; j < d; ++j)
          dmid.at(i, j) = row_dx[j] + (cfg.residual ? row_dy[j] : 0.0);
      }

      // Patch block: column MLPs first, then the axis-dependent norm.
      Matrix din(p, d);
      Matrix dln(p, d);
      Matrix dpre(p, d);
      for (int j = 0; j < d; ++j) {
        for (int i = 0; i < p; ++i) {
          col_dy[i] = dmid.at(i, j) * lt.patch.dropout_scale.at(i, j);
          dpre.at(i, j) = col_dy[i];
        }
        for (int k = 0; k < hp; ++k) col_dhidden[k] = 0.0;
        Vec a1_col(hp), t1_col(hp);
        for (int k = 0; k < hp; ++k) {
          a1_col[k] = lt.patch.a1.at(k, j);
          t1_col[k] = lt.patch.t1.at(k, j);
        }
        dense_backward(model.view(vw.pw2), p, hp, a1_col.data(), col_dy.data(), grad(vw.pw2),
                       grad(vw.pb2), col_dhidden.data());
        for (int k = 0; k < hp; ++k)
          col_dt1[k] = col_dhidden[k] * mix_nonlinearity_grad(cfg.nonlinearity, t1_col[k]);
        Vec ln_out_col(p);
        for (int i = 0; i < p; ++i) ln_out_col[i] = lt.patch.ln_out.at(i, j);
        dense_backward(model.view(vw.pw1), hp, p, ln_out_col.data(), col_dt1.data(),
                       grad(vw.pw1), grad(vw.pb1), col_dln.data());
        for (int i = 0; i < p; ++i) dln.at(i, j) = col_dln[i];
      }
      if (cfg.patch_norm_axis == PatchNormAxis::patch) {
        Vec dln_col(p), normed_col(p);
        for (int j = 0; j < d; ++j) {
          for (int i = 0; i < p; ++i) {
            dln_col[i] = dln.at(i, j);
            normed_col[i] = lt.patch.ln_normed.at(i, j);
          }
          ln_backward(dln_col.data(), p, model.view(vw.ln1_gain), normed_col.data(),
                      lt.patch.ln_rstd[j], grad(vw.ln1_gain), grad(vw.ln1_bias), col_dx.data());
          for (int i = 0; i < p; ++i) din.at(i, j) = col_dx[i];
        }
      } else {
        for (int i = 0; i < p; ++i) {
          ln_backward(dln.row(i), d, model.view(vw.ln1_gain), lt.patch.ln_normed.row(i),
                      lt.patch.ln_rstd[i], grad(vw.ln1_gain), grad(vw.ln1_bias), row_dx.data());
          for (int j = 0; j < d; ++j) din.at(i, j) = row_dx[j];
        }
      }
      if (cfg.residual)
        for (std::size_t i = 0; i < din.data.size(); ++i) din.data[i] += dpre.data[i];
      dz = std::move(din);
    }
    res.input_grads[v] = std::move(dz);
  }
  return res;
}

LossGrad cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                       const std::vector<int>& mask) {
  if (mask.empty()) throw DegenerateError("cross_entropy: empty mask");
  if (labels.size() != logits.rows) throw ShapeError("cross_entropy: labels/logits mismatch");
  const int classes = static_cast<int>(logits.cols);

  LossGrad out;
  out.dlogits = Matrix(logits.rows, logits.cols);
  const double inv_m = 1.0 / static_cast<double>(mask.size());
  for (int v : mask) {
    if (v < 0 || static_cast<std::size_t>(v) >= logits.rows)
      throw IndexError("cross_entropy: mask index out of range");
    const int y = labels[v];
    if (y < 0 || y >= classes) throw IndexError("cross_entropy: label out of range");
    const double* row = logits.row(v);
    double mx = row[0];
    for (int c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
    const double log_z = std::log(sum) + mx;
    out.loss += (log_z - row[y]) * inv_m;
    double* grow = out.dlogits.row(v);
    for (int c = 0; c < classes; ++c) {
      const double softmax = std::exp(row[c] - log_z);
      grow[c] = (softmax - (c == y ? 1.0 : 0.0)) * inv_m;
    }
  }
  return out;
}

double accuracy(const Matrix& logits, const std::vector<int>& labels,
                const std::vector<int>& mask) {
  if (mask.empty()) throw DegenerateError("accuracy: empty mask");
  if (labels.size() != logits.rows) throw ShapeError("accuracy: labels/logits mismatch");
  int hits = 0;
  for (int v : mask) {
    const double* row = logits.row(v);
    int arg = 0;
    for (std::size_t c = 1; c < logits.cols; ++c)
      if (row[c] > row[arg]) arg = static_cast<int>(c);
    if (arg == labels[v]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

}  // namespace herofilter
