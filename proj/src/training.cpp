#include "herofilter/training.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "herofilter/config_json.hpp"
#include "herofilter/errors.hpp"
#include "herofilter/rng.hpp"

namespace herofilter {

namespace {

std::vector<double> flatten_filter(const PolyFilter& f) {
  std::vector<double> flat;
  for (const auto& w : f.weights) flat.insert(flat.end(), w.begin(), w.end());
  return flat;
}

void unflatten_filter(const std::vector<double>& flat, PolyFilter& f) {
  std::size_t cursor = 0;
  for (auto& w : f.weights) {
    std::copy(flat.begin() + cursor, flat.begin() + cursor + w.size(), w.begin());
    cursor += w.size();
  }
}

// Relevance scores of the selected patch entries under the current
// filter: S[v][j] = sum_i q_i U[v][i] U[idx][i].
std::vector<Vec> patch_scores_from_filter(const SpectralDecomposition& dec, const PolyFilter& f,
                                          const std::vector<std::vector<int>>& indices) {
  const Vec q = f.apply_activation_in_relevance ? filter_response(f, dec.eigenvalues)
                                                : polynomial_sum(f, dec.eigenvalues);
  const std::size_t n = dec.size();
  std::vector<Vec> scores(indices.size());
  for (std::size_t v = 0; v < indices.size(); ++v) {
    scores[v].resize(indices[v].size());
    const double* uv = dec.eigenvectors.row(v);
    for (std::size_t j = 0; j < indices[v].size(); ++j) {
      const double* uj = dec.eigenvectors.row(indices[v][j]);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += q[i] * uv[i] * uj[i];
      scores[v][j] = acc;
    }
  }
  return scores;
}

// Chain rule from patch-row soft weights back to filter weights.
std::vector<double> filter_gradient(const SpectralDecomposition& dec, const PolyFilter& f,
                                    const std::vector<std::vector<int>>& indices,
                                    const std::vector<Vec>& dscore) {
  const std::size_t n = dec.size();
  Vec dq(n, 0.0);
  for (std::size_t v = 0; v < indices.size(); ++v) {
    const double* uv = dec.eigenvectors.row(v);
    for (std::size_t j = 0; j < indices[v].size(); ++j) {
      const double g = dscore[v][j];
      if (g == 0.0) continue;
      const double* uj = dec.eigenvectors.row(indices[v][j]);
      for (std::size_t i = 0; i < n; ++i) dq[i] += g * uv[i] * uj[i];
    }
  }
  std::vector<double> grads(static_cast<std::size_t>(f.order()) * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double pwr = 1.0;
    for (int k = 0; k < f.order(); ++k) {
      pwr *= dec.eigenvalues[i];
      const double local = f.apply_activation_in_relevance
                               ? activation_grad(f.activation, f.weights[k][i] * pwr) * pwr
                               : pwr;
      grads[static_cast<std::size_t>(k) * n + i] = dq[i] * local;
    }
  }
  if (f.shared_weights) {
    for (int k = 0; k < f.order(); ++k) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += grads[static_cast<std::size_t>(k) * n + i];
      for (std::size_t i = 0; i < n; ++i) grads[static_cast<std::size_t>(k) * n + i] = total;
    }
  }
  return grads;
}

std::vector<Matrix> build_inputs(const std::vector<Matrix>& raw, const PatchSet& ps, bool soft) {
  if (!soft) return raw;
  std::vector<Matrix> scaled = raw;
  for (std::size_t v = 0; v < scaled.size(); ++v)
    for (std::size_t j = 0; j < scaled[v].rows; ++j) {
      const double s = ps.scores[v][j];
      for (std::size_t c = 0; c < scaled[v].cols; ++c) scaled[v].at(j, c) *= s;
    }
  return scaled;
}

MixerConfig mixer_config_for(const Graph& g, const TrainConfig& cfg, int patch_size) {
  MixerConfig mc;
  mc.patch_size = patch_size;
  mc.feature_dim = g.feature_dim();
  mc.num_classes = g.num_classes;
  mc.layers = cfg.layers;
  mc.hidden_feature = cfg.hidden;
  mc.hidden_head = cfg.hidden;
  mc.dropout = cfg.dropout;
  mc.aggregation = cfg.aggregation;
  mc.nonlinearity = cfg.nonlinearity;
  mc.residual = cfg.residual;
  mc.patch_norm_axis = cfg.patch_norm_axis;
  return mc;
}

struct Snapshot {
  std::vector<double> mixer_params;
  PolyFilter filter;
  PatchSet patches;
  int epoch = 0;
  double val_loss = std::numeric_limits<double>::infinity();
};

TrainResult train_impl(const Graph& g, const TrainConfig& cfg, PatchSet ps,
                       const SpectralDecomposition* dec, PolyFilter filter, bool adaptive) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  if (g.train_idx.empty() || g.val_idx.empty() || g.test_idx.empty())
    throw DegenerateError("train: empty split");

  std::vector<Matrix> raw = extract_patches(g, ps);
  if (adaptive) ps.scores = patch_scores_from_filter(*dec, filter, ps.indices);

  MixerModel model = init_mixer(mixer_config_for(g, cfg, ps.p), cfg.seed);
  AdamState adam_mixer{Vec(model.params.size(), 0.0), Vec(model.params.size(), 0.0), 0};
  std::vector<double> filter_flat = flatten_filter(filter);
  AdamState adam_filter{Vec(filter_flat.size(), 0.0), Vec(filter_flat.size(), 0.0), 0};

  TrainReport report;
  Snapshot best;
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (adaptive && cfg.refresh_interval > 0 && epoch > 1 &&
        (epoch - 1) % cfg.refresh_interval == 0) {
      ps = top_p_columns(relevance_matrix(*dec, filter), ps.p);
      ps.mode = PatchMode::spectral;
      raw = extract_patches(g, ps);
    }
    if (adaptive) ps.scores = patch_scores_from_filter(*dec, filter, ps.indices);

    const std::vector<Matrix> inputs = build_inputs(raw, ps, adaptive);
    const std::uint64_t epoch_seed = splitmix64(cfg.seed ^ (0x45504f43ULL + epoch));
    ForwardResult fwd = mixer_forward(inputs, model, true, epoch_seed);
    LossGrad lg = cross_entropy(fwd.logits, g.labels, g.train_idx);
    if (!std::isfinite(lg.loss))
      throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch));

    BackwardResult bwd = mixer_backward(model, fwd.tape, lg.dlogits);
    adam_step(model.params, bwd.param_grads, adam_mixer, cfg.lr, cfg.weight_decay);
    if (adaptive) {
      std::vector<Vec> dscore(raw.size());
      for (std::size_t v = 0; v < raw.size(); ++v) {
        dscore[v].assign(ps.p, 0.0);
        for (int j = 0; j < ps.p; ++j) {
          double acc = 0.0;
          for (std::size_t c = 0; c < raw[v].cols; ++c)
            acc += bwd.input_grads[v].at(j, c) * raw[v].at(j, c);
          dscore[v][j] = acc;
        }
      }
      const std::vector<double> fgrads = filter_gradient(*dec, filter, ps.indices, dscore);
      adam_step(filter_flat, fgrads, adam_filter, cfg.lr, cfg.weight_decay);
      unflatten_filter(filter_flat, filter);
      ps.scores = patch_scores_from_filter(*dec, filter, ps.indices);
    }

    const std::vector<Matrix> eval_inputs = build_inputs(raw, ps, adaptive);
    ForwardResult eval_fwd = mixer_forward(eval_inputs, model, false, 0);
    LossGrad val = cross_entropy(eval_fwd.logits, g.labels, g.val_idx);
    EpochStats stats;
    stats.train_loss = lg.loss;
    stats.val_loss = val.loss;
    stats.val_acc = accuracy(eval_fwd.logits, g.labels, g.val_idx);
    report.epochs.push_back(stats);

    if (stats.val_loss < best.val_loss) {
      best.val_loss = stats.val_loss;
      best.epoch = epoch;
      best.mixer_params = model.params;
      best.filter = filter;
      best.patches = ps;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
    }
  }

  TrainResult result;
  result.model.cfg = cfg;
  result.model.mixer = std::move(model);
  result.model.mixer.params = best.mixer_params;
  result.model.filter = best.filter;
  result.model.patch_filter = best.filter;
  result.model.patches = best.patches;
  result.model.soft_weighted = adaptive;

  report.best_epoch = best.epoch;
  report.best_val_loss = best.val_loss;
  const EvalResult test = evaluate(result.model, g, result.model.patches, g.test_idx);
  report.test_acc = test.acc;
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.report = report;
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ParamError("config: lr must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ParamError("config: dropout must be in [0,1)");
  if (patience > max_epochs) throw ParamError("config: patience must not exceed max_epochs");
  if (patience < 1) throw ParamError("config: patience must be >= 1");
  if (max_epochs < 1) throw ParamError("config: max_epochs must be >= 1");
  if (patch_size < 1) throw ParamError("config: patch_size must be >= 1");
  if (filter_order < 1) throw ParamError("config: filter_order must be >= 1");
  if (ppr_c < 0.0 || ppr_c >= 1.0) throw ParamError("config: ppr_c must be in [0,1)");
  if (neumann_k < 0) throw ParamError("config: neumann_k must be >= 0");
  if (layers < 0) throw ParamError("config: layers must be >= 0");
  if (hidden < 1) throw ParamError("config: hidden must be >= 1");
  if (refresh_interval < 0) throw ParamError("config: refresh_interval must be >= 0");
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               double lr, double weight_decay, double beta1, double beta2, double eps_opt) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw ShapeError("adam_step: buffer size mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + weight_decay * params[i];
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_opt);
  }
}

PolyFilter initial_filter(int order, std::size_t n, const TrainConfig& cfg) {
  PolyFilter f = make_poly_filter(order, n, cfg.filter_activation);
  f.apply_activation_in_relevance = cfg.apply_activation_in_relevance;
  f.shared_weights = cfg.shared_filter_weights;
  for (std::size_t i = 0; i < n; ++i) f.weights[0][i] = 1.0;
  return f;
}

TrainResult train(const Graph& g, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.patch_size > g.num_nodes) throw SizeError("train: patch_size exceeds node count");
  const NormalizedAdjacency a = normalize_adjacency(g, cfg.norm_mode);

  if (cfg.patcher == PatcherChoice::fast) {
    PatchSet ps = fast_patch(a, cfg.ppr_c, cfg.neumann_k, cfg.patch_size);
    PolyFilter f = initial_filter(cfg.filter_order, g.num_nodes, cfg);
    return train_impl(g, cfg, std::move(ps), nullptr, std::move(f), false);
  }

  const SpectralDecomposition dec = eigendecompose(a);
  PolyFilter f = initial_filter(cfg.filter_order, g.num_nodes, cfg);
  PatchSet ps = spectral_patch(dec, f, cfg.patch_size);
  const bool adaptive = cfg.patcher == PatcherChoice::spectral;
  return train_impl(g, cfg, std::move(ps), &dec, std::move(f), adaptive);
}

TrainResult train_with_patches(const Graph& g, const TrainConfig& cfg, const PatchSet& ps) {
  cfg.validate();
  if (static_cast<int>(ps.size()) != g.num_nodes)
    throw ShapeError("train_with_patches: patch set does not match graph");
  PolyFilter f = initial_filter(cfg.filter_order, g.num_nodes, cfg);
  return train_impl(g, cfg, ps, nullptr, std::move(f), false);
}

TrainResult train_low_pass_baseline(const Graph& g, const TrainConfig& cfg) {
  cfg.validate();
  const NormalizedAdjacency a = normalize_adjacency(g, cfg.norm_mode);
  Graph smoothed = g;
  smoothed.features = low_pass_smooth_features(g.features, a);

  PatchSet self;
  self.p = 1;
  self.mode = PatchMode::spectral;
  self.indices.assign(g.num_nodes, std::vector<int>(1));
  self.scores.assign(g.num_nodes, Vec(1, 1.0));
  for (int v = 0; v < g.num_nodes; ++v) self.indices[v][0] = v;

  TrainConfig cfg1 = cfg;
  cfg1.patch_size = 1;
  return train_with_patches(smoothed, cfg1, self);
}

EvalResult evaluate(const TrainedModel& tm, const Graph& g, const PatchSet& ps,
                    const std::vector<int>& split) {
  if (split.empty()) throw DegenerateError("evaluate: empty split");
  if (ps.p != tm.mixer.cfg.patch_size) throw ShapeError("evaluate: patch size mismatch");
  const std::vector<Matrix> raw = extract_patches(g, ps);
  const std::vector<Matrix> inputs = build_inputs(raw, ps, tm.soft_weighted);
  ForwardResult fwd = mixer_forward(inputs, tm.mixer, false, 0);
  EvalResult out;
  out.loss = cross_entropy(fwd.logits, g.labels, split).loss;
  out.acc = accuracy(fwd.logits, g.labels, split);
  return out;
}

AblationResult ranked_vs_random_ablation(const Graph& g, const TrainConfig& cfg, int trials) {
  if (trials < 1) throw ParamError("ranked_vs_random_ablation: trials must be >= 1");
  cfg.validate();

  const NormalizedAdjacency a = normalize_adjacency(g, cfg.norm_mode);
  PatchSet ps;
  if (cfg.patcher == PatcherChoice::fast) {
    ps = fast_patch(a, cfg.ppr_c, cfg.neumann_k, cfg.patch_size);
  } else {
    const SpectralDecomposition dec = eigendecompose(a);
    ps = spectral_patch(dec, initial_filter(cfg.filter_order, g.num_nodes, cfg), cfg.patch_size);
  }

  AblationResult res;
  for (int trial = 0; trial < trials; ++trial) {
    TrainConfig trial_cfg = cfg;
    trial_cfg.seed = splitmix64(cfg.seed ^ (0x7472ULL + static_cast<std::uint64_t>(trial)));
    res.acc_ranked += train_with_patches(g, trial_cfg, ps).report.test_acc;

    PatchSet shuffled = ps;
    for (std::size_t v = 0; v < shuffled.size(); ++v) {
      Rng rng = Rng::derived(trial_cfg.seed, 0x53485546ULL + v);
      std::vector<int> perm(shuffled.p);
      for (int j = 0; j < shuffled.p; ++j) perm[j] = j;
      rng.shuffle(perm);
      std::vector<int> idx(shuffled.p);
      Vec sc(shuffled.p);
      for (int j = 0; j < shuffled.p; ++j) {
        idx[j] = shuffled.indices[v][perm[j]];
        sc[j] = shuffled.scores[v][perm[j]];
      }
      shuffled.indices[v] = std::move(idx);
      shuffled.scores[v] = std::move(sc);
    }
    res.acc_random += train_with_patches(g, trial_cfg, shuffled).report.test_acc;
  }
  res.acc_ranked /= trials;
  res.acc_random /= trials;
  return res;
}

Matrix low_pass_smooth_features(const Matrix& features, const NormalizedAdjacency& a) {
  const std::size_t n = a.a.rows;
  if (features.rows != n) throw ShapeError("low_pass_smooth_features: dimension mismatch");
  Matrix system(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) system.at(i, j) = (i == j ? 2.0 : 0.0) - a.a.at(i, j);
  const Cholesky chol(system);
  Matrix out(n, features.cols);
  Vec rhs(n);
  for (std::size_t c = 0; c < features.cols; ++c) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] = features.at(i, c);
    const Vec sol = chol.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) out.at(i, c) = sol[i];
  }
  return out;
}

namespace {

void append_doubles(std::vector<double>& payload, const std::vector<double>& v) {
  payload.insert(payload.end(), v.begin(), v.end());
}

nlohmann::json mixer_config_json(const MixerConfig& mc) {
  nlohmann::json j;
  j["patch_size"] = mc.patch_size;
  j["feature_dim"] = mc.feature_dim;
  j["num_classes"] = mc.num_classes;
  j["layers"] = mc.layers;
  j["hidden_patch"] = mc.hidden_patch;
  j["hidden_feature"] = mc.hidden_feature;
  j["hidden_head"] = mc.hidden_head;
  j["dropout"] = mc.dropout;
  j["aggregation"] = to_string(mc.aggregation);
  j["nonlinearity"] = to_string(mc.nonlinearity);
  j["residual"] = mc.residual;
  j["patch_norm_axis"] = to_string(mc.patch_norm_axis);
  return j;
}

MixerConfig mixer_config_from_json(const nlohmann::json& j) {
  MixerConfig mc;
  mc.patch_size = j.at("patch_size").get<int>();
  mc.feature_dim = j.at("feature_dim").get<int>();
  mc.num_classes = j.at("num_classes").get<int>();
  mc.layers = j.at("layers").get<int>();
  mc.hidden_patch = j.at("hidden_patch").get<int>();
  mc.hidden_feature = j.at("hidden_feature").get<int>();
  mc.hidden_head = j.at("hidden_head").get<int>();
  mc.dropout = j.at("dropout").get<double>();
  mc.aggregation = aggregation_from_string(j.at("aggregation").get<std::string>());
  mc.nonlinearity = nonlinearity_from_string(j.at("nonlinearity").get<std::string>());
  mc.residual = j.at("residual").get<bool>();
  mc.patch_norm_axis = patch_norm_axis_from_string(j.at("patch_norm_axis").get<std::string>());
  return mc;
}

nlohmann::json filter_json(const PolyFilter& f) {
  nlohmann::json j;
  j["order"] = f.order();
  j["n"] = f.weights.empty() ? 0 : f.weights[0].size();
  j["activation"] = to_string(f.activation);
  j["apply_activation_in_relevance"] = f.apply_activation_in_relevance;
  j["shared_weights"] = f.shared_weights;
  return j;
}

PolyFilter filter_from_json(const nlohmann::json& j) {
  PolyFilter f = make_poly_filter(j.at("order").get<int>(), j.at("n").get<std::size_t>(),
                                  activation_from_string(j.at("activation").get<std::string>()));
  f.apply_activation_in_relevance = j.at("apply_activation_in_relevance").get<bool>();
  f.shared_weights = j.at("shared_weights").get<bool>();
  return f;
}

}  // namespace

void save_checkpoint(const TrainedModel& tm, const std::string& path) {
  nlohmann::json header;
  header["format"] = "herofilter-checkpoint-v1";
  header["mixer"] = mixer_config_json(tm.mixer.cfg);
  header["mixer"]["init_seed"] = tm.mixer.init_seed;
  header["train_config"] = train_config_json(tm.cfg);
  header["filter"] = filter_json(tm.filter);
  header["patch_filter"] = filter_json(tm.patch_filter);
  header["patches"]["n"] = tm.patches.size();
  header["patches"]["p"] = tm.patches.p;
  header["patches"]["mode"] = tm.patches.mode == PatchMode::fast ? "fast" : "spectral";
  header["soft_weighted"] = tm.soft_weighted;

  std::vector<double> payload;
  append_doubles(payload, tm.mixer.params);
  append_doubles(payload, flatten_filter(tm.filter));
  append_doubles(payload, flatten_filter(tm.patch_filter));
  for (const auto& row : tm.patches.indices)
    for (int idx : row) payload.push_back(static_cast<double>(idx));
  for (const auto& row : tm.patches.scores) append_doubles(payload, row);
  header["payload_doubles"] = payload.size();

  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw IoError("checkpoint write failed: " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len == 0 || len > (1ULL << 30)) throw FormatError("corrupt checkpoint header");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw FormatError("corrupt checkpoint header");
  nlohmann::json header = nlohmann::json::parse(text, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "herofilter-checkpoint-v1")
    throw FormatError("not a herofilter checkpoint: " + path);

  TrainedModel tm;
  const MixerConfig mc = mixer_config_from_json(header.at("mixer"));
  tm.mixer = init_mixer(mc, header.at("mixer").at("init_seed").get<std::uint64_t>());
  tm.cfg = TrainConfig{};
  apply_config_json(header.at("train_config"), tm.cfg);
  tm.filter = filter_from_json(header.at("filter"));
  tm.patch_filter = filter_from_json(header.at("patch_filter"));
  tm.soft_weighted = header.at("soft_weighted").get<bool>();

  const std::size_t n = header.at("patches").at("n").get<std::size_t>();
  const int p = header.at("patches").at("p").get<int>();
  tm.patches.p = p;
  tm.patches.mode =
      header.at("patches").at("mode").get<std::string>() == "fast" ? PatchMode::fast
                                                                   : PatchMode::spectral;

  const std::size_t expected = header.at("payload_doubles").get<std::size_t>();
  std::vector<double> payload(expected);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  if (!in) throw FormatError("checkpoint payload truncated");

  std::size_t cursor = 0;
  auto take = [&](std::size_t count) {
    if (cursor + count > payload.size()) throw FormatError("checkpoint payload too small");
    const std::size_t at = cursor;
    cursor += count;
    return at;
  };

  const std::size_t mix_at = take(tm.mixer.params.size());
  std::copy(payload.begin() + mix_at, payload.begin() + mix_at + tm.mixer.params.size(),
            tm.mixer.params.begin());

  std::vector<double> flat(static_cast<std::size_t>(tm.filter.order()) *
                           (tm.filter.weights.empty() ? 0 : tm.filter.weights[0].size()));
  std::size_t at = take(flat.size());
  std::copy(payload.begin() + at, payload.begin() + at + flat.size(), flat.begin());
  unflatten_filter(flat, tm.filter);
  at = take(flat.size());
  std::copy(payload.begin() + at, payload.begin() + at + flat.size(), flat.begin());
  unflatten_filter(flat, tm.patch_filter);

  tm.patches.indices.assign(n, std::vector<int>(p));
  tm.patches.scores.assign(n, Vec(p));
  for (std::size_t v = 0; v < n; ++v)
    for (int j = 0; j < p; ++j)
      tm.patches.indices[v][j] = static_cast<int>(payload[take(1)]);
  for (std::size_t v = 0; v < n; ++v)
    for (int j = 0; j < p; ++j) tm.patches.scores[v][j] = payload[take(1)];
  return tm;
}

}  // namespace herofilter
