#include <filesystem>
#include <cmath>

#include "doctest.h"
#include "herofilter/errors.hpp"
#include "herofilter/rng.hpp"
#include "herofilter/synthbench.hpp"
#include "herofilter/training.hpp"
#include "test_util.hpp"

using namespace herofilter;

namespace {

SynthSpec toy_spec(double h, std::uint64_t seed) {
  SynthSpec spec;
  spec.num_nodes = 60;
  spec.num_classes = 2;
  spec.target_h = h;
  spec.avg_degree = 4.0;
  spec.feature_dim = 2;
  spec.feature_noise = 0.1;
  spec.seed = seed;
  return spec;
}

TrainConfig quick_cfg(std::uint64_t seed, int epochs = 120) {
  TrainConfig cfg;
  cfg.max_epochs = epochs;
  cfg.patience = std::min(50, epochs);
  cfg.patch_size = 4;
  cfg.hidden = 16;
  cfg.dropout = 0.2;
  cfg.patcher = PatcherChoice::fast;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("adam_step") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<double> params = {1.0, -2.0};
    AdamState st{Vec(2, 0.0), Vec(2, 0.0), 0};
    adam_step(params, {0.0, 0.0}, st, 0.01, 0.0);
    CHECK(params == std::vector<double>{1.0, -2.0});
  }
  SUBCASE("first step approximates a signed step of size lr") {
    std::vector<double> params = {0.0, 0.0};
    AdamState st{Vec(2, 0.0), Vec(2, 0.0), 0};
    adam_step(params, {3.0, -0.2}, st, 0.01, 0.0);
    CHECK(params[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(params[1] == doctest::Approx(0.01).epsilon(1e-4));
  }
  SUBCASE("matches a hand-rolled scalar reference over two steps") {
    const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double theta = 0.7, m = 0.0, v = 0.0;
    const double grads[2] = {0.4, -1.3};
    std::vector<double> params = {0.7};
    AdamState st{Vec(1, 0.0), Vec(1, 0.0), 0};
    for (int t = 1; t <= 2; ++t) {
      const double g = grads[t - 1];
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g * g;
      const double mh = m / (1 - std::pow(b1, t));
      const double vh = v / (1 - std::pow(b2, t));
      theta -= lr * mh / (std::sqrt(vh) + eps);
      adam_step(params, {g}, st, lr, 0.0);
      CHECK(params[0] == doctest::Approx(theta).epsilon(1e-12));
    }
  }
  SUBCASE("weight decay couples into the gradient") {
    std::vector<double> params = {2.0};
    AdamState st{Vec(1, 0.0), Vec(1, 0.0), 0};
    adam_step(params, {0.0}, st, 0.01, 0.1);
    // Effective gradient 0.2 > 0 pulls the parameter down.
    CHECK(params[0] < 2.0);
  }
  SUBCASE("zero learning rate freezes parameters") {
    std::vector<double> params = {1.0};
    AdamState st{Vec(1, 0.0), Vec(1, 0.0), 0};
    for (int t = 0; t < 5; ++t) adam_step(params, {0.7}, st, 0.0, 5e-4);
    CHECK(params[0] == 1.0);
  }
  SUBCASE("buffer size mismatch") {
    std::vector<double> params = {1.0};
    AdamState st{Vec(2, 0.0), Vec(2, 0.0), 0};
    CHECK_THROWS_AS(adam_step(params, {0.1}, st, 0.01, 0.0), ShapeError);
  }
}

TEST_CASE("train on a linearly separable toy graph reaches full accuracy") {
  const Graph g = synth_graph(toy_spec(0.0, 5));
  TrainConfig cfg = quick_cfg(1, 500);
  cfg.dropout = 0.5;  // defaults-flavored run; task is easy enough
  const TrainResult res = train(g, cfg);
  CHECK(res.report.test_acc == 1.0);
  CHECK(static_cast<int>(res.report.epochs.size()) <= 500);

  // evaluate() must agree with the reported accuracy exactly.
  const EvalResult ev = evaluate(res.model, g, res.model.patches, g.test_idx);
  CHECK(ev.acc == res.report.test_acc);
}

TEST_CASE("training is deterministic under a fixed config and seed") {
  const Graph g = synth_graph(toy_spec(0.4, 9));
  const TrainConfig cfg = quick_cfg(7, 40);
  const TrainResult a = train(g, cfg);
  const TrainResult b = train(g, cfg);
  CHECK(a.report.best_epoch == b.report.best_epoch);
  CHECK(a.report.test_acc == b.report.test_acc);
  REQUIRE(a.report.epochs.size() == b.report.epochs.size());
  for (std::size_t e = 0; e < a.report.epochs.size(); ++e) {
    CHECK(a.report.epochs[e].train_loss == b.report.epochs[e].train_loss);
    CHECK(a.report.epochs[e].val_loss == b.report.epochs[e].val_loss);
  }
  CHECK(a.model.mixer.params == b.model.mixer.params);
}

TEST_CASE("early stopping") {
  const Graph g = synth_graph(toy_spec(0.5, 21));
  SUBCASE("never runs past patience epochs after the best") {
    TrainConfig cfg = quick_cfg(3, 80);
    cfg.patience = 10;
    const TrainResult res = train(g, cfg);
    const int last = static_cast<int>(res.report.epochs.size());
    CHECK(last <= 80);
    if (last < 80) CHECK(last == res.report.best_epoch + 10);
    // best_epoch carries the minimal recorded val_loss.
    double best = res.report.epochs[res.report.best_epoch - 1].val_loss;
    for (const EpochStats& s : res.report.epochs) CHECK(best <= s.val_loss);
    CHECK(res.report.best_val_loss == best);
  }
  SUBCASE("patience one with an immediately worsening val loss stops at epoch two") {
    // A huge learning rate overshoots right away, so val loss rises from
    // epoch 1 and patience 1 cuts the run at epoch 2.
    TrainConfig cfg = quick_cfg(3, 50);
    cfg.lr = 50.0;
    cfg.patience = 1;
    cfg.dropout = 0.0;
    const TrainResult res = train(g, cfg);
    REQUIRE(res.report.epochs.size() >= 2);
    if (res.report.epochs[1].val_loss > res.report.epochs[0].val_loss) {
      CHECK(res.report.epochs.size() == 2);
      CHECK(res.report.best_epoch == 1);
    }
  }
}

TEST_CASE("non-finite loss raises NumericalError with the epoch index") {
  const Graph g = synth_graph(toy_spec(0.5, 30));
  TrainConfig cfg = quick_cfg(3, 30);
  cfg.lr = 1e80;  // parameters explode, logits overflow on epoch 2
  cfg.dropout = 0.0;
  try {
    train(g, cfg);
    CHECK(false);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("first optimizer step decreases the training loss for most seeds") {
  const Graph g = synth_graph(toy_spec(0.6, 41));
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TrainConfig cfg = quick_cfg(seed, 2);
    cfg.dropout = 0.0;  // smooth model
    cfg.patience = 2;
    const TrainResult res = train(g, cfg);
    REQUIRE(res.report.epochs.size() >= 2);
    if (res.report.epochs[1].train_loss >= res.report.epochs[0].train_loss) ++failures;
  }
  CHECK(failures <= 2);
}

TEST_CASE("evaluate") {
  const Graph g = synth_graph(toy_spec(0.5, 50));
  SUBCASE("zeroed model predicts class zero everywhere") {
    TrainConfig cfg = quick_cfg(2, 6);
    cfg.patience = 6;
    TrainResult res = train(g, cfg);
    std::fill(res.model.mixer.params.begin(), res.model.mixer.params.end(), 0.0);
    const EvalResult ev = evaluate(res.model, g, res.model.patches, g.test_idx);
    int zeros = 0;
    for (int v : g.test_idx) zeros += g.labels[v] == 0 ? 1 : 0;
    CHECK(ev.acc == doctest::Approx(static_cast<double>(zeros) / g.test_idx.size()));
    CHECK(ev.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("empty split is degenerate") {
    TrainConfig cfg = quick_cfg(2, 4);
    cfg.patience = 4;
    const TrainResult res = train(g, cfg);
    CHECK_THROWS_AS(evaluate(res.model, g, res.model.patches, {}), DegenerateError);
  }
}

TEST_CASE("adaptive spectral mode trains the filter") {
  const Graph g = synth_graph(toy_spec(0.3, 60));
  TrainConfig cfg = quick_cfg(4, 25);
  cfg.patience = 25;
  cfg.patcher = PatcherChoice::spectral;
  cfg.refresh_interval = 10;
  const TrainResult res = train(g, cfg);
  CHECK(res.model.soft_weighted);
  // Filter weights moved away from the w1=1 initialization.
  const PolyFilter init = initial_filter(cfg.filter_order, g.num_nodes, cfg);
  double moved = 0.0;
  for (int k = 0; k < init.order(); ++k)
    for (int i = 0; i < g.num_nodes; ++i)
      moved = std::max(moved, std::fabs(res.model.filter.weights[k][i] - init.weights[k][i]));
  CHECK(moved > 1e-6);
  // Reported test accuracy reproduces through evaluate().
  const EvalResult ev = evaluate(res.model, g, res.model.patches, g.test_idx);
  CHECK(ev.acc == res.report.test_acc);
}

TEST_CASE("shared filter weights stay shared during adaptive training") {
  const Graph g = synth_graph(toy_spec(0.3, 61));
  TrainConfig cfg = quick_cfg(4, 12);
  cfg.patience = 12;
  cfg.patcher = PatcherChoice::spectral;
  cfg.shared_filter_weights = true;
  const TrainResult res = train(g, cfg);
  for (int k = 0; k < res.model.filter.order(); ++k)
    for (int i = 1; i < g.num_nodes; ++i)
      CHECK(res.model.filter.weights[k][i] == res.model.filter.weights[k][0]);
}

TEST_CASE("ranked_vs_random_ablation") {
  const Graph g = synth_graph(toy_spec(0.5, 70));
  SUBCASE("p = 1 leaves nothing to shuffle") {
    TrainConfig cfg = quick_cfg(11, 12);
    cfg.patience = 12;
    cfg.patch_size = 1;
    const AblationResult res = ranked_vs_random_ablation(g, cfg, 2);
    CHECK(res.acc_ranked == res.acc_random);
  }
  SUBCASE("deterministic given seeds") {
    TrainConfig cfg = quick_cfg(12, 10);
    cfg.patience = 10;
    const AblationResult a = ranked_vs_random_ablation(g, cfg, 2);
    const AblationResult b = ranked_vs_random_ablation(g, cfg, 2);
    CHECK(a.acc_ranked == b.acc_ranked);
    CHECK(a.acc_random == b.acc_random);
  }
  SUBCASE("trials must be positive") {
    CHECK_THROWS_AS(ranked_vs_random_ablation(g, quick_cfg(1), 0), ParamError);
  }
}

TEST_CASE("low-pass smoothing matches the spectral route") {
  const Graph g = testutil::random_graph(20, 0.2, 2, 3, 81);
  const NormalizedAdjacency a = normalize_adjacency(g);
  const Matrix smoothed = low_pass_smooth_features(g.features, a);
  const SpectralDecomposition dec = eigendecompose(a);
  const Matrix relevance = relevance_from_response(dec, low_pass_reference(dec.eigenvalues));
  // U diag(1/(2-lambda)) U^T X column by column.
  for (int c = 0; c < 3; ++c) {
    Vec col(20);
    for (int i = 0; i < 20; ++i) col[i] = g.features.at(i, c);
    const Vec expect = matvec(relevance, col);
    for (int i = 0; i < 20; ++i)
      CHECK(smoothed.at(i, c) == doctest::Approx(expect[i]).epsilon(1e-9));
  }
}

TEST_CASE("low-pass baseline trains and evaluates") {
  const Graph g = synth_graph(toy_spec(0.0, 90));
  TrainConfig cfg = quick_cfg(5, 80);
  cfg.patience = 80;
  const TrainResult res = train_low_pass_baseline(g, cfg);
  CHECK(res.model.mixer.cfg.patch_size == 1);
  CHECK(res.report.test_acc >= 0.5);  // h=0 smoothing keeps class means apart
}

TEST_CASE("checkpoint round trip preserves the model and its predictions") {
  const Graph g = synth_graph(toy_spec(0.4, 95));
  TrainConfig cfg = quick_cfg(6, 20);
  cfg.patience = 20;
  cfg.patcher = PatcherChoice::spectral;  // exercises soft weights + filters
  const TrainResult res = train(g, cfg);

  const std::string path =
      (std::filesystem::temp_directory_path() / "herofilter_test_ckpt.bin").string();
  save_checkpoint(res.model, path);
  const TrainedModel back = load_checkpoint(path);

  CHECK(back.mixer.params == res.model.mixer.params);
  CHECK(back.filter.weights == res.model.filter.weights);
  CHECK(back.patches.indices == res.model.patches.indices);
  CHECK(back.patches.scores == res.model.patches.scores);
  CHECK(back.soft_weighted == res.model.soft_weighted);

  const EvalResult ev = evaluate(back, g, back.patches, g.test_idx);
  CHECK(ev.acc == res.report.test_acc);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParamError);
  cfg = TrainConfig{};
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ParamError);
  cfg = TrainConfig{};
  cfg.patience = 1000;
  CHECK_THROWS_AS(cfg.validate(), ParamError);
  cfg = TrainConfig{};
  cfg.ppr_c = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ParamError);
}
