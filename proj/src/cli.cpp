#include "herofilter/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "herofilter/config_json.hpp"
#include "herofilter/errors.hpp"
#include "herofilter/heterophily.hpp"
#include "herofilter/patcher.hpp"
#include "herofilter/synthbench.hpp"
#include "herofilter/training.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace herofilter {

namespace {

void write_f17(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

void emit_effective_config(const json& cfg, const std::string& out_dir) {
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  write_json_file(cfg, fs::path(out_dir) / "effective_config.json");
}

struct FilterFlags {
  std::string kind = "lowpass";
  double band_lo = 0.0;
  double band_hi = 0.4;
  int order = 2;
};

void add_filter_flags(CLI::App* cmd, FilterFlags& flags) {
  cmd->add_option("--filter", flags.kind, "Spectral response: lowpass, band or poly")
      ->check(CLI::IsMember({"lowpass", "band", "poly"}))
      ->capture_default_str();
  cmd->add_option("--band-lo", flags.band_lo, "Band lower edge over Laplacian eigenvalues")
      ->capture_default_str();
  cmd->add_option("--band-hi", flags.band_hi, "Band upper edge")->capture_default_str();
  cmd->add_option("--order", flags.order, "Polynomial filter order")->capture_default_str();
}

Vec response_for(const FilterFlags& flags, const Vec& lambda, const TrainConfig& cfg) {
  if (flags.kind == "lowpass") return low_pass_reference(lambda);
  if (flags.kind == "band") return band_filter(lambda, flags.band_lo, flags.band_hi);
  TrainConfig fcfg = cfg;
  fcfg.filter_order = flags.order;
  return filter_response(initial_filter(flags.order, lambda.size(), fcfg), lambda);
}

// Lean flags for the patch and export-induced subcommands.
struct PatchFlags {
  int patch_size = 8;
  double ppr_c = 0.5;
  int neumann_k = 20;
  bool selfloop = false;
  std::uint64_t seed = 0;
};

void add_patch_flags(CLI::App* cmd, PatchFlags& f) {
  cmd->add_option("--p", f.patch_size, "Patch size")->capture_default_str();
  cmd->add_option("--c", f.ppr_c, "PPR dangling scalar")->capture_default_str();
  cmd->add_option("--neumann-k", f.neumann_k, "Neumann truncation order")
      ->capture_default_str();
  cmd->add_flag("--selfloop", f.selfloop, "Add self-loops before normalization");
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
}

TrainConfig patch_flags_config(const PatchFlags& f) {
  TrainConfig cfg;
  cfg.patch_size = f.patch_size;
  cfg.ppr_c = f.ppr_c;
  cfg.neumann_k = f.neumann_k;
  cfg.norm_mode = f.selfloop ? NormMode::sym_selfloop : NormMode::sym;
  cfg.seed = f.seed;
  return cfg;
}

json filter_flags_json(const FilterFlags& flags) {
  json j;
  j["filter"] = flags.kind;
  if (flags.kind == "band") {
    j["band_lo"] = flags.band_lo;
    j["band_hi"] = flags.band_hi;
  }
  if (flags.kind == "poly") j["order"] = flags.order;
  return j;
}

// Per-flag overrides applied on top of defaults and --config.
struct TrainFlagBinding {
  CLI::Option* opt = nullptr;
  std::function<void(TrainConfig&)> apply;
};

struct TrainFlags {
  double lr = 0.01;
  double weight_decay = 5e-4;
  int max_epochs = 500;
  int patience = 50;
  int hidden = 64;
  double dropout = 0.5;
  int layers = 2;
  int patch_size = 8;
  int filter_order = 2;
  std::string patcher = "static";
  int refresh_interval = 0;
  std::uint64_t seed = 0;
  std::string aggregation = "mean";
  double ppr_c = 0.5;
  int neumann_k = 20;
  bool selfloop = false;
  bool residual = false;
  bool shared_filter = false;
  std::string patch_norm_axis = "feature";
  std::vector<TrainFlagBinding> bindings;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  auto bind = [&](CLI::Option* opt, std::function<void(TrainConfig&)> apply) {
    f.bindings.push_back(TrainFlagBinding{opt, std::move(apply)});
  };
  bind(cmd->add_option("--lr", f.lr, "Learning rate")->capture_default_str(),
       [&f](TrainConfig& c) { c.lr = f.lr; });
  bind(cmd->add_option("--weight-decay", f.weight_decay, "L2 weight decay")
           ->capture_default_str(),
       [&f](TrainConfig& c) { c.weight_decay = f.weight_decay; });
  bind(cmd->add_option("--max-epochs", f.max_epochs, "Epoch cap")->capture_default_str(),
       [&f](TrainConfig& c) { c.max_epochs = f.max_epochs; });
  bind(cmd->add_option("--patience", f.patience, "Early-stopping patience")
           ->capture_default_str(),
       [&f](TrainConfig& c) { c.patience = f.patience; });
  bind(cmd->add_option("--hidden", f.hidden, "Hidden width")->capture_default_str(),
       [&f](TrainConfig& c) { c.hidden = f.hidden; });
  bind(cmd->add_option("--dropout", f.dropout, "Dropout rate")->capture_default_str(),
       [&f](TrainConfig& c) { c.dropout = f.dropout; });
  bind(cmd->add_option("--layers", f.layers, "Mixer layer count")->capture_default_str(),
       [&f](TrainConfig& c) { c.layers = f.layers; });
  bind(cmd->add_option("--patch-size", f.patch_size, "Patch size p")->capture_default_str(),
       [&f](TrainConfig& c) { c.patch_size = f.patch_size; });
  bind(cmd->add_option("--filter-order", f.filter_order, "Polynomial order K")
           ->capture_default_str(),
       [&f](TrainConfig& c) { c.filter_order = f.filter_order; });
  bind(cmd->add_option("--mode", f.patcher, "Patcher: spectral, fast or static")
           ->check(CLI::IsMember({"spectral", "fast", "static"}))
           ->capture_default_str(),
       [&f](TrainConfig& c) { c.patcher = patcher_from_string(f.patcher); });
  bind(cmd->add_option("--refresh-interval", f.refresh_interval,
                       "Epochs between patch refreshes (0 = never)")
           ->capture_default_str(),
       [&f](TrainConfig& c) { c.refresh_interval = f.refresh_interval; });
  bind(cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str(),
       [&f](TrainConfig& c) { c.seed = f.seed; });
  bind(cmd->add_option("--aggregation", f.aggregation, "Patch aggregation")
           ->check(CLI::IsMember({"mean", "sum", "flatten"}))
           ->capture_default_str(),
       [&f](TrainConfig& c) { c.aggregation = aggregation_from_string(f.aggregation); });
  bind(cmd->add_option("--c", f.ppr_c, "PPR dangling scalar")->capture_default_str(),
       [&f](TrainConfig& c) { c.ppr_c = f.ppr_c; });
  bind(cmd->add_option("--neumann-k", f.neumann_k, "Neumann truncation order")
           ->capture_default_str(),
       [&f](TrainConfig& c) { c.neumann_k = f.neumann_k; });
  bind(cmd->add_flag("--selfloop", f.selfloop, "Add self-loops before normalization"),
       [&f](TrainConfig& c) {
         c.norm_mode = f.selfloop ? NormMode::sym_selfloop : NormMode::sym;
       });
  bind(cmd->add_flag("--residual", f.residual, "Residual connections in the mixer"),
       [&f](TrainConfig& c) { c.residual = f.residual; });
  bind(cmd->add_option("--patch-norm-axis", f.patch_norm_axis,
                       "Axis normalized before patch mixing: feature or patch")
           ->check(CLI::IsMember({"feature", "patch"}))
           ->capture_default_str(),
       [&f](TrainConfig& c) { c.patch_norm_axis = patch_norm_axis_from_string(f.patch_norm_axis); });
  bind(cmd->add_flag("--shared-filter", f.shared_filter,
                     "Share filter weights across eigen indices"),
       [&f](TrainConfig& c) { c.shared_filter_weights = f.shared_filter; });
}

TrainConfig resolve_train_config(const TrainFlags& flags, const std::string& config_path) {
  TrainConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot read config file: " + config_path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw FormatError("invalid JSON in config file: " + config_path);
    apply_config_json(j, cfg);
  }
  for (const auto& binding : flags.bindings)
    if (binding.opt->count() > 0) binding.apply(cfg);
  return cfg;
}

void write_metrics_csv(const TrainReport& report, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,train_loss,val_loss,val_acc\n";
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    out << (e + 1) << ",";
    write_f17(out, report.epochs[e].train_loss);
    out << ",";
    write_f17(out, report.epochs[e].val_loss);
    out << ",";
    write_f17(out, report.epochs[e].val_acc);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

json report_json(const TrainReport& report) {
  json j;
  j["best_epoch"] = report.best_epoch;
  j["best_val_loss"] = report.best_val_loss;
  j["test_acc"] = report.test_acc;
  j["epochs_run"] = report.epochs.size();
  j["wall_time_sec"] = report.wall_time_sec;
  return j;
}

void write_patches_csv(const PatchSet& ps, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t v = 0; v < ps.size(); ++v) {
    out << v;
    for (int idx : ps.indices[v]) out << "," << idx;
    for (double s : ps.scores[v]) {
      out << ",";
      write_f17(out, s);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_edges_csv(const std::vector<Edge>& edges, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (auto [u, v] : edges) out << u << "," << v << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<Band> parse_band_list(const std::string& csv) {
  std::vector<Band> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ParamError("band must look like lo:hi, got " + tok);
    out.push_back(Band{std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1))});
  }
  return out;
}

PatchSet build_patchset(const Graph& g, const TrainConfig& cfg, const FilterFlags* filter_flags,
                        const std::string& mode) {
  const NormalizedAdjacency a = normalize_adjacency(g, cfg.norm_mode);
  if (mode == "fast") return fast_patch(a, cfg.ppr_c, cfg.neumann_k, cfg.patch_size);
  const SpectralDecomposition dec = eigendecompose(a);
  if (filter_flags && filter_flags->kind != "poly") {
    const Vec response = response_for(*filter_flags, dec.eigenvalues, cfg);
    PatchSet ps = top_p_columns(relevance_from_response(dec, response), cfg.patch_size);
    ps.mode = PatchMode::spectral;
    return ps;
  }
  const int order = filter_flags ? filter_flags->order : cfg.filter_order;
  return spectral_patch(dec, initial_filter(order, g.num_nodes, cfg), cfg.patch_size);
}

int cmd_synth(const SynthSpec& spec, const std::string& out_dir) {
  const Graph g = synth_graph(spec);
  save_dataset(g, out_dir);
  json cfg;
  cfg["command"] = "synth";
  cfg["n"] = spec.num_nodes;
  cfg["classes"] = spec.num_classes;
  cfg["heterophily"] = spec.target_h;
  cfg["avg_degree"] = spec.avg_degree;
  cfg["feature_dim"] = spec.feature_dim;
  cfg["noise"] = spec.feature_noise;
  cfg["seed"] = spec.seed;
  emit_effective_config(cfg, out_dir);
  const Vec h = node_heterophily(g);
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= g.num_nodes;
  json summary;
  summary["num_nodes"] = g.num_nodes;
  summary["num_edges"] = g.num_edges();
  summary["mean_h"] = mean;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_analyze(const std::string& data_dir, const FilterFlags& filter_flags, bool selfloop,
                const std::string& out_dir) {
  const Graph g = load_dataset(data_dir);
  const NormalizedAdjacency a =
      normalize_adjacency(g, selfloop ? NormMode::sym_selfloop : NormMode::sym);
  const SpectralDecomposition dec = eigendecompose(a);
  const HeterophilyProfile prof = heterophily_profile(g, dec);
  const Vec response = response_for(filter_flags, dec.eigenvalues, TrainConfig{});

  json report;
  report["num_nodes"] = g.num_nodes;
  report["num_edges"] = g.num_edges();
  report["num_classes"] = g.num_classes;
  report["feature_dim"] = g.feature_dim();
  report["mean_h"] = prof.mean_h;
  report["lambda_min"] = dec.eigenvalues.empty() ? 0.0 : dec.eigenvalues.front();
  report["lambda_max"] = dec.eigenvalues.empty() ? 0.0 : dec.eigenvalues.back();
  report.update(filter_flags_json(filter_flags));

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_json_file(report, fs::path(out_dir) / "analysis.json");
    std::ofstream out(fs::path(out_dir) / "spectrum.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write spectrum.csv");
    out << "index,lambda_adj,lambda_lap,filter_response\n";
    for (std::size_t i = 0; i < dec.size(); ++i) {
      out << i << ",";
      write_f17(out, dec.eigenvalues[i]);
      out << ",";
      write_f17(out, 1.0 - dec.eigenvalues[i]);
      out << ",";
      write_f17(out, response[i]);
      out << "\n";
    }
    json cfg = filter_flags_json(filter_flags);
    cfg["command"] = "analyze";
    cfg["selfloop"] = selfloop;
    emit_effective_config(cfg, out_dir);
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_bounds(const std::string& data_dir, const FilterFlags& filter_flags, bool selfloop,
               double eps, const std::string& out_dir) {
  const Graph g = load_dataset(data_dir);
  const NormalizedAdjacency a =
      normalize_adjacency(g, selfloop ? NormMode::sym_selfloop : NormMode::sym);
  const SpectralDecomposition dec = eigendecompose(a);
  const HeterophilyProfile prof = heterophily_profile(g, dec);

  json report;
  {
    const Vec response = response_for(filter_flags, dec.eigenvalues, TrainConfig{});
    const Prop1Result p1 = check_prop1(response, prof.h_hat, eps);
    json j;
    j["lhs"] = p1.report.lhs;
    j["rhs"] = p1.report.rhs;
    j["amgm_holds"] = p1.amgm_holds;
    j["excluded"] = p1.report.excluded_indices;
    j["holds"] = p1.report.holds;
    j["notes"] = p1.report.notes;
    report["prop1"] = j;
  }
  {
    json j;
    try {
      const AlignResult align = construct_aligning_weights(g.labels, dec.eigenvalues, 2);
      j["alignment"] = align.alignment;
    } catch (const Error& e) {
      j["alignment"] = nullptr;
      j["skipped"] = e.what();
    }
    report["prop2"] = j;
  }
  {
    json j;
    try {
      const TheoremInstance inst = build_theorem_instance(g);
      const Vec g_lap = response_for(filter_flags, inst.dec.eigenvalues, TrainConfig{});
      const Theorem1Check check = evaluate_theorem1(g_lap, inst.dec, inst.x0, inst.x1, inst.y0,
                                                    inst.y1, inst.h_hat, eps);
      j["error"] = check.error.er_bar;
      j["bound"] = check.bound.report.lhs;
      j["holds"] = check.bound.report.holds;
      j["c1"] = check.bound.c1;
      j["denominator_ok"] = check.bound.denominator_ok;
      j["notes"] = check.bound.report.notes;
      if (inst.truncated) j["truncated_pairing"] = true;
    } catch (const Error& e) {
      j["skipped"] = e.what();
      j["c1"] = 0.25 + 217.0 / 2304.0 + 1.0 / ((1.0 + M_E) * (1.0 + M_E));
    }
    report["theorem"] = j;
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_json_file(report, fs::path(out_dir) / "bounds.json");
    json cfg = filter_flags_json(filter_flags);
    cfg["command"] = "bounds";
    cfg["selfloop"] = selfloop;
    cfg["eps"] = eps;
    emit_effective_config(cfg, out_dir);
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"HeroFilter: adaptive spectral patch filtering toolkit"};
  app.require_subcommand(1);

  // synth
  SynthSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--n", synth_spec.num_nodes, "Node count")->capture_default_str();
  synth->add_option("--classes", synth_spec.num_classes, "Class count")->capture_default_str();
  synth->add_option("--heterophily", synth_spec.target_h, "Target mean node heterophily")
      ->capture_default_str();
  synth->add_option("--avg-degree", synth_spec.avg_degree, "Average degree")
      ->capture_default_str();
  synth->add_option("--feature-dim", synth_spec.feature_dim, "Feature dimension")
      ->capture_default_str();
  synth->add_option("--noise", synth_spec.feature_noise, "Feature noise sigma")
      ->capture_default_str();
  synth->add_option("--seed", synth_spec.seed, "RNG seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output dataset directory")->required();

  // analyze
  std::string analyze_data, analyze_out;
  FilterFlags analyze_filter;
  bool analyze_selfloop = false;
  auto* analyze = app.add_subcommand("analyze", "Spectrum and heterophily report");
  analyze->add_option("--data", analyze_data, "Dataset directory")->required();
  analyze->add_option("--out", analyze_out, "Output directory");
  analyze->add_flag("--selfloop", analyze_selfloop, "Add self-loops before normalization");
  add_filter_flags(analyze, analyze_filter);

  // patch
  std::string patch_data, patch_out, patch_mode = "spectral";
  FilterFlags patch_filter;
  PatchFlags patch_flags;
  auto* patch = app.add_subcommand("patch", "Extract patches and scores");
  patch->add_option("--data", patch_data, "Dataset directory")->required();
  patch->add_option("--out", patch_out, "Output directory")->required();
  patch->add_option("--mode", patch_mode, "spectral or fast")
      ->check(CLI::IsMember({"spectral", "fast"}))
      ->capture_default_str();
  add_filter_flags(patch, patch_filter);
  add_patch_flags(patch, patch_flags);

  // train
  std::string train_data, train_out, train_config_path;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train the mixer");
  train_cmd->add_option("--data", train_data, "Dataset directory")->required();
  train_cmd->add_option("--out", train_out, "Run output directory")->required();
  train_cmd->add_option("--config", train_config_path, "JSON config file");
  add_train_flags(train_cmd, train_flags);

  // eval
  std::string eval_data, eval_model, eval_split = "test", eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--data", eval_data, "Dataset directory")->required();
  eval_cmd->add_option("--model", eval_model, "Checkpoint path")->required();
  eval_cmd->add_option("--split", eval_split, "train, val or test")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Output directory");

  // bounds
  std::string bounds_data, bounds_out;
  FilterFlags bounds_filter;
  bool bounds_selfloop = false;
  double bounds_eps = 1e-9;
  auto* bounds = app.add_subcommand("bounds", "Numerical proposition/theorem report");
  bounds->add_option("--data", bounds_data, "Dataset directory")->required();
  bounds->add_option("--out", bounds_out, "Output directory");
  bounds->add_option("--eps", bounds_eps, "Exclusion threshold for log terms")
      ->capture_default_str();
  bounds->add_flag("--selfloop", bounds_selfloop, "Add self-loops before normalization");
  add_filter_flags(bounds, bounds_filter);

  // sweep
  std::string sweep_h = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  std::string sweep_bands = "0:0.4,0.4:0.8,0.8:1.2,1.2:1.6,1.6:2";
  std::string sweep_out;
  int sweep_jobs = 0;
  SynthSpec sweep_spec;
  TrainFlags sweep_train_flags;
  auto* sweep = app.add_subcommand("sweep", "Heterophily x band accuracy grid");
  sweep->add_option("--heterophilies", sweep_h, "Comma list of target h values")
      ->capture_default_str();
  sweep->add_option("--bands", sweep_bands, "Comma list of lo:hi Laplacian bands")
      ->capture_default_str();
  sweep->add_option("--n", sweep_spec.num_nodes, "Nodes per cell graph")->capture_default_str();
  sweep->add_option("--classes", sweep_spec.num_classes, "Class count")->capture_default_str();
  sweep->add_option("--avg-degree", sweep_spec.avg_degree, "Average degree")
      ->capture_default_str();
  sweep->add_option("--feature-dim", sweep_spec.feature_dim, "Feature dimension")
      ->capture_default_str();
  sweep->add_option("--noise", sweep_spec.feature_noise, "Feature noise sigma")
      ->capture_default_str();
  sweep->add_option("--jobs", sweep_jobs, "Parallel cells (0 = auto)")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  add_train_flags(sweep, sweep_train_flags);

  // export-induced
  std::string induced_data, induced_out, induced_mode = "spectral";
  FilterFlags induced_filter;
  PatchFlags induced_flags;
  auto* induced = app.add_subcommand("export-induced", "Export the patch-induced graph");
  induced->add_option("--data", induced_data, "Dataset directory")->required();
  induced->add_option("--out", induced_out, "Output directory")->required();
  induced->add_option("--mode", induced_mode, "spectral or fast")
      ->check(CLI::IsMember({"spectral", "fast"}))
      ->capture_default_str();
  add_filter_flags(induced, induced_filter);
  add_patch_flags(induced, induced_flags);

  std::vector<const char*> argv;
  argv.push_back("herofilter");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
    if (analyze->parsed())
      return cmd_analyze(analyze_data, analyze_filter, analyze_selfloop, analyze_out);
    if (bounds->parsed())
      return cmd_bounds(bounds_data, bounds_filter, bounds_selfloop, bounds_eps, bounds_out);

    if (patch->parsed()) {
      const TrainConfig cfg = patch_flags_config(patch_flags);
      const Graph g = load_dataset(patch_data);
      const PatchSet ps = build_patchset(g, cfg, &patch_filter, patch_mode);
      fs::create_directories(patch_out);
      write_patches_csv(ps, fs::path(patch_out) / "patches.csv");
      json eff = train_config_json(cfg);
      eff["command"] = "patch";
      eff["mode"] = patch_mode;
      eff.update(filter_flags_json(patch_filter));
      emit_effective_config(eff, patch_out);
      return 0;
    }

    if (train_cmd->parsed()) {
      const TrainConfig cfg = resolve_train_config(train_flags, train_config_path);
      const Graph g = load_dataset(train_data);
      const TrainResult res = train(g, cfg);
      fs::create_directories(train_out);
      save_checkpoint(res.model, (fs::path(train_out) / "model.ckpt").string());
      write_metrics_csv(res.report, fs::path(train_out) / "metrics.csv");
      write_json_file(report_json(res.report), fs::path(train_out) / "report.json");
      json eff = train_config_json(cfg);
      eff["command"] = "train";
      emit_effective_config(eff, train_out);
      std::cout << report_json(res.report).dump(2) << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      const Graph g = load_dataset(eval_data);
      const TrainedModel tm = load_checkpoint(eval_model);
      const std::vector<int>& split = eval_split == "train" ? g.train_idx
                                      : eval_split == "val" ? g.val_idx
                                                            : g.test_idx;
      const EvalResult res = evaluate(tm, g, tm.patches, split);
      json out;
      out["split"] = eval_split;
      out["loss"] = res.loss;
      out["acc"] = res.acc;
      if (!eval_out.empty()) {
        fs::create_directories(eval_out);
        write_json_file(out, fs::path(eval_out) / "eval.json");
        json eff;
        eff["command"] = "eval";
        eff["split"] = eval_split;
        eff["model"] = eval_model;
        emit_effective_config(eff, eval_out);
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (sweep->parsed()) {
      const TrainConfig cfg = resolve_train_config(sweep_train_flags, "");
      sweep_spec.seed = cfg.seed;
      const std::vector<double> hs = parse_double_list(sweep_h);
      const std::vector<Band> bands = parse_band_list(sweep_bands);
      const SweepResult grid = heterophily_sweep(hs, bands, sweep_spec, cfg, sweep_jobs);
      fs::create_directories(sweep_out);
      write_sweep_csv(grid, (fs::path(sweep_out) / "sweep_grid.csv").string());
      json eff = train_config_json(cfg);
      eff["command"] = "sweep";
      eff["heterophilies"] = sweep_h;
      eff["bands"] = sweep_bands;
      eff["n"] = sweep_spec.num_nodes;
      eff["classes"] = sweep_spec.num_classes;
      eff["jobs"] = sweep_jobs;
      emit_effective_config(eff, sweep_out);
      return 0;
    }

    if (induced->parsed()) {
      const TrainConfig cfg = patch_flags_config(induced_flags);
      const Graph g = load_dataset(induced_data);
      const PatchSet ps = build_patchset(g, cfg, &induced_filter, induced_mode);
      const std::vector<Edge> edges = patch_induced_graph(ps);
      fs::create_directories(induced_out);
      write_edges_csv(edges, fs::path(induced_out) / "edges.csv");
      json eff = train_config_json(cfg);
      eff["command"] = "export-induced";
      eff["mode"] = induced_mode;
      eff.update(filter_flags_json(induced_filter));
      emit_effective_config(eff, induced_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}

}  // namespace herofilter
