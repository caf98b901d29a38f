#include "herofilter/config_json.hpp"

#include "herofilter/errors.hpp"

namespace herofilter {

std::string to_string(PatcherChoice p) {
  switch (p) {
    case PatcherChoice::spectral:
      return "spectral";
    case PatcherChoice::fast:
      return "fast";
    case PatcherChoice::fixed_filter:
      return "static";
  }
  return "static";
}

std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::mean:
      return "mean";
    case Aggregation::sum:
      return "sum";
    case Aggregation::flatten:
      return "flatten";
  }
  return "mean";
}

std::string to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::gelu:
      return "gelu";
    case Nonlinearity::relu:
      return "relu";
    case Nonlinearity::tanh:
      return "tanh";
  }
  return "gelu";
}

std::string to_string(NormMode m) {
  return m == NormMode::sym_selfloop ? "sym_selfloop" : "sym";
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity:
      return "identity";
    case Activation::tanh:
      return "tanh";
    case Activation::relu:
      return "relu";
  }
  return "tanh";
}

std::string to_string(PatchNormAxis a) {
  return a == PatchNormAxis::patch ? "patch" : "feature";
}

PatchNormAxis patch_norm_axis_from_string(const std::string& s) {
  if (s == "feature") return PatchNormAxis::feature;
  if (s == "patch") return PatchNormAxis::patch;
  throw ParamError("unknown patch norm axis: " + s);
}

PatcherChoice patcher_from_string(const std::string& s) {
  if (s == "spectral") return PatcherChoice::spectral;
  if (s == "fast") return PatcherChoice::fast;
  if (s == "static") return PatcherChoice::fixed_filter;
  throw ParamError("unknown patcher mode: " + s);
}

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "sum") return Aggregation::sum;
  if (s == "flatten") return Aggregation::flatten;
  throw ParamError("unknown aggregation: " + s);
}

Nonlinearity nonlinearity_from_string(const std::string& s) {
  if (s == "gelu") return Nonlinearity::gelu;
  if (s == "relu") return Nonlinearity::relu;
  if (s == "tanh") return Nonlinearity::tanh;
  throw ParamError("unknown nonlinearity: " + s);
}

NormMode norm_mode_from_string(const std::string& s) {
  if (s == "sym") return NormMode::sym;
  if (s == "sym_selfloop") return NormMode::sym_selfloop;
  throw ParamError("unknown normalization mode: " + s);
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw ParamError("unknown activation: " + s);
}

nlohmann::json train_config_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["lr"] = cfg.lr;
  j["weight_decay"] = cfg.weight_decay;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["hidden"] = cfg.hidden;
  j["dropout"] = cfg.dropout;
  j["layers"] = cfg.layers;
  j["patch_size"] = cfg.patch_size;
  j["filter_order"] = cfg.filter_order;
  j["patcher"] = to_string(cfg.patcher);
  j["refresh_interval"] = cfg.refresh_interval;
  j["seed"] = cfg.seed;
  j["aggregation"] = to_string(cfg.aggregation);
  j["nonlinearity"] = to_string(cfg.nonlinearity);
  j["residual"] = cfg.residual;
  j["patch_norm_axis"] = to_string(cfg.patch_norm_axis);
  j["ppr_c"] = cfg.ppr_c;
  j["neumann_k"] = cfg.neumann_k;
  j["norm_mode"] = to_string(cfg.norm_mode);
  j["filter_activation"] = to_string(cfg.filter_activation);
  j["apply_activation_in_relevance"] = cfg.apply_activation_in_relevance;
  j["shared_filter_weights"] = cfg.shared_filter_weights;
  return j;
}

void apply_config_json(const nlohmann::json& j, TrainConfig& cfg) {
  if (!j.is_object()) throw ParamError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "lr")
      cfg.lr = value.get<double>();
    else if (key == "weight_decay")
      cfg.weight_decay = value.get<double>();
    else if (key == "max_epochs")
      cfg.max_epochs = value.get<int>();
    else if (key == "patience")
      cfg.patience = value.get<int>();
    else if (key == "hidden")
      cfg.hidden = value.get<int>();
    else if (key == "dropout")
      cfg.dropout = value.get<double>();
    else if (key == "layers")
      cfg.layers = value.get<int>();
    else if (key == "patch_size")
      cfg.patch_size = value.get<int>();
    else if (key == "filter_order")
      cfg.filter_order = value.get<int>();
    else if (key == "patcher")
      cfg.patcher = patcher_from_string(value.get<std::string>());
    else if (key == "refresh_interval")
      cfg.refresh_interval = value.get<int>();
    else if (key == "seed")
      cfg.seed = value.get<std::uint64_t>();
    else if (key == "aggregation")
      cfg.aggregation = aggregation_from_string(value.get<std::string>());
    else if (key == "nonlinearity")
      cfg.nonlinearity = nonlinearity_from_string(value.get<std::string>());
    else if (key == "residual")
      cfg.residual = value.get<bool>();
    else if (key == "patch_norm_axis")
      cfg.patch_norm_axis = patch_norm_axis_from_string(value.get<std::string>());
    else if (key == "ppr_c")
      cfg.ppr_c = value.get<double>();
    else if (key == "neumann_k")
      cfg.neumann_k = value.get<int>();
    else if (key == "norm_mode")
      cfg.norm_mode = norm_mode_from_string(value.get<std::string>());
    else if (key == "filter_activation")
      cfg.filter_activation = activation_from_string(value.get<std::string>());
    else if (key == "apply_activation_in_relevance")
      cfg.apply_activation_in_relevance = value.get<bool>();
    else if (key == "shared_filter_weights")
      cfg.shared_filter_weights = value.get<bool>();
    else
      throw ParamError("unknown config key: " + key);
  }
}

}  // namespace herofilter
