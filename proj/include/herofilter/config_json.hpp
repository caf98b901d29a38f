#pragma once

#include <string>

#include "herofilter/training.hpp"
#include "json.hpp"

namespace herofilter {

std::string to_string(PatcherChoice p);
std::string to_string(Aggregation a);
std::string to_string(Nonlinearity n);
std::string to_string(NormMode m);
std::string to_string(Activation a);
std::string to_string(PatchNormAxis a);

PatcherChoice patcher_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);
Nonlinearity nonlinearity_from_string(const std::string& s);
NormMode norm_mode_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);
PatchNormAxis patch_norm_axis_from_string(const std::string& s);

nlohmann::json train_config_json(const TrainConfig& cfg);

// Overrides fields present in j; throws ParamError on unknown keys.
void apply_config_json(const nlohmann::json& j, TrainConfig& cfg);

}  // namespace herofilter
