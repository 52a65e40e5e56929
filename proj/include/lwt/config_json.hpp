#pragma once

// JSON conversions for the configuration structs, shared by checkpoints and
// run manifests.

#include <nlohmann/json.hpp>

#include "lwt/adamw.hpp"
#include "lwt/data.hpp"
#include "lwt/model.hpp"

namespace lwt {

void to_json(nlohmann::ordered_json& j, const ModelConfig& c);
void from_json(const nlohmann::ordered_json& j, ModelConfig& c);

void to_json(nlohmann::ordered_json& j, const AdamWConfig& c);
void from_json(const nlohmann::ordered_json& j, AdamWConfig& c);

void to_json(nlohmann::ordered_json& j, const SynthSpec& s);

}  // namespace lwt
