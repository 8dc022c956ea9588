#pragma once

#include <string>

#include "mbgan/trainer.hpp"

namespace mbgan {

// JSON <-> TrainConfig. Parsing is strict: unknown keys and type errors
// raise ConfigInvalid naming the key, and the resulting config is validated.
// All keys are optional; omitted ones take the toy-preset defaults, so "{}"
// is the standard 8-discriminator alpha_sigm run.
TrainConfig parse_config_text(const std::string& json_text);
TrainConfig load_config(const std::string& path);

// Fully resolved config (every key explicit). Feeding this back through
// parse_config_text reproduces the run exactly.
std::string config_to_json(const TrainConfig& cfg);

} // namespace mbgan
