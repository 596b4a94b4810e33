#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "polywsd/bcl.hpp"
#include "polywsd/model.hpp"

namespace polywsd {

// Model and training settings of one run. vocab_size is filled in from the
// data, so the "encoder" sections do not carry it.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

// Defaults for the small CPU-scale model.
RunConfig default_run_config();

// {"encoder": {...}, "gloss_encoder"?: {...}, "fusion": {"poly_m", "heads"},
//  "train": {...}}. Missing keys keep their defaults; unknown keys are a
// ConfigError. Without "gloss_encoder" both encoders share one shape.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// Short stable hash of the config (less seed) and the data files' contents.
std::string run_fingerprint(const RunConfig& config, const std::string& corpus_bytes,
                            const std::string& inventory_bytes);

}  // namespace polywsd
