#pragma once

#include <string>

#include "json.hpp"
#include "scenecat/codebook.hpp"
#include "scenecat/data.hpp"
#include "scenecat/model.hpp"
#include "scenecat/trainer.hpp"

namespace scenecat {

nlohmann::json train_config_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& js);

struct CheckpointData {
  ModelParams params;
  Codebook codebook;
  FeatureStats stats;
  TrainConfig train_config;
  std::string config_sha256;
};

// Writes a checkpoint container: layer weights, codebook entries and usage,
// normalization statistics, training config echo, and its sha256.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const Codebook& codebook, const FeatureStats& stats,
                     const TrainConfig& config);

CheckpointData load_checkpoint(const std::string& path);

}  // namespace scenecat
