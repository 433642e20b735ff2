// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>

#include <json.hpp>

#include "detm/model/topic_model.hpp"
#include "detm/model/trainer.hpp"

namespace detm::model {

struct LoadedCheckpoint {
  std::unique_ptr<TopicModel> model;
  TrainerState trainer;
  nc::TensorMap optimizer_state;
  nlohmann::json manifest;
};

/// Writes manifest.json, tensors/*.bin, optim/*.bin and log.csv into `dir`.
/// Contains no timestamps, so identical runs give identical files.
void save_checkpoint(const std::filesystem::path& dir, const TopicModel& model, const TrainerState& state,
                     const nc::Optimizer* optimizer);

/// Rebuilds the model named by the manifest's model_type.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace detm::model
