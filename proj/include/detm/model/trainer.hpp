// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "detm/model/topic_model.hpp"

namespace detm::model {

struct TrainConfig {
  std::size_t epochs = 1;  // total epoch count, counting from 0
  std::size_t batch_size = 200;
  double clip_norm = 2.0;  // 0 disables clipping
  std::size_t patience = 20;  // 0 disables early stopping
  std::uint64_t seed = 1;
};

struct EpochRecord {
  std::size_t epoch = 0;
  ElboBreakdown train;  // mean over minibatches
  double val_score = 0.0;
  double grad_norm = 0.0;  // mean pre-clip norm
};

struct TrainerState {
  std::size_t epochs_done = 0;
  std::optional<double> best_val;
  std::size_t best_epoch = 0;
  std::size_t since_best = 0;
  bool early_stopped = false;
  std::vector<EpochRecord> log;

  nlohmann::json to_json() const;
  static TrainerState from_json(const nlohmann::json& j);
};

/// CSV with one row per epoch: epoch, elbo, rec_loglik, kl terms, val score.
std::string training_log_csv(const TrainerState& state);

/// Minibatch loop shared by both models. Every random draw is derived from
/// (seed, epoch, batch), so resuming at an epoch boundary reproduces an
/// uninterrupted run exactly.
class Trainer {
 public:
  Trainer(TopicModel& model, const corpus::CorpusSplit& split, TrainConfig config);

  /// Continue from a checkpoint written after `state.epochs_done` epochs.
  void restore(TrainerState state, const nc::TensorMap& optimizer_state);

  /// Trains until `config.epochs` or early stopping. `after_epoch` runs
  /// after every completed epoch (checkpointing hook).
  void run(const std::function<void(const Trainer&)>& after_epoch = {});

  /// One epoch; returns its record (also appended to the log).
  EpochRecord run_epoch();

  bool finished() const;
  const TrainerState& state() const { return state_; }
  const nc::Optimizer& optimizer() const { return *optimizer_; }
  const TrainConfig& config() const { return config_; }
  TopicModel& model() const { return model_; }

 private:
  TopicModel& model_;
  const corpus::CorpusSplit& split_;
  TrainConfig config_;
  std::unique_ptr<nc::Optimizer> optimizer_;
  TrainerState state_;
};

}  // namespace detm::model
