// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/model/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "detm/detm/detm.hpp"
#include "detm/dlda/dlda.hpp"
#include "detm/errors.hpp"
#include "detm/numcore/serialize.hpp"

namespace detm::model {
namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "detm-checkpoint";
constexpr int kFormatVersion = 1;

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out << s;
  if (!out) throw DataError("write failed for " + p.string());
}

}  // namespace

void save_checkpoint(const fs::path& dir, const TopicModel& model, const TrainerState& state,
                     const nc::Optimizer* optimizer) {
  fs::create_directories(dir);
  fs::remove_all(dir / "tensors");
  fs::remove_all(dir / "optim");

  nlohmann::json m;
  m["format"] = kFormat;
  m["format_version"] = kFormatVersion;
  m["version"] = DETM_VERSION;
  m["model_type"] = model.model_type();
  m["hyperparams"] = model.hyperparams_json();
  m["vocab_hash"] = model.vocab_hash();
  m["K"] = model.num_topics();
  m["T"] = model.num_times();
  m["V"] = model.vocab_size();
  m["epoch"] = state.epochs_done;
  nlohmann::json metrics;
  metrics["best_val"] = state.best_val ? nlohmann::json(*state.best_val) : nlohmann::json(nullptr);
  metrics["best_epoch"] = state.best_epoch;
  metrics["since_best"] = state.since_best;
  metrics["early_stopped"] = state.early_stopped;
  if (!state.log.empty()) {
    const auto& last = state.log.back();
    metrics["elbo"] = last.train.elbo;
    metrics["val_score"] = last.val_score;
  }
  m["metrics"] = std::move(metrics);
  m["trainer"] = state.to_json();
  m["tensors"] = nc::save_tensors(dir, model.store().snapshot(), "tensors");
  if (optimizer) m["optimizer"] = nc::save_tensors(dir, optimizer->state(), "optim");
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  write_text(dir / "log.csv", training_log_csv(state));
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("no checkpoint at " + dir.string() + " (missing manifest.json)");
  LoadedCheckpoint out;
  try {
    out.manifest = nlohmann::json::parse(in);
    const auto& m = out.manifest;
    if (m.value("format", "") != kFormat) throw DataError(manifest_path.string() + " is not a detm checkpoint");
    if (m.at("format_version").get<int>() != kFormatVersion)
      throw DataError(manifest_path.string() + ": unsupported checkpoint version");

    auto tensors = nc::load_tensors(dir, m.at("tensors"));
    const std::string type = m.at("model_type").get<std::string>();
    const std::string hash = m.at("vocab_hash").get<std::string>();
    if (type == "detm") {
      auto need = [&](const char* name) -> const nc::Tensor& {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw DataError(std::string("checkpoint has no '") + name + "' tensor");
        return it->second;
      };
      out.model = std::make_unique<Detm>(DetmHyperparams::from_json(m.at("hyperparams")), need("rho"), need("wtilde"),
                                         hash);
    } else if (type == "dlda_rep") {
      out.model = std::make_unique<DldaRep>(DldaHyperparams::from_json(m.at("hyperparams")),
                                            m.at("V").get<std::size_t>(), m.at("T").get<std::size_t>(), hash);
    } else {
      throw DataError("unknown model_type '" + type + "' in " + manifest_path.string());
    }
    out.model->store().restore(tensors);
    out.trainer = TrainerState::from_json(m.at("trainer"));
    if (m.contains("optimizer")) out.optimizer_state = nc::load_tensors(dir, m.at("optimizer"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace detm::model
