// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/model/trainer.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

#include "detm/errors.hpp"
#include "detm/numcore/ops.hpp"

namespace detm::model {

namespace {

nlohmann::json breakdown_json(const ElboBreakdown& b) {
  return {{"elbo", b.elbo},
          {"rec_loglik", b.rec_loglik},
          {"kl_theta", b.kl_theta},
          {"kl_eta", b.kl_eta},
          {"kl_alpha", b.kl_alpha}};
}

ElboBreakdown breakdown_from(const nlohmann::json& j) {
  return {j.at("rec_loglik").get<double>(), j.at("kl_theta").get<double>(), j.at("kl_eta").get<double>(),
          j.at("kl_alpha").get<double>(), j.at("elbo").get<double>()};
}

}  // namespace

nlohmann::json TrainerState::to_json() const {
  nlohmann::json j;
  j["epochs_done"] = epochs_done;
  j["best_val"] = best_val ? nlohmann::json(*best_val) : nlohmann::json(nullptr);
  j["best_epoch"] = best_epoch;
  j["since_best"] = since_best;
  j["early_stopped"] = early_stopped;
  auto& rows = j["log"] = nlohmann::json::array();
  for (const auto& r : log) {
    rows.push_back({{"epoch", r.epoch}, {"train", breakdown_json(r.train)}, {"val_score", r.val_score},
                    {"grad_norm", r.grad_norm}});
  }
  return j;
}

TrainerState TrainerState::from_json(const nlohmann::json& j) {
  TrainerState s;
  try {
    s.epochs_done = j.at("epochs_done").get<std::size_t>();
    if (!j.at("best_val").is_null()) s.best_val = j.at("best_val").get<double>();
    s.best_epoch = j.at("best_epoch").get<std::size_t>();
    s.since_best = j.at("since_best").get<std::size_t>();
    s.early_stopped = j.at("early_stopped").get<bool>();
    for (const auto& r : j.at("log")) {
      s.log.push_back({r.at("epoch").get<std::size_t>(), breakdown_from(r.at("train")), r.at("val_score").get<double>(),
                       r.at("grad_norm").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("trainer state: ") + e.what());
  }
  return s;
}

std::string training_log_csv(const TrainerState& state) {
  std::string out = "epoch,elbo,rec_loglik,kl_theta,kl_eta,kl_alpha,val_score,grad_norm\n";
  for (const auto& r : state.log) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.epoch, r.train.elbo, r.train.rec_loglik, r.train.kl_theta,
                       r.train.kl_eta, r.train.kl_alpha, r.val_score, r.grad_norm);
  }
  return out;
}

Trainer::Trainer(TopicModel& model, const corpus::CorpusSplit& split, TrainConfig config)
    : model_(model), split_(split), config_(config), optimizer_(model.make_optimizer()) {
  if (config_.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (config_.clip_norm < 0) throw ConfigError("clip_norm must be >= 0");
  if (split_.train.empty()) throw DataError("training split is empty");
  if (split_.T != model_.num_times())
    throw DataError(fmt::format("corpus has T={} time steps but the model was built for T={}", split_.T,
                                model_.num_times()));
}

void Trainer::restore(TrainerState state, const nc::TensorMap& optimizer_state) {
  optimizer_->load_state(optimizer_state);
  state_ = std::move(state);
}

bool Trainer::finished() const { return state_.early_stopped || state_.epochs_done >= config_.epochs; }

EpochRecord Trainer::run_epoch() {
  const std::size_t epoch = state_.epochs_done;
  model_.begin_epoch(epoch, *optimizer_);

  const std::size_t D = split_.train.size();
  std::vector<std::size_t> order(D);
  std::iota(order.begin(), order.end(), 0);
  {
    nc::Rng shuffle_rng = nc::Rng::derive(config_.seed, {epoch, 0});
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
  }

  const auto params = optimizer_->params();
  EpochRecord rec;
  rec.epoch = epoch;
  std::size_t n_batches = 0;
  for (std::size_t start = 0; start < D; start += config_.batch_size) {
    std::vector<const corpus::TimedDocument*> batch;
    for (std::size_t i = start; i < std::min(D, start + config_.batch_size); ++i)
      batch.push_back(&split_.train[order[i]]);
    nc::Rng rng = nc::Rng::derive(config_.seed, {epoch, n_batches + 1});

    nc::zero_grad(params);
    const ElboTerms terms = model_.elbo(batch, D, rng, true);
    nc::backward(nc::scale(terms.elbo, -1.0));
    const double norm = config_.clip_norm > 0 ? nc::clip_grad_norm(params, config_.clip_norm) : nc::grad_norm(params);
    optimizer_->step();

    const auto v = terms.values();
    rec.train.elbo += v.elbo;
    rec.train.rec_loglik += v.rec_loglik;
    rec.train.kl_theta += v.kl_theta;
    rec.train.kl_eta += v.kl_eta;
    rec.train.kl_alpha += v.kl_alpha;
    rec.grad_norm += norm;
    ++n_batches;
  }
  const double inv = 1.0 / static_cast<double>(n_batches);
  rec.train.elbo *= inv;
  rec.train.rec_loglik *= inv;
  rec.train.kl_theta *= inv;
  rec.train.kl_eta *= inv;
  rec.train.kl_alpha *= inv;
  rec.grad_norm *= inv;

  rec.val_score = split_.validation.empty() ? rec.train.elbo / static_cast<double>(D)
                                            : heldout_reconstruction(model_, split_.validation);
  state_.log.push_back(rec);
  state_.epochs_done = epoch + 1;

  if (epoch >= model_.warmup_epochs()) {
    if (!state_.best_val || rec.val_score > *state_.best_val) {
      state_.best_val = rec.val_score;
      state_.best_epoch = epoch;
      state_.since_best = 0;
    } else {
      ++state_.since_best;
    }
    if (config_.patience > 0 && state_.since_best >= config_.patience) state_.early_stopped = true;
  }
  spdlog::info("epoch {:>4}  elbo {:.4f}  rec {:.4f}  kl_theta {:.4f}  kl_eta {:.4f}  kl_alpha {:.4f}  val {:.6f}",
               epoch, rec.train.elbo, rec.train.rec_loglik, rec.train.kl_theta, rec.train.kl_eta, rec.train.kl_alpha,
               rec.val_score);
  return rec;
}

void Trainer::run(const std::function<void(const Trainer&)>& after_epoch) {
  while (!finished()) {
    run_epoch();
    if (after_epoch) after_epoch(*this);
  }
  if (state_.early_stopped)
    spdlog::info("early stopping after epoch {} (best validation score at epoch {})", state_.epochs_done - 1,
                 state_.best_epoch);
}

}  // namespace detm::model
