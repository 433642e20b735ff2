// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "detm/model/encoder.hpp"
#include "detm/model/topic_model.hpp"
#include "detm/numcore/nn.hpp"

namespace detm {

struct DetmHyperparams {
  std::size_t K = 50;
  double delta2 = 0.005;  // eta random-walk variance
  double gamma2 = 0.005;  // alpha random-walk variance
  double a2 = 1.0;        // theta prior variance around eta
  std::size_t batch_size = 200;
  double lr = 1e-3;
  std::size_t epochs = 400;
  double clip_norm = 2.0;
  double dropout = 0.1;
  std::size_t encoder_hidden = 800;
  std::size_t encoder_layers = 2;
  std::size_t lstm_input_dim = 400;
  std::size_t lstm_hidden = 400;
  std::size_t lstm_layers = 4;
  double weight_decay = 1.2e-6;
  std::size_t patience = 20;
  std::uint64_t seed = 1;
  bool finetune_rho = false;
  double alpha_init_sd = 0.02;
  double alpha_init_logvar = -4.0;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  nlohmann::json to_json() const;
  static DetmHyperparams from_json(const nlohmann::json& j);
};

/// Sampled (or mean) latent-mean chain.
struct EtaChain {
  nc::Var eta;                  // T x K
  std::vector<nc::Var> mu;      // T entries of 1 x K
  std::vector<nc::Var> logvar;  // T entries of 1 x K
};

class Detm final : public model::TopicModel {
 public:
  /// rho is L x V, wtilde is the T x V time-aggregated bag of words of the
  /// training split.
  Detm(const DetmHyperparams& hyper, const nc::Tensor& rho, const nc::Tensor& wtilde, std::string vocab_hash);

  std::string model_type() const override { return "detm"; }
  std::size_t num_topics() const override { return hyper_.K; }
  std::size_t num_times() const override { return T_; }
  std::size_t vocab_size() const override { return V_; }
  std::size_t embedding_dim() const { return L_; }
  const std::string& vocab_hash() const override { return vocab_hash_; }
  const DetmHyperparams& hyper() const { return hyper_; }

  nc::Tensor topic_matrix() const override;
  nc::Tensor infer_theta(model::DocBatch docs) const override;
  model::ElboTerms elbo(model::DocBatch batch, std::size_t D, nc::Rng& rng, bool training) override;

  nc::ParamStore& store() override { return store_; }
  const nc::ParamStore& store() const override { return store_; }
  std::unique_ptr<nc::Optimizer> make_optimizer() override;
  nlohmann::json hyperparams_json() const override { return hyper_.to_json(); }

  /// softmax over V of alpha * rho for every (k, t) row of `alpha`.
  nc::Var compute_topics(const nc::Var& alpha) const;
  /// Runs q(eta) forward in time. With `rng` the chain is sampled and each
  /// step conditions on the previous sample; without it the means are used.
  EtaChain eta_chain(nc::Rng* rng) const;
  /// T x K variational means of eta.
  nc::Tensor eta_mean() const;

  /// Scores rho_new . alpha_k^(t) of an unseen word embedding (length L)
  /// against every topic at the variational means; (K*T) entries.
  std::vector<double> new_word_scores(std::span<const double> embedding) const;

  const model::ThetaEncoder& encoder() const { return encoder_; }

 private:
  nc::Var encoder_bow(model::DocBatch docs) const;

  DetmHyperparams hyper_;
  std::size_t V_, L_, T_;
  std::string vocab_hash_;
  nc::ParamStore store_;
  nc::Var rho_, wtilde_, alpha_mu_, alpha_logvar_;
  nc::Linear eta_input_, eta_mu_, eta_logvar_;
  nc::LstmStack eta_lstm_;
  model::ThetaEncoder encoder_;
  std::vector<std::size_t> first_rows_, later_rows_, prev_rows_;
};

}  // namespace detm
