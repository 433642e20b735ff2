// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "detm/model/encoder.hpp"
#include "detm/model/topic_model.hpp"

namespace detm {

struct DldaHyperparams {
  std::size_t K = 50;
  double sigma2 = 0.005;  // beta-tilde random-walk variance
  double delta2 = 0.005;  // eta random-walk variance
  double a2 = 1.0;
  std::size_t batch_size = 1000;
  double lr_mean = 0.05;
  double lr_var = 0.005;
  double lr_network = 0.001;
  std::size_t tied_epochs = 5;  // static warm start with topics shared over time
  std::size_t epochs = 120;     // dynamic epochs after the warm start
  double clip_norm = 0.0;
  double dropout = 0.1;
  std::size_t encoder_hidden = 800;
  std::size_t encoder_layers = 2;
  double weight_decay = 1.2e-6;
  std::size_t patience = 20;
  std::uint64_t seed = 1;
  double beta_init_sd = 0.02;
  double beta_init_logvar = -4.0;
  double eta_init_log_sd = -2.3;

  void validate() const;
  nlohmann::json to_json() const;
  static DldaHyperparams from_json(const nlohmann::json& j);
  std::size_t total_epochs() const { return tied_epochs + epochs; }
};

/// Analytic KL( N(m, L L^T) || N(0, Sigma_p) ) where Sigma_p is the
/// covariance of a length-T random walk started from N(0, 1) with step
/// variance delta2. `m` is T x 1, `chol_raw` is T x T whose strictly lower
/// part is the Cholesky factor and whose diagonal holds log L_tt.
nc::Var kl_gaussian_chain(const nc::Var& m, const nc::Var& chol_raw, double delta2);

class DldaRep final : public model::TopicModel {
 public:
  DldaRep(const DldaHyperparams& hyper, std::size_t V, std::size_t T, std::string vocab_hash);

  std::string model_type() const override { return "dlda_rep"; }
  std::size_t num_topics() const override { return hyper_.K; }
  std::size_t num_times() const override { return T_; }
  std::size_t vocab_size() const override { return V_; }
  const std::string& vocab_hash() const override { return vocab_hash_; }
  const DldaHyperparams& hyper() const { return hyper_; }

  nc::Tensor topic_matrix() const override;
  nc::Tensor infer_theta(model::DocBatch docs) const override;
  model::ElboTerms elbo(model::DocBatch batch, std::size_t D, nc::Rng& rng, bool training) override;

  nc::ParamStore& store() override { return store_; }
  const nc::ParamStore& store() const override { return store_; }
  std::unique_ptr<nc::Optimizer> make_optimizer() override;
  void begin_epoch(std::size_t epoch, nc::Optimizer& opt) override;
  std::size_t warmup_epochs() const override { return hyper_.tied_epochs; }
  nlohmann::json hyperparams_json() const override { return hyper_.to_json(); }

  bool tied() const;
  /// Copies the shared (t = 0) topic parameters to every time step along
  /// with their optimizer accumulators, then switches to the dynamic model.
  void untie(nc::Optimizer& opt);

  /// Lower-triangular Cholesky factor of q(eta_{:,k}) (T x T).
  nc::Var eta_cholesky(std::size_t k) const;
  /// T x K sample of eta (or its mean without `rng`).
  nc::Var eta_sample(nc::Rng* rng) const;

 private:
  nc::Var topic_logits(const nc::Var& beta_tilde_rows) const;

  DldaHyperparams hyper_;
  std::size_t V_, T_;
  std::string vocab_hash_;
  nc::ParamStore store_;
  nc::Var beta_mu_, beta_logvar_, eta_mean_, eta_chol_, tied_flag_;
  model::ThetaEncoder encoder_;
  nc::Tensor lower_mask_, diag_mask_;
  std::vector<std::size_t> first_rows_, later_rows_, prev_rows_, tied_rows_;
};

}  // namespace detm
