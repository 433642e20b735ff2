// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/dlda/dlda.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "detm/errors.hpp"
#include "detm/model/likelihood.hpp"
#include "detm/numcore/gaussian.hpp"
#include "detm/numcore/ops.hpp"

namespace detm {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DldaHyperparams, K, sigma2, delta2, a2, batch_size, lr_mean, lr_var, lr_network,
                                   tied_epochs, epochs, clip_norm, dropout, encoder_hidden, encoder_layers,
                                   weight_decay, patience, seed, beta_init_sd, beta_init_logvar, eta_init_log_sd)

namespace {

nc::Tensor strict_lower_mask(std::size_t T) {
  nc::Tensor m({T, T}, 0.0);
  for (std::size_t i = 0; i < T; ++i)
    for (std::size_t j = 0; j < i; ++j) m.at(i, j) = 1.0;
  return m;
}

nc::Tensor diagonal_mask(std::size_t T) {
  nc::Tensor m({T, T}, 0.0);
  for (std::size_t i = 0; i < T; ++i) m.at(i, i) = 1.0;
  return m;
}

// Off-diagonal entries of `raw` pass through; the diagonal is exponentiated.
nc::Var cholesky_from_raw(const nc::Var& raw) {
  const std::size_t T = raw->shape()[0];
  const nc::Var lower = nc::mul(raw, nc::constant(strict_lower_mask(T)));
  const nc::Var diag = nc::mul(nc::exp(nc::clamp(raw, nc::kLogVarMin, nc::kLogVarMax)), nc::constant(diagonal_mask(T)));
  return nc::add(lower, diag);
}

// Square root of the random-walk prior precision: A^T A = Sigma_p^{-1}.
nc::Tensor walk_precision_root(std::size_t T, double delta2) {
  nc::Tensor A({T, T}, 0.0);
  const double inv = 1.0 / std::sqrt(delta2);
  A.at(0, 0) = 1.0;
  for (std::size_t t = 1; t < T; ++t) {
    A.at(t, t) = inv;
    A.at(t, t - 1) = -inv;
  }
  return A;
}

}  // namespace

void DldaHyperparams::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("dlda: ") + what);
  };
  need(K >= 1, "K must be >= 1");
  need(sigma2 > 0, "sigma2 must be > 0");
  need(delta2 > 0, "delta2 must be > 0");
  need(a2 > 0, "a2 must be > 0");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(lr_mean > 0 && lr_var > 0 && lr_network > 0, "learning rates must be > 0");
  need(clip_norm >= 0, "clip_norm must be >= 0 (0 disables clipping)");
  need(dropout >= 0 && dropout < 1, "dropout must lie in [0, 1)");
  need(encoder_hidden >= 1 && encoder_layers >= 1, "encoder needs a hidden layer");
  need(weight_decay >= 0, "weight_decay must be >= 0");
  need(beta_init_sd >= 0, "beta_init_sd must be >= 0");
}

nlohmann::json DldaHyperparams::to_json() const { return *this; }

DldaHyperparams DldaHyperparams::from_json(const nlohmann::json& j) {
  try {
    return j.get<DldaHyperparams>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("dlda hyperparameters: ") + e.what());
  }
}

nc::Var kl_gaussian_chain(const nc::Var& m, const nc::Var& chol_raw, double delta2) {
  if (!(delta2 > 0)) throw std::invalid_argument("kl_gaussian_chain: delta2 must be positive");
  const std::size_t T = chol_raw->shape()[0];
  if (chol_raw->value.rank() != 2 || chol_raw->shape()[1] != T || m->value.rank() != 2 || m->shape()[0] != T ||
      m->shape()[1] != 1)
    throw ShapeError("kl_gaussian_chain: mean " + nc::shape_str(m->shape()) + " and factor " +
                     nc::shape_str(chol_raw->shape()) + " must be T x 1 and T x T");
  const nc::Var A = nc::constant(walk_precision_root(T, delta2));
  const nc::Var trace = nc::sum(nc::square(nc::matmul(A, cholesky_from_raw(chol_raw))));
  const nc::Var quad = nc::sum(nc::square(nc::matmul(A, m)));
  const nc::Var log_det_q = nc::scale(
      nc::sum(nc::mul(nc::clamp(chol_raw, nc::kLogVarMin, nc::kLogVarMax), nc::constant(diagonal_mask(T)))), 2.0);
  const double constant_part = -static_cast<double>(T) + static_cast<double>(T - 1) * std::log(delta2);
  return nc::scale(nc::add_scalar(nc::sub(nc::add(trace, quad), log_det_q), constant_part), 0.5);
}

DldaRep::DldaRep(const DldaHyperparams& hyper, std::size_t V, std::size_t T, std::string vocab_hash)
    : hyper_(hyper), V_(V), T_(T), vocab_hash_(std::move(vocab_hash)) {
  hyper_.validate();
  if (V_ < 1 || T_ < 1) throw ConfigError("dlda: V and T must be >= 1");
  const std::size_t K = hyper_.K;
  nc::Rng rng = nc::Rng::derive(hyper_.seed, {0xD1DAu});

  beta_mu_ = store_.add("beta_tilde_q_mu", rng.normal_tensor({K * T_, V_}, 0.0, hyper_.beta_init_sd),
                        nc::ParamKind::kVariationalMean);
  beta_logvar_ = store_.add("beta_tilde_q_logvar", nc::Tensor({K * T_, V_}, hyper_.beta_init_logvar),
                            nc::ParamKind::kVariationalScale);
  eta_mean_ = store_.add("eta_mean", nc::Tensor({K, T_}, 0.0), nc::ParamKind::kVariationalMean);
  nc::Tensor chol({K * T_, T_}, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T_; ++t) chol.at(k * T_ + t, t) = hyper_.eta_init_log_sd;
  eta_chol_ = store_.add("eta_chol", std::move(chol), nc::ParamKind::kVariationalScale);
  tied_flag_ = store_.add("tied", nc::Tensor({1}, hyper_.tied_epochs > 0 ? 1.0 : 0.0), nc::ParamKind::kFixed);
  encoder_ = model::ThetaEncoder(store_, "encoder", V_, K,
                                 {hyper_.encoder_hidden, hyper_.encoder_layers, hyper_.dropout}, rng);

  for (std::size_t k = 0; k < K; ++k) {
    first_rows_.push_back(model::topic_row(k, 0, T_));
    for (std::size_t t = 0; t < T_; ++t) tied_rows_.push_back(k);
    for (std::size_t t = 1; t < T_; ++t) {
      later_rows_.push_back(model::topic_row(k, t, T_));
      prev_rows_.push_back(model::topic_row(k, t - 1, T_));
    }
  }
}

bool DldaRep::tied() const { return tied_flag_->value[0] != 0.0; }

nc::Var DldaRep::eta_cholesky(std::size_t k) const {
  return cholesky_from_raw(nc::slice_rows(eta_chol_, k * T_, T_));
}

nc::Var DldaRep::eta_sample(nc::Rng* rng) const {
  if (!rng) return nc::transpose(eta_mean_);
  std::vector<nc::Var> cols;
  for (std::size_t k = 0; k < hyper_.K; ++k) {
    const nc::Var m = nc::transpose(nc::slice_rows(eta_mean_, k, 1));
    cols.push_back(nc::add(m, nc::matmul(eta_cholesky(k), nc::constant(rng->normal_tensor({T_, 1})))));
  }
  return nc::concat(cols, 1);
}

model::ElboTerms DldaRep::elbo(model::DocBatch batch, std::size_t D, nc::Rng& rng, bool training) {
  if (batch.empty()) throw DataError("dlda: empty minibatch");
  const double scale = static_cast<double>(D) / static_cast<double>(batch.size());

  nc::Var beta_tilde, kl_alpha;
  const nc::Var mu0 = nc::gather_rows(beta_mu_, first_rows_);
  const nc::Var lv0 = nc::gather_rows(beta_logvar_, first_rows_);
  if (tied()) {
    beta_tilde = nc::gather_rows(nc::reparam_sample(mu0, lv0, rng), tied_rows_);
    kl_alpha = nc::kl_diag_normal(mu0, lv0, 1.0);
  } else {
    beta_tilde = nc::reparam_sample(beta_mu_, beta_logvar_, rng);
    kl_alpha = nc::kl_diag_normal(mu0, lv0, 1.0);
    if (T_ > 1)
      kl_alpha = nc::add(kl_alpha, nc::kl_diag_normal(nc::gather_rows(beta_mu_, later_rows_),
                                                      nc::gather_rows(beta_logvar_, later_rows_),
                                                      nc::gather_rows(beta_tilde, prev_rows_), hyper_.sigma2));
  }
  const nc::Var beta = nc::softmax(beta_tilde, 1);
  const nc::Var eta = eta_sample(&rng);

  std::vector<std::size_t> times;
  for (const auto* d : batch) times.push_back(d->time_bin);
  const nc::Var eta_d = nc::gather_rows(eta, times);
  const auto q = encoder_(nc::constant(corpus::normalized_bow(batch, V_)), eta_d, training, rng);
  const nc::Var theta = nc::softmax(nc::reparam_sample(q.mu, q.logvar, rng), 1);

  nc::Var rec = nc::scale(model::mixture_loglik(theta, beta, batch, T_), scale);
  nc::Var kl_theta = nc::scale(nc::kl_diag_normal(q.mu, q.logvar, eta_d, hyper_.a2), scale);
  nc::Var kl_eta;
  for (std::size_t k = 0; k < hyper_.K; ++k) {
    nc::Var term = kl_gaussian_chain(nc::transpose(nc::slice_rows(eta_mean_, k, 1)),
                                     nc::slice_rows(eta_chol_, k * T_, T_), hyper_.delta2);
    kl_eta = kl_eta ? nc::add(kl_eta, term) : term;
  }

  auto terms = model::combine_elbo(std::move(rec), std::move(kl_theta), std::move(kl_eta), std::move(kl_alpha));
  model::require_finite(terms.values(), "dlda elbo");
  return terms;
}

nc::Tensor DldaRep::topic_matrix() const {
  nc::Var logits = nc::constant(beta_mu_->value);
  if (tied()) logits = nc::gather_rows(nc::gather_rows(logits, first_rows_), tied_rows_);
  return nc::softmax(logits, 1)->value;
}

nc::Tensor DldaRep::infer_theta(model::DocBatch docs) const {
  if (docs.empty()) return nc::Tensor({0, hyper_.K});
  std::vector<std::size_t> times;
  for (const auto* d : docs) times.push_back(d->time_bin);
  const nc::Var eta_d = nc::gather_rows(nc::constant(nc::transpose(eta_mean_)->value), times);
  nc::Rng unused(0);
  const auto q = encoder_(nc::constant(corpus::normalized_bow(docs, V_)), eta_d, false, unused);
  return nc::softmax(q.mu, 1)->value;
}

std::unique_ptr<nc::Optimizer> DldaRep::make_optimizer() {
  nc::ParamGroup means{store_.of_kind(nc::ParamKind::kVariationalMean), hyper_.lr_mean, 0.0};
  nc::ParamGroup scales{store_.of_kind(nc::ParamKind::kVariationalScale), hyper_.lr_var, 0.0};
  nc::ParamGroup network{store_.of_kind(nc::ParamKind::kNetwork), hyper_.lr_network, hyper_.weight_decay};
  return std::make_unique<nc::RMSProp>(
      std::vector<nc::ParamGroup>{std::move(means), std::move(scales), std::move(network)});
}

void DldaRep::begin_epoch(std::size_t epoch, nc::Optimizer& opt) {
  if (tied() && epoch >= hyper_.tied_epochs) untie(opt);
}

void DldaRep::untie(nc::Optimizer& opt) {
  auto spread = [&](nc::Tensor& t) {
    for (std::size_t k = 0; k < hyper_.K; ++k)
      for (std::size_t s = 1; s < T_; ++s)
        std::copy_n(t.ptr() + k * T_ * V_, V_, t.ptr() + (k * T_ + s) * V_);
  };
  spread(beta_mu_->value);
  spread(beta_logvar_->value);
  auto state = opt.state();
  for (const char* key : {"sq/beta_tilde_q_mu", "sq/beta_tilde_q_logvar"}) {
    auto it = state.find(key);
    if (it != state.end()) spread(it->second);
  }
  opt.load_state(state);
  tied_flag_->value[0] = 0.0;
  spdlog::info("dlda: untied topics across {} time steps", T_);
}

}  // namespace detm
