// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/detm/detm.hpp"

#include "detm/errors.hpp"
#include "detm/model/likelihood.hpp"
#include "detm/numcore/gaussian.hpp"
#include "detm/numcore/ops.hpp"

namespace detm {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DetmHyperparams, K, delta2, gamma2, a2, batch_size, lr, epochs, clip_norm, dropout,
                                   encoder_hidden, encoder_layers, lstm_input_dim, lstm_hidden, lstm_layers,
                                   weight_decay, patience, seed, finetune_rho, alpha_init_sd, alpha_init_logvar)

void DetmHyperparams::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("detm: ") + what);
  };
  need(K >= 1, "K must be >= 1");
  need(delta2 > 0, "delta2 must be > 0");
  need(gamma2 > 0, "gamma2 must be > 0");
  need(a2 > 0, "a2 must be > 0");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(lr > 0, "lr must be > 0");
  need(clip_norm >= 0, "clip_norm must be >= 0 (0 disables clipping)");
  need(dropout >= 0 && dropout < 1, "dropout must lie in [0, 1)");
  need(encoder_hidden >= 1 && encoder_layers >= 1, "encoder needs a hidden layer");
  need(lstm_input_dim >= 1 && lstm_hidden >= 1 && lstm_layers >= 1, "LSTM sizes must be >= 1");
  need(weight_decay >= 0, "weight_decay must be >= 0");
  need(alpha_init_sd >= 0, "alpha_init_sd must be >= 0");
}

nlohmann::json DetmHyperparams::to_json() const { return *this; }

DetmHyperparams DetmHyperparams::from_json(const nlohmann::json& j) {
  try {
    return j.get<DetmHyperparams>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("detm hyperparameters: ") + e.what());
  }
}

Detm::Detm(const DetmHyperparams& hyper, const nc::Tensor& rho, const nc::Tensor& wtilde, std::string vocab_hash)
    : hyper_(hyper), vocab_hash_(std::move(vocab_hash)) {
  hyper_.validate();
  if (rho.rank() != 2) throw ShapeError("detm: rho must be L x V, got " + nc::shape_str(rho.shape()));
  if (wtilde.rank() != 2 || wtilde.cols() != rho.cols())
    throw ShapeError("detm: wtilde " + nc::shape_str(wtilde.shape()) + " does not match rho " +
                     nc::shape_str(rho.shape()));
  L_ = rho.rows();
  V_ = rho.cols();
  T_ = wtilde.rows();
  if (T_ < 1 || V_ < 1 || L_ < 1) throw ConfigError("detm: T, V and L must be >= 1");
  const std::size_t K = hyper_.K;

  nc::Rng rng = nc::Rng::derive(hyper_.seed, {0xD37Eu});
  rho_ = store_.add("rho", rho, hyper_.finetune_rho ? nc::ParamKind::kVariationalMean : nc::ParamKind::kFixed);
  wtilde_ = store_.add("wtilde", wtilde, nc::ParamKind::kFixed);
  alpha_mu_ = store_.add("alpha_q_mu", rng.normal_tensor({K * T_, L_}, 0.0, hyper_.alpha_init_sd),
                         nc::ParamKind::kVariationalMean);
  alpha_logvar_ =
      store_.add("alpha_q_logvar", nc::Tensor({K * T_, L_}, hyper_.alpha_init_logvar), nc::ParamKind::kVariationalScale);
  eta_input_ = nc::Linear(store_, "lstm/input", V_, hyper_.lstm_input_dim, rng);
  eta_lstm_ = nc::LstmStack(store_, "lstm/stack", hyper_.lstm_input_dim, hyper_.lstm_hidden, hyper_.lstm_layers, rng);
  eta_mu_ = nc::Linear(store_, "lstm/mu", hyper_.lstm_hidden + K, K, rng);
  eta_logvar_ = nc::Linear(store_, "lstm/logvar", hyper_.lstm_hidden + K, K, rng);
  encoder_ = model::ThetaEncoder(store_, "encoder", V_, K,
                                 {hyper_.encoder_hidden, hyper_.encoder_layers, hyper_.dropout}, rng);

  for (std::size_t k = 0; k < K; ++k) {
    first_rows_.push_back(model::topic_row(k, 0, T_));
    for (std::size_t t = 1; t < T_; ++t) {
      later_rows_.push_back(model::topic_row(k, t, T_));
      prev_rows_.push_back(model::topic_row(k, t - 1, T_));
    }
  }
}

nc::Var Detm::compute_topics(const nc::Var& alpha) const {
  if (alpha->value.rank() != 2 || alpha->shape()[1] != L_)
    throw ShapeError("compute_topics: alpha " + nc::shape_str(alpha->shape()) + " does not match L=" +
                     std::to_string(L_));
  return nc::softmax(nc::matmul(alpha, rho_), 1);
}

EtaChain Detm::eta_chain(nc::Rng* rng) const {
  const nc::Var projected = eta_input_(wtilde_);
  std::vector<nc::Var> steps;
  for (std::size_t t = 0; t < T_; ++t) steps.push_back(nc::slice_rows(projected, t, 1));
  const auto outputs = eta_lstm_.forward(steps);

  EtaChain chain;
  std::vector<nc::Var> etas;
  nc::Var prev = nc::constant(nc::Tensor({1, hyper_.K}, 0.0));
  for (std::size_t t = 0; t < T_; ++t) {
    const nc::Var h = nc::concat({outputs[t], prev}, 1);
    chain.mu.push_back(eta_mu_(h));
    chain.logvar.push_back(eta_logvar_(h));
    prev = rng ? nc::reparam_sample(chain.mu.back(), chain.logvar.back(), *rng) : chain.mu.back();
    etas.push_back(prev);
  }
  chain.eta = nc::concat(etas, 0);
  return chain;
}

nc::Tensor Detm::eta_mean() const { return eta_chain(nullptr).eta->value; }

nc::Var Detm::encoder_bow(model::DocBatch docs) const { return nc::constant(corpus::normalized_bow(docs, V_)); }

model::ElboTerms Detm::elbo(model::DocBatch batch, std::size_t D, nc::Rng& rng, bool training) {
  if (batch.empty()) throw DataError("detm: empty minibatch");
  const double scale = static_cast<double>(D) / static_cast<double>(batch.size());

  const nc::Var alpha = nc::reparam_sample(alpha_mu_, alpha_logvar_, rng);
  const nc::Var beta = compute_topics(alpha);
  const EtaChain chain = eta_chain(&rng);

  std::vector<std::size_t> times;
  for (const auto* d : batch) times.push_back(d->time_bin);
  const nc::Var eta_d = nc::gather_rows(chain.eta, times);
  const auto q = encoder_(encoder_bow(batch), eta_d, training, rng);
  const nc::Var theta = nc::softmax(nc::reparam_sample(q.mu, q.logvar, rng), 1);

  nc::Var rec = nc::scale(model::mixture_loglik(theta, beta, batch, T_), scale);
  nc::Var kl_theta = nc::scale(nc::kl_diag_normal(q.mu, q.logvar, eta_d, hyper_.a2), scale);

  nc::Var kl_eta = nc::kl_diag_normal(chain.mu[0], chain.logvar[0], 1.0);
  for (std::size_t t = 1; t < T_; ++t)
    kl_eta = nc::add(kl_eta, nc::kl_diag_normal(chain.mu[t], chain.logvar[t], nc::slice_rows(chain.eta, t - 1, 1),
                                                hyper_.delta2));

  nc::Var kl_alpha =
      nc::kl_diag_normal(nc::gather_rows(alpha_mu_, first_rows_), nc::gather_rows(alpha_logvar_, first_rows_), 1.0);
  if (T_ > 1)
    kl_alpha = nc::add(kl_alpha, nc::kl_diag_normal(nc::gather_rows(alpha_mu_, later_rows_),
                                                    nc::gather_rows(alpha_logvar_, later_rows_),
                                                    nc::gather_rows(alpha, prev_rows_), hyper_.gamma2));

  auto terms = model::combine_elbo(std::move(rec), std::move(kl_theta), std::move(kl_eta), std::move(kl_alpha));
  model::require_finite(terms.values(), "detm elbo");
  return terms;
}

nc::Tensor Detm::topic_matrix() const { return compute_topics(nc::constant(alpha_mu_->value))->value; }

nc::Tensor Detm::infer_theta(model::DocBatch docs) const {
  if (docs.empty()) return nc::Tensor({0, hyper_.K});
  std::vector<std::size_t> times;
  for (const auto* d : docs) times.push_back(d->time_bin);
  const nc::Var eta_d = nc::gather_rows(nc::constant(eta_mean()), times);
  nc::Rng unused(0);
  const auto q = encoder_(encoder_bow(docs), eta_d, false, unused);
  return nc::softmax(q.mu, 1)->value;
}

std::vector<double> Detm::new_word_scores(std::span<const double> embedding) const {
  if (embedding.size() != L_)
    throw ShapeError("new_word_scores: embedding of length " + std::to_string(embedding.size()) + ", expected L=" +
                     std::to_string(L_));
  const auto& a = alpha_mu_->value;
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t l = 0; l < L_; ++l) out[r] += a.at(r, l) * embedding[l];
  return out;
}

std::unique_ptr<nc::Optimizer> Detm::make_optimizer() {
  nc::ParamGroup network{store_.of_kind(nc::ParamKind::kNetwork), hyper_.lr, hyper_.weight_decay};
  nc::ParamGroup variational{store_.of_kind(nc::ParamKind::kVariationalMean), hyper_.lr, 0.0};
  for (auto& p : store_.of_kind(nc::ParamKind::kVariationalScale)) variational.params.push_back(p);
  return std::make_unique<nc::Adam>(std::vector<nc::ParamGroup>{std::move(network), std::move(variational)});
}

}  // namespace detm
