// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Interface shared by DETM and the DLDA-rep baseline. Training, checkpoints
// and every metric go through it, so both models are evaluated by the same
// code.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include <json.hpp>

#include "detm/corpus/corpus.hpp"
#include "detm/numcore/autograd.hpp"
#include "detm/numcore/optim.hpp"
#include "detm/numcore/params.hpp"
#include "detm/numcore/random.hpp"

namespace detm::model {

using DocBatch = std::span<const corpus::TimedDocument* const>;

struct ElboBreakdown {
  double rec_loglik = 0.0;
  double kl_theta = 0.0;
  double kl_eta = 0.0;
  double kl_alpha = 0.0;  // KL of the topic chain (alpha for DETM, beta-tilde for DLDA-rep)
  double elbo = 0.0;
};

/// Single-sample ELBO estimate as graph nodes. `elbo` is built as
/// ((rec - kl_theta) - kl_eta) - kl_alpha.
struct ElboTerms {
  nc::Var rec;
  nc::Var kl_theta;
  nc::Var kl_eta;
  nc::Var kl_alpha;
  nc::Var elbo;

  ElboBreakdown values() const;
};

ElboTerms combine_elbo(nc::Var rec, nc::Var kl_theta, nc::Var kl_eta, nc::Var kl_alpha);

/// Throws NumericalError listing every term if any is non-finite.
void require_finite(const ElboBreakdown& b, const char* where);

class TopicModel {
 public:
  virtual ~TopicModel() = default;

  virtual std::string model_type() const = 0;
  virtual std::size_t num_topics() const = 0;
  virtual std::size_t num_times() const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual const std::string& vocab_hash() const = 0;

  /// Topics at the variational means, (K*T) x V with row k*T + t.
  virtual nc::Tensor topic_matrix() const = 0;

  /// Topic proportions softmax(mu) for each document, computed with the
  /// mean of eta at the document's time step and no dropout. B x K.
  virtual nc::Tensor infer_theta(DocBatch docs) const = 0;

  /// One Monte Carlo ELBO estimate over `batch`; document-local terms are
  /// scaled by D / |batch|. All randomness comes from `rng`.
  virtual ElboTerms elbo(DocBatch batch, std::size_t D, nc::Rng& rng, bool training) = 0;

  virtual nc::ParamStore& store() = 0;
  virtual const nc::ParamStore& store() const = 0;
  virtual std::unique_ptr<nc::Optimizer> make_optimizer() = 0;

  /// Called before every epoch (also after a resume).
  virtual void begin_epoch(std::size_t /*epoch*/, nc::Optimizer& /*opt*/) {}
  /// Epochs before which early stopping is not tracked.
  virtual std::size_t warmup_epochs() const { return 0; }

  virtual nlohmann::json hyperparams_json() const = 0;
};

/// Row of topic k at time t in a topic matrix.
inline std::size_t topic_row(std::size_t k, std::size_t t, std::size_t T) { return k * T + t; }

/// Mean per-token log-likelihood of whole documents under infer_theta and
/// topic_matrix (both at variational means). Used for early stopping.
double heldout_reconstruction(const TopicModel& model, std::span<const corpus::TimedDocument> docs);

}  // namespace detm::model
