// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/model/topic_model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "detm/errors.hpp"
#include "detm/model/likelihood.hpp"
#include "detm/numcore/ops.hpp"

namespace detm::model {

ElboBreakdown ElboTerms::values() const {
  return {rec->value.item(), kl_theta->value.item(), kl_eta->value.item(), kl_alpha->value.item(),
          elbo->value.item()};
}

ElboTerms combine_elbo(nc::Var rec, nc::Var kl_theta, nc::Var kl_eta, nc::Var kl_alpha) {
  ElboTerms t{std::move(rec), std::move(kl_theta), std::move(kl_eta), std::move(kl_alpha), nullptr};
  t.elbo = nc::sub(nc::sub(nc::sub(t.rec, t.kl_theta), t.kl_eta), t.kl_alpha);
  return t;
}

void require_finite(const ElboBreakdown& b, const char* where) {
  if (std::isfinite(b.elbo) && std::isfinite(b.rec_loglik) && std::isfinite(b.kl_theta) &&
      std::isfinite(b.kl_eta) && std::isfinite(b.kl_alpha))
    return;
  throw NumericalError(fmt::format("{}: non-finite ELBO (elbo={}, rec_loglik={}, kl_theta={}, kl_eta={}, kl_alpha={})",
                                   where, b.elbo, b.rec_loglik, b.kl_theta, b.kl_eta, b.kl_alpha));
}

double heldout_reconstruction(const TopicModel& model, std::span<const corpus::TimedDocument> docs) {
  if (docs.empty()) return 0.0;
  const nc::Tensor beta = model.topic_matrix();
  const std::size_t T = model.num_times(), K = model.num_topics();
  constexpr std::size_t kChunk = 512;
  double total = 0.0, tokens = 0.0;
  for (std::size_t start = 0; start < docs.size(); start += kChunk) {
    std::vector<const corpus::TimedDocument*> chunk;
    for (std::size_t i = start; i < std::min(docs.size(), start + kChunk); ++i) chunk.push_back(&docs[i]);
    const nc::Tensor theta = model.infer_theta(chunk);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      total += doc_log_likelihood(*chunk[i], std::span<const double>(theta.ptr() + i * K, K), beta, T);
      tokens += static_cast<double>(chunk[i]->length());
    }
  }
  return total / tokens;
}

}  // namespace detm::model
