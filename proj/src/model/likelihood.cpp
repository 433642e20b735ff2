// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/model/likelihood.hpp"

#include <cmath>

#include "detm/errors.hpp"

namespace detm::model {
namespace {

void check_inputs(std::size_t B, std::size_t K, const nc::Tensor& beta, std::span<const corpus::TimedDocument* const> docs,
                  std::size_t T) {
  if (T == 0 || beta.rank() != 2 || beta.rows() != K * T)
    throw ShapeError("mixture_loglik: beta " + nc::shape_str(beta.shape()) + " does not hold K=" +
                     std::to_string(K) + " topics at T=" + std::to_string(T) + " times");
  if (docs.size() != B)
    throw ShapeError("mixture_loglik: " + std::to_string(docs.size()) + " documents for theta with " +
                     std::to_string(B) + " rows");
  const std::size_t V = beta.cols();
  for (const auto* d : docs) {
    if (d->time_bin >= T) throw DataError("mixture_loglik: time bin out of range");
    for (const auto& tc : d->counts)
      if (tc.term >= V) throw DataError("mixture_loglik: term id out of range");
  }
}

}  // namespace

nc::Var mixture_loglik(const nc::Var& theta, const nc::Var& beta, std::span<const corpus::TimedDocument* const> docs,
                       std::size_t T) {
  if (theta->value.rank() != 2) throw ShapeError("mixture_loglik: theta must be B x K");
  const std::size_t B = theta->shape()[0], K = theta->shape()[1];
  check_inputs(B, K, beta->value, docs, T);
  const std::size_t V = beta->value.cols();
  const auto& th = theta->value;
  const auto& be = beta->value;

  // Mixture probability of every observed (doc, term); reused by backward.
  std::vector<double> mix;
  double total = 0.0;
  for (std::size_t d = 0; d < B; ++d) {
    const std::size_t t = docs[d]->time_bin;
    for (const auto& tc : docs[d]->counts) {
      double p = 0.0;
      for (std::size_t k = 0; k < K; ++k) p += th.at(d, k) * be[(k * T + t) * V + tc.term];
      mix.push_back(p);
      total += tc.count * std::log(std::max(p, kMixtureFloor));
    }
  }

  std::vector<const corpus::TimedDocument*> kept(docs.begin(), docs.end());
  return nc::make_op(
      "mixture_loglik", nc::Tensor::scalar(total), {theta, beta},
      [kept = std::move(kept), mix = std::move(mix), B, K, V, T](nc::Node& n) {
        const double g = n.grad.item();
        auto& th_node = *n.parents[0];
        auto& be_node = *n.parents[1];
        const auto& th = th_node.value;
        const auto& be = be_node.value;
        nc::Tensor* gth = th_node.requires_grad ? &th_node.grad_buffer() : nullptr;
        nc::Tensor* gbe = be_node.requires_grad ? &be_node.grad_buffer() : nullptr;
        std::size_t i = 0;
        for (std::size_t d = 0; d < B; ++d) {
          const std::size_t t = kept[d]->time_bin;
          for (const auto& tc : kept[d]->counts) {
            const double p = mix[i++];
            // The floor is flat, so no gradient flows below it.
            if (p <= kMixtureFloor) continue;
            const double w = g * tc.count / p;
            for (std::size_t k = 0; k < K; ++k) {
              const std::size_t bi = (k * T + t) * V + tc.term;
              if (gth) gth->at(d, k) += w * be[bi];
              if (gbe) (*gbe)[bi] += w * th.at(d, k);
            }
          }
        }
      });
}

double doc_log_likelihood(const corpus::TimedDocument& doc, std::span<const double> theta, const nc::Tensor& beta,
                          std::size_t T) {
  const std::size_t K = theta.size();
  const corpus::TimedDocument* one[] = {&doc};
  check_inputs(1, K, beta, one, T);
  const std::size_t V = beta.cols();
  double total = 0.0;
  for (const auto& tc : doc.counts) {
    double p = 0.0;
    for (std::size_t k = 0; k < K; ++k) p += theta[k] * beta[(k * T + doc.time_bin) * V + tc.term];
    total += tc.count * std::log(std::max(p, kMixtureFloor));
  }
  return total;
}

}  // namespace detm::model
