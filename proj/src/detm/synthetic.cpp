// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/detm/synthetic.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "detm/errors.hpp"
#include "detm/numcore/random.hpp"

namespace detm {
namespace {

void softmax_inplace(std::span<double> x) {
  double mx = x[0];
  for (double v : x) mx = std::max(mx, v);
  double z = 0.0;
  for (double& v : x) z += (v = std::exp(v - mx));
  for (double& v : x) v /= z;
}

}  // namespace

SyntheticCorpus sample_corpus(const SyntheticConfig& c, const std::optional<nc::Tensor>& rho_in) {
  if (c.K < 1 || c.T < 1 || c.V < 1 || c.L < 1) throw ConfigError("synthetic: K, T, V and L must be >= 1");
  if (c.delta2 < 0 || c.gamma2 < 0 || c.a2 < 0) throw ConfigError("synthetic: variances must be >= 0");
  if (c.n_docs < 1) throw ConfigError("synthetic: n_docs must be >= 1");
  if (!(c.tokens_per_doc > 0)) throw ConfigError("synthetic: tokens_per_doc must be > 0");

  nc::Rng rng(c.seed);
  SyntheticTruth truth;
  const std::size_t K = c.K, T = c.T, V = c.V, L = c.L;

  if (rho_in) {
    if (rho_in->rank() != 2 || rho_in->rows() != L || rho_in->cols() != V)
      throw ShapeError("synthetic: rho must be " + std::to_string(L) + "x" + std::to_string(V));
    truth.rho = *rho_in;
  } else {
    truth.rho = rng.normal_tensor({L, V});
  }

  // Topic embeddings: alpha_k^(0) ~ N(0, I), alpha_k^(t) ~ N(alpha_k^(t-1), gamma2 I).
  truth.alpha = nc::Tensor({K * T, L});
  const double g = std::sqrt(c.gamma2);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t l = 0; l < L; ++l)
        truth.alpha.at(k * T + t, l) = t == 0 ? rng.normal() : truth.alpha.at(k * T + t - 1, l) + g * rng.normal();

  // Latent means: eta_0 ~ N(0, I), eta_t ~ N(eta_{t-1}, delta2 I).
  truth.eta = nc::Tensor({T, K});
  const double d = std::sqrt(c.delta2);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < K; ++k) truth.eta.at(t, k) = t == 0 ? rng.normal() : truth.eta.at(t - 1, k) + d * rng.normal();

  truth.beta = nc::Tensor({K * T, V});
  for (std::size_t r = 0; r < K * T; ++r) {
    for (std::size_t v = 0; v < V; ++v) {
      double s = 0.0;
      for (std::size_t l = 0; l < L; ++l) s += truth.rho.at(l, v) * truth.alpha.at(r, l);
      truth.beta.at(r, v) = s;
    }
    softmax_inplace({truth.beta.ptr() + r * V, V});
  }

  std::vector<std::discrete_distribution<std::uint32_t>> word_dist;
  for (std::size_t r = 0; r < K * T; ++r)
    word_dist.emplace_back(truth.beta.ptr() + r * V, truth.beta.ptr() + (r + 1) * V);
  std::poisson_distribution<std::uint32_t> length_dist(c.tokens_per_doc);

  truth.theta = nc::Tensor({c.n_docs, K});
  const double a = std::sqrt(c.a2);
  std::vector<corpus::TimedDocument> docs;
  std::vector<std::int64_t> years;
  for (std::size_t n = 0; n < c.n_docs; ++n) {
    const std::uint32_t t = static_cast<std::uint32_t>(n % T);
    std::span<double> theta(truth.theta.ptr() + n * K, K);
    for (std::size_t k = 0; k < K; ++k) theta[k] = truth.eta.at(t, k) + a * rng.normal();
    softmax_inplace(theta);
    std::discrete_distribution<std::uint32_t> topic_dist(theta.begin(), theta.end());

    const std::uint32_t len = std::max<std::uint32_t>(2, length_dist(rng.engine()));
    std::vector<corpus::TermId> tokens(len);
    auto& z = truth.z.emplace_back(len);
    for (std::uint32_t i = 0; i < len; ++i) {
      z[i] = topic_dist(rng.engine());
      tokens[i] = word_dist[z[i] * T + t](rng.engine());
    }
    truth.doc_time.push_back(t);
    docs.push_back(corpus::TimedDocument::from_tokens(std::move(tokens), t, std::to_string(n)));
    years.push_back(t);
  }

  std::vector<std::string> terms;
  std::vector<std::size_t> df(V, 0);
  for (std::size_t v = 0; v < V; ++v) terms.push_back(fmt::format("w{:05d}", v));
  for (const auto& doc : docs)
    for (const auto& tc : doc.counts) ++df[tc.term];

  SyntheticCorpus out;
  out.vocab = corpus::Vocabulary(std::move(terms), std::move(df));
  out.split = corpus::split_and_bin(std::move(docs), years, c.split);
  out.truth = std::move(truth);
  return out;
}

}  // namespace detm
