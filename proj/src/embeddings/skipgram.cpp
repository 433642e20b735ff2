// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "detm/embeddings/embeddings.hpp"
#include "detm/errors.hpp"
#include "detm/numcore/random.hpp"

namespace detm::emb {
namespace {

// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

void require_bound_to(const EmbeddingMatrix& emb, const corpus::Vocabulary& vocab) {
  if (emb.V() != vocab.size() || emb.vocab_hash != vocab.hash()) {
    throw DataError("embeddings are bound to vocabulary " + emb.vocab_hash + " (V=" + std::to_string(emb.V()) +
                    ") but the corpus vocabulary is " + vocab.hash() + " (V=" + std::to_string(vocab.size()) + ")");
  }
}

SkipGramResult train_skipgram(std::span<const corpus::TimedDocument> docs, const corpus::Vocabulary& vocab,
                              const SkipGramConfig& cfg) {
  if (cfg.dim < 1) throw ConfigError("embedding dimension must be >= 1");
  if (cfg.window < 1) throw ConfigError("skip-gram window must be >= 1");
  if (cfg.epochs < 1) throw ConfigError("skip-gram epochs must be >= 1");
  if (!(cfg.lr > 0)) throw ConfigError("skip-gram lr must be > 0");
  const std::size_t V = vocab.size(), L = cfg.dim;
  if (V == 0) throw DataError("empty vocabulary");

  std::vector<double> freq(V, 0.0);
  double total = 0.0;
  for (const auto& d : docs)
    for (const auto& tc : d.counts) {
      if (tc.term >= V) throw DataError("term id out of vocabulary range");
      freq[tc.term] += tc.count;
      total += tc.count;
    }
  bool has_pair = false;
  for (const auto& d : docs) has_pair |= d.length() >= 2;
  if (!has_pair) throw DataError("skip-gram: corpus has no (center, context) pair");

  std::vector<double> noise(V);
  for (std::size_t v = 0; v < V; ++v) noise[v] = std::pow(freq[v], 0.75);
  std::discrete_distribution<std::size_t> noise_dist(noise.begin(), noise.end());

  std::vector<double> keep(V, 1.0);
  if (cfg.subsample > 0) {
    for (std::size_t v = 0; v < V; ++v) {
      if (freq[v] == 0) continue;
      const double r = freq[v] / (cfg.subsample * total);
      keep[v] = std::min(1.0, (std::sqrt(r) + 1.0) / r);
    }
  }

  nc::Rng rng(cfg.seed);
  // Row-major V x L working copies; transposed to L x V at the end.
  std::vector<double> in(V * L), out(V * L, 0.0);
  for (auto& x : in) x = (rng.uniform() - 0.5) / static_cast<double>(L);

  const double total_steps = static_cast<double>(cfg.epochs) * total;
  double processed = 0.0;
  std::vector<double> grad_in(L);
  SkipGramResult result;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    std::vector<corpus::TermId> sent;
    for (const auto& d : docs) {
      sent.clear();
      for (auto t : d.tokens)
        if (keep[t] >= 1.0 || rng.uniform() < keep[t]) sent.push_back(t);
      for (std::size_t i = 0; i < sent.size(); ++i) {
        const double lr = cfg.lr * std::max(1e-4, 1.0 - processed / total_steps);
        processed += 1.0;
        const std::size_t b = 1 + rng.uniform_int(cfg.window);
        const std::size_t lo = i >= b ? i - b : 0, hi = std::min(sent.size() - 1, i + b);
        double* vc = &in[sent[i] * L];
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          for (std::size_t n = 0; n <= cfg.negatives; ++n) {
            std::size_t target;
            double label;
            if (n == 0) {
              target = sent[j];
              label = 1.0;
            } else {
              target = noise_dist(rng.engine());
              if (target == sent[j]) continue;
              label = 0.0;
            }
            double* uo = &out[target * L];
            double dot = 0.0;
            for (std::size_t l = 0; l < L; ++l) dot += vc[l] * uo[l];
            loss_sum -= label > 0 ? log_sigmoid(dot) : log_sigmoid(-dot);
            const double g = (label - sigmoid(dot)) * lr;
            for (std::size_t l = 0; l < L; ++l) {
              grad_in[l] += g * uo[l];
              uo[l] += g * vc[l];
            }
          }
          for (std::size_t l = 0; l < L; ++l) vc[l] += grad_in[l];
          ++pairs;
        }
      }
    }
    if (pairs == 0) throw DataError("skip-gram: subsampling left no (center, context) pair");
    result.epoch_loss.push_back(loss_sum / static_cast<double>(pairs));
    spdlog::debug("skip-gram epoch {} mean loss {:.6f} over {} pairs", epoch + 1, result.epoch_loss.back(), pairs);
  }

  result.embeddings.rho = nc::Tensor({L, V});
  result.context = nc::Tensor({L, V});
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t l = 0; l < L; ++l) {
      result.embeddings.rho.at(l, v) = in[v * L + l];
      result.context.at(l, v) = out[v * L + l];
    }
  result.embeddings.vocab_hash = vocab.hash();
  if (!result.embeddings.rho.all_finite()) throw NumericalError("skip-gram produced non-finite embeddings");
  return result;
}

}  // namespace detm::emb
