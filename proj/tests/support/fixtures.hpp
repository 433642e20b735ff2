// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small corpora and model configurations shared by unit and acceptance
// tests.

#pragma once

#include <random>
#include <vector>

#include "detm/corpus/corpus.hpp"
#include "detm/detm/detm.hpp"
#include "detm/dlda/dlda.hpp"
#include "detm/numcore/random.hpp"

namespace detm::testing {

/// `n_docs` documents over V terms with lengths in [min_len, max_len];
/// document i sits at time i % T.
inline corpus::CorpusSplit random_split(std::size_t V, std::size_t T, std::size_t n_docs, std::uint64_t seed,
                                        std::size_t min_len = 3, std::size_t max_len = 12) {
  std::mt19937_64 rng(seed);
  corpus::CorpusSplit s;
  s.T = T;
  for (std::size_t t = 0; t < T; ++t) s.bin_labels.push_back(std::to_string(t));
  for (std::size_t i = 0; i < n_docs; ++i) {
    std::vector<corpus::TermId> toks(min_len + rng() % (max_len - min_len + 1));
    for (auto& w : toks) w = static_cast<corpus::TermId>(rng() % V);
    s.train.push_back(corpus::TimedDocument::from_tokens(toks, static_cast<std::uint32_t>(i % T), std::to_string(i)));
  }
  return s;
}

inline std::vector<const corpus::TimedDocument*> pointers(const std::vector<corpus::TimedDocument>& docs) {
  std::vector<const corpus::TimedDocument*> out;
  for (const auto& d : docs) out.push_back(&d);
  return out;
}

/// DETM with tiny networks so that finite differences stay cheap.
inline DetmHyperparams tiny_detm(std::size_t K) {
  DetmHyperparams h;
  h.K = K;
  h.encoder_hidden = 6;
  h.encoder_layers = 2;
  h.lstm_input_dim = 4;
  h.lstm_hidden = 5;
  h.lstm_layers = 2;
  h.batch_size = 5;
  h.epochs = 1;
  return h;
}

inline DldaHyperparams tiny_dlda(std::size_t K) {
  DldaHyperparams h;
  h.K = K;
  h.encoder_hidden = 6;
  h.encoder_layers = 2;
  h.batch_size = 5;
  h.tied_epochs = 1;
  h.epochs = 1;
  return h;
}

inline nc::Tensor random_rho(std::size_t L, std::size_t V, std::uint64_t seed) {
  nc::Rng rng(seed);
  return rng.normal_tensor({L, V});
}

}  // namespace detm::testing
