// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "detm/corpus/corpus.hpp"
#include "detm/corpus/vocabulary.hpp"
#include "detm/numcore/tensor.hpp"

namespace detm {

struct SyntheticConfig {
  std::size_t K = 3;
  std::size_t T = 5;
  std::size_t V = 100;
  std::size_t L = 10;
  double delta2 = 0.005;
  double gamma2 = 0.005;
  double a2 = 1.0;
  std::size_t n_docs = 2000;
  double tokens_per_doc = 40.0;  // Poisson mean; every document gets >= 2 tokens
  std::uint64_t seed = 1;
  corpus::SplitConfig split;
};

struct SyntheticTruth {
  nc::Tensor rho;    // L x V
  nc::Tensor alpha;  // (K*T) x L
  nc::Tensor eta;    // T x K
  nc::Tensor beta;   // (K*T) x V
  nc::Tensor theta;  // n_docs x K, indexed by generation order
  std::vector<std::vector<std::uint32_t>> z;  // per document, per token
  std::vector<std::uint32_t> doc_time;        // per document
};

struct SyntheticCorpus {
  corpus::Vocabulary vocab;
  corpus::CorpusSplit split;  // source_id of each document is its generation index
  SyntheticTruth truth;
};

/// Draws a corpus from the DETM generative process: alpha and eta random
/// walks (N(0, I) at t = 0), theta_d = softmax(eta_{t_d} + a * eps), then
/// z ~ Cat(theta_d) and w ~ Cat(beta_z^(t_d)) per token. Documents are
/// spread round-robin over time steps. rho defaults to N(0, 1) entries.
SyntheticCorpus sample_corpus(const SyntheticConfig& config, const std::optional<nc::Tensor>& rho = std::nullopt);

}  // namespace detm
