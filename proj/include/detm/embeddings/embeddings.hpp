// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "detm/corpus/corpus.hpp"
#include "detm/corpus/vocabulary.hpp"
#include "detm/numcore/tensor.hpp"

namespace detm::emb {

/// Word embeddings rho (L x V): column v is the vector of term v.
struct EmbeddingMatrix {
  nc::Tensor rho;
  std::string vocab_hash;

  std::size_t L() const { return rho.rows(); }
  std::size_t V() const { return rho.cols(); }
};

/// Throws DataError unless `emb` was built for `vocab`.
void require_bound_to(const EmbeddingMatrix& emb, const corpus::Vocabulary& vocab);

struct SkipGramConfig {
  std::size_t dim = 300;
  std::size_t window = 5;
  std::size_t negatives = 10;
  /// Initial step size; decays linearly to lr * 1e-4 over training.
  double lr = 0.025;
  std::size_t epochs = 5;
  /// Frequent-word subsampling threshold; <= 0 disables subsampling.
  double subsample = 1e-4;
  std::uint64_t seed = 1;
};

struct SkipGramResult {
  EmbeddingMatrix embeddings;  // input (center-word) vectors
  nc::Tensor context;          // output (context-word) vectors, L x V
  std::vector<double> epoch_loss;  // mean negative-sampling loss per pair
};

/// Skip-gram with negative sampling over the given documents (each document
/// is one sentence). Single-threaded and deterministic under `seed`.
/// Throws DataError if no (center, context) pair exists.
SkipGramResult train_skipgram(std::span<const corpus::TimedDocument> docs, const corpus::Vocabulary& vocab,
                              const SkipGramConfig& config);

struct LoadReport {
  std::size_t oov_initialized = 0;  // vocabulary terms missing from the file
  std::size_t unused_rows = 0;      // file rows whose term is not in the vocabulary
};

/// word2vec text format: a "count dim" header line, then "term v1 ... vdim".
/// Terms missing from the file get N(0, 0.1^2) vectors drawn from `seed`.
/// Throws DataError if the file's dimension differs from `dim`.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const corpus::Vocabulary& vocab, std::size_t dim,
                                std::uint64_t seed, LoadReport* report = nullptr);

/// Writes every column in vocabulary order using shortest round-trip
/// formatting, so save followed by load is bitwise exact.
void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& emb, const corpus::Vocabulary& vocab);

}  // namespace detm::emb
