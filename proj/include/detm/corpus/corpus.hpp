// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detm/corpus/vocabulary.hpp"
#include "detm/numcore/tensor.hpp"

namespace detm::corpus {

struct TermCount {
  TermId term;
  std::uint32_t count;
  friend bool operator==(const TermCount&, const TermCount&) = default;
};

/// A document after vocabulary filtering. `counts` is sorted by term id and
/// always sums to tokens.size().
struct TimedDocument {
  std::vector<TermId> tokens;
  std::vector<TermCount> counts;
  std::uint32_t time_bin = 0;
  std::string source_id;

  std::size_t length() const { return tokens.size(); }

  static TimedDocument from_tokens(std::vector<TermId> tokens, std::uint32_t time_bin,
                                   std::string source_id = {});
  friend bool operator==(const TimedDocument&, const TimedDocument&) = default;
};

/// Sparse counts for an arbitrary token sequence (sorted by term id).
std::vector<TermCount> count_terms(std::span<const TermId> tokens);

struct CorpusSplit {
  std::vector<TimedDocument> train;
  std::vector<TimedDocument> validation;
  std::vector<TimedDocument> test;
  std::size_t T = 0;
  std::vector<std::string> bin_labels;
};

struct SplitConfig {
  std::array<double, 3> ratios = {0.85, 0.05, 0.10};
  std::uint64_t seed = 1;
  /// Years per time bin.
  int bin_width = 1;
};

struct TimeBinning {
  std::vector<std::uint32_t> bins;  // per input document
  std::vector<std::string> labels;  // per bin
};

/// Dense bins over the distinct (width-aligned) years that occur.
TimeBinning bin_years(std::span<const std::int64_t> years, int bin_width);

/// Shuffles with `seed`, cuts at the configured ratios, drops documents with
/// fewer than 2 tokens from validation and test, and assigns time bins.
/// Within each split documents keep their input order. Throws DataError if
/// some bin has no training document.
CorpusSplit split_and_bin(std::vector<TimedDocument> docs, std::span<const std::int64_t> years,
                          const SplitConfig& config);

/// Row t is the mean, over training documents in bin t, of each document's
/// normalized bag of words (T x V).
nc::Tensor aggregate_by_time(const CorpusSplit& split, std::size_t vocab_size);

/// Normalized bag of words for a batch of documents (B x V).
nc::Tensor normalized_bow(std::span<const TimedDocument* const> docs, std::size_t vocab_size);

}  // namespace detm::corpus
