// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace detm::corpus {

using TermId = std::uint32_t;

struct VocabConfig {
  std::size_t min_df = 1;
  double max_df_fraction = 0.7;
  std::set<std::string> stopwords;
};

/// Dense term <-> id mapping with per-term document frequencies.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq);

  std::size_t size() const { return terms_.size(); }
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::size_t doc_freq(TermId id) const { return doc_freq_.at(id); }
  std::optional<TermId> find(const std::string& term) const;

  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& doc_freqs() const { return doc_freq_; }

  /// FNV-1a 64-bit checksum of the ordered term list, as 16 hex digits.
  /// Binds embeddings and checkpoints to a vocabulary.
  std::string hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.doc_freq_ == b.doc_freq_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::unordered_map<std::string, TermId> id_of_;
};

std::string vocabulary_hash(const std::vector<std::string>& terms);

/// Keeps terms with min_df <= df and df / D <= max_df_fraction that are not
/// stop words. Document frequency is counted on the raw token lists. Order:
/// descending df, ties lexicographic. Throws DataError if nothing survives.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, const VocabConfig& config);

}  // namespace detm::corpus
