// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/corpus/vocabulary.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <unordered_set>

#include "detm/errors.hpp"

namespace detm::corpus {

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)) {
  if (doc_freq_.size() != terms_.size()) throw DataError("vocabulary: term and doc_freq counts differ");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!id_of_.emplace(terms_[i], static_cast<TermId>(i)).second)
      throw DataError("vocabulary: duplicate term '" + terms_[i] + "'");
  }
}

std::optional<TermId> Vocabulary::find(const std::string& term) const {
  auto it = id_of_.find(term);
  if (it == id_of_.end()) return std::nullopt;
  return it->second;
}

std::string vocabulary_hash(const std::vector<std::string>& terms) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const auto& t : terms) {
    for (char c : t) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Vocabulary::hash() const { return vocabulary_hash(terms_); }

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, const VocabConfig& config) {
  if (config.min_df < 1) throw ConfigError("min_df must be >= 1");
  if (!(config.max_df_fraction > 0.0 && config.max_df_fraction <= 1.0))
    throw ConfigError("max_df_fraction must lie in (0, 1]");

  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& tok : doc)
      if (seen.insert(tok).second) ++df[tok];
  }

  const double n_docs = static_cast<double>(docs.size());
  std::size_t n_rare = 0, n_common = 0, n_stop = 0;
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [term, count] : df) {
    if (config.stopwords.count(term)) {
      ++n_stop;
    } else if (count < config.min_df) {
      ++n_rare;
    } else if (static_cast<double>(count) / n_docs > config.max_df_fraction) {
      ++n_common;
    } else {
      kept.emplace_back(term, count);
    }
  }
  if (kept.empty()) {
    throw DataError("empty vocabulary: " + std::to_string(docs.size()) + " documents, " +
                    std::to_string(df.size()) + " distinct terms; removed " + std::to_string(n_stop) +
                    " stop words, " + std::to_string(n_rare) + " below min_df=" +
                    std::to_string(config.min_df) + ", " + std::to_string(n_common) +
                    " above max_df_fraction=" + std::to_string(config.max_df_fraction));
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (auto& [t, c] : kept) {
    terms.push_back(std::move(t));
    freqs.push_back(c);
  }
  return Vocabulary(std::move(terms), std::move(freqs));
}

}  // namespace detm::corpus
