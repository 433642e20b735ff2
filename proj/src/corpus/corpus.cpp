// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "detm/errors.hpp"

namespace detm::corpus {

std::vector<TermCount> count_terms(std::span<const TermId> tokens) {
  std::map<TermId, std::uint32_t> m;
  for (auto t : tokens) ++m[t];
  std::vector<TermCount> out;
  out.reserve(m.size());
  for (auto [t, c] : m) out.push_back({t, c});
  return out;
}

TimedDocument TimedDocument::from_tokens(std::vector<TermId> tokens, std::uint32_t time_bin,
                                         std::string source_id) {
  TimedDocument d;
  d.counts = count_terms(tokens);
  d.tokens = std::move(tokens);
  d.time_bin = time_bin;
  d.source_id = std::move(source_id);
  return d;
}

TimeBinning bin_years(std::span<const std::int64_t> years, int bin_width) {
  if (bin_width < 1) throw ConfigError("bin_width must be >= 1");
  TimeBinning out;
  if (years.empty()) return out;
  const std::int64_t first = *std::min_element(years.begin(), years.end());
  auto key_of = [&](std::int64_t y) { return first + ((y - first) / bin_width) * bin_width; };
  std::map<std::int64_t, std::uint32_t> index;
  for (auto y : years) index.emplace(key_of(y), 0);
  std::uint32_t next = 0;
  for (auto& [key, id] : index) {
    id = next++;
    out.labels.push_back(bin_width == 1 ? std::to_string(key)
                                        : std::to_string(key) + "-" + std::to_string(key + bin_width - 1));
  }
  out.bins.reserve(years.size());
  for (auto y : years) out.bins.push_back(index.at(key_of(y)));
  return out;
}

CorpusSplit split_and_bin(std::vector<TimedDocument> docs, std::span<const std::int64_t> years,
                          const SplitConfig& config) {
  if (years.size() != docs.size()) throw DataError("split_and_bin: one timestamp per document required");
  const double total = config.ratios[0] + config.ratios[1] + config.ratios[2];
  for (double r : config.ratios)
    if (r < 0.0) throw ConfigError("split ratios must be non-negative");
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (docs.empty()) throw DataError("split_and_bin: no documents");

  const TimeBinning binning = bin_years(years, config.bin_width);
  for (std::size_t i = 0; i < docs.size(); ++i) docs[i].time_bin = binning.bins[i];

  const std::size_t n = docs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::llround(config.ratios[0] * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train,
                              static_cast<std::size_t>(std::llround(config.ratios[1] * static_cast<double>(n))));
  std::vector<int> which(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) which[order[i]] = 0;
    else if (i < n_train + n_val) which[order[i]] = 1;
  }

  CorpusSplit split;
  split.T = binning.labels.size();
  split.bin_labels = binning.labels;
  for (std::size_t i = 0; i < n; ++i) {
    if (which[i] == 0) split.train.push_back(std::move(docs[i]));
    else if (docs[i].length() >= 2) (which[i] == 1 ? split.validation : split.test).push_back(std::move(docs[i]));
  }

  std::vector<bool> seen(split.T, false);
  for (const auto& d : split.train) seen[d.time_bin] = true;
  for (std::size_t t = 0; t < split.T; ++t) {
    if (!seen[t]) {
      throw DataError("time bin " + std::to_string(t) + " (" + split.bin_labels[t] +
                      ") has no training documents");
    }
  }
  return split;
}

nc::Tensor aggregate_by_time(const CorpusSplit& split, std::size_t vocab_size) {
  nc::Tensor out({split.T, vocab_size}, 0.0);
  std::vector<std::size_t> per_bin(split.T, 0);
  for (const auto& d : split.train) {
    if (d.time_bin >= split.T) throw DataError("document time bin out of range");
    if (d.length() == 0) continue;
    const double inv = 1.0 / static_cast<double>(d.length());
    for (const auto& tc : d.counts) out.at(d.time_bin, tc.term) += tc.count * inv;
    ++per_bin[d.time_bin];
  }
  for (std::size_t t = 0; t < split.T; ++t) {
    if (per_bin[t] == 0) continue;
    const double inv = 1.0 / static_cast<double>(per_bin[t]);
    for (std::size_t v = 0; v < vocab_size; ++v) out.at(t, v) *= inv;
  }
  return out;
}

nc::Tensor normalized_bow(std::span<const TimedDocument* const> docs, std::size_t vocab_size) {
  nc::Tensor out({docs.size(), vocab_size}, 0.0);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto* d = docs[i];
    if (d->length() == 0) throw DataError("empty document '" + d->source_id + "'");
    const double inv = 1.0 / static_cast<double>(d->length());
    for (const auto& tc : d->counts) out.at(i, tc.term) = tc.count * inv;
  }
  return out;
}

}  // namespace detm::corpus
