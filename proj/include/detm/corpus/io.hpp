// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "detm/corpus/corpus.hpp"
#include "detm/corpus/text.hpp"
#include "detm/corpus/vocabulary.hpp"

namespace detm::corpus {

struct RawDocument {
  std::string text;
  std::int64_t year = 0;
  std::string source_id;
};

/// Leading (optionally signed) integer of a timestamp such as "1970",
/// "1970-05-01" or "1970_speech". Throws DataError if there is none.
std::int64_t parse_year(const std::string& timestamp);

/// One JSON object per line: {"text": ..., "timestamp": string or int}.
/// An optional "id" field becomes the source id (default: line number).
std::vector<RawDocument> load_jsonl(const std::filesystem::path& path);

/// One regular file per document; the timestamp is the leading digits of
/// the file name. Files are read in lexicographic order.
std::vector<RawDocument> load_text_directory(const std::filesystem::path& dir);

/// Dispatches on whether `path` is a directory.
std::vector<RawDocument> load_documents(const std::filesystem::path& path);

struct PreprocessConfig {
  TokenizationConfig tokenization;
  VocabConfig vocab;
  SplitConfig split;
  unsigned threads = 1;
};

struct PreprocessReport {
  std::size_t raw_documents = 0;
  std::size_t empty_dropped = 0;       // no in-vocabulary tokens left
  std::size_t short_heldout_dropped = 0;  // < 2 tokens in validation/test
  std::size_t oov_tokens_dropped = 0;
};

/// A preprocessed corpus: vocabulary plus binned splits.
struct CorpusBundle {
  Vocabulary vocab;
  CorpusSplit split;
  PreprocessConfig config;

  std::size_t V() const { return vocab.size(); }
  std::size_t T() const { return split.T; }
};

CorpusBundle preprocess(const std::vector<RawDocument>& docs, const PreprocessConfig& config,
                        PreprocessReport* report = nullptr);

/// Writes vocab.txt, docs.bin, tokens.bin, splits.json, bins.json and
/// bundle.json into `dir` (created if needed). Output is byte-identical for
/// identical bundles.
void save_bundle(const CorpusBundle& bundle, const std::filesystem::path& dir);
CorpusBundle load_bundle(const std::filesystem::path& dir);

/// "# Docs Train  # Docs Val  # Docs Test  # Timestamps  Vocabulary" header
/// plus one row.
std::string summary_table(const CorpusBundle& bundle);

}  // namespace detm::corpus
