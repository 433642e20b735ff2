// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace detm::corpus {

struct TokenizationConfig {
  bool lowercase = true;
  /// Tokens shorter than this are dropped (single letters by default).
  std::size_t min_token_length = 2;
};

/// Splits on every byte that is not an ASCII letter, so digits, punctuation
/// and non-ASCII code units all act as separators.
std::vector<std::string> tokenize(std::string_view text, const TokenizationConfig& config = {});

/// The built-in English stop-word list (the 179-word NLTK English list).
const std::set<std::string>& default_stopwords();

/// One word per line; blank lines and lines starting with '#' are ignored.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

}  // namespace detm::corpus
