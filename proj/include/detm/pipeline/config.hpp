// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one INI-style file with a section per module.
//
//   [run]
//   seed = 7
//   model = detm
//
//   [detm]
//   K = 20
//
// Comments start with '#' or ';'. Unknown sections or keys are errors.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "detm/corpus/io.hpp"
#include "detm/detm/detm.hpp"
#include "detm/detm/synthetic.hpp"
#include "detm/dlda/dlda.hpp"
#include "detm/embeddings/embeddings.hpp"
#include "detm/eval/metrics.hpp"

namespace detm::pipeline {

struct RunConfig {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string model = "detm";  // detm | dlda-rep
  /// "default" (built-in English list), "none", or a path to a word list.
  std::string stopwords = "default";

  corpus::PreprocessConfig preprocess;
  emb::SkipGramConfig skipgram;
  DetmHyperparams detm;
  DldaHyperparams dlda;
  eval::MetricConfig metrics;
  SyntheticConfig synth;
  std::size_t export_top_n = 10;

  /// Applies "section.key" = value. Throws ConfigError for unknown keys or
  /// unparsable values.
  void set(const std::string& dotted_key, const std::string& value);
  std::string get(const std::string& dotted_key) const;
  static std::vector<std::string> keys();

  /// Reads a config file on top of the current values.
  void merge_file(const std::filesystem::path& path);
  /// Copies the run seed and thread count into every component and resolves
  /// the stop-word list. Idempotent.
  void resolve();
  void validate() const;

  /// Every key in a stable order, preceded by a version comment.
  std::string to_ini() const;
};

/// Writes resolved_config.ini into `dir`.
void write_resolved_config(const std::filesystem::path& dir, const RunConfig& config);

}  // namespace detm::pipeline
