// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end steps shared by the C API and the command-line tool. Every step
// that writes a directory also writes resolved_config.ini into it.

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "detm/corpus/io.hpp"
#include "detm/embeddings/embeddings.hpp"
#include "detm/eval/metrics.hpp"
#include "detm/model/checkpoint.hpp"
#include "detm/model/trainer.hpp"
#include "detm/pipeline/config.hpp"

namespace detm::pipeline {

namespace fs = std::filesystem;

struct PreprocessResult {
  corpus::CorpusBundle bundle;
  corpus::PreprocessReport report;
};

/// Reads a JSONL file or a directory of text files and writes a bundle.
PreprocessResult run_preprocess(const RunConfig& config, const fs::path& input, const fs::path& out_dir);

/// Skip-gram on the training split; writes embeddings.txt.
emb::EmbeddingMatrix run_embed(const RunConfig& config, const corpus::CorpusBundle& bundle,
                                      const fs::path& out_dir);

/// Loads word2vec-format vectors for the bundle's vocabulary.
emb::EmbeddingMatrix load_vectors(const RunConfig& config, const corpus::CorpusBundle& bundle,
                                         const fs::path& path);

struct TrainOutcome {
  std::unique_ptr<model::TopicModel> model;
  model::TrainerState state;
};

/// Trains config.model into `checkpoint_dir`, saving after every epoch (and
/// once before the first). With `resume`, continues from the checkpoint in
/// that directory; embeddings are then not needed. DETM needs embeddings
/// bound to the bundle's vocabulary, checked before any computation.
TrainOutcome run_train(const RunConfig& config, const corpus::CorpusBundle& bundle,
                       const emb::EmbeddingMatrix* embeddings, const fs::path& checkpoint_dir, bool resume);

/// Loads a checkpoint and, given a bundle, checks it against the bundle's
/// vocabulary and time steps.
model::LoadedCheckpoint load_model(const fs::path& checkpoint_dir, const corpus::CorpusBundle* bundle);

/// Writes metrics.json and metrics.csv.
eval::MetricReport run_eval(const RunConfig& config, const model::TopicModel& model,
                            const corpus::CorpusBundle& bundle, const fs::path& out_dir);

struct TopicRow {
  std::size_t t, k, rank;
  std::string term;
  double prob;
};

struct CurveRow {
  std::size_t t, k;
  std::string term;
  double prob;
};

std::vector<TopicRow> topic_rows(const model::TopicModel& model, const corpus::Vocabulary& vocab, std::size_t top_n);

/// Probability series of each known term for every (t, k). Unknown terms are
/// appended to `skipped`.
std::vector<CurveRow> word_curve_rows(const model::TopicModel& model, const corpus::Vocabulary& vocab,
                                      const std::vector<std::string>& terms, std::vector<std::string>& skipped);

/// CSV unless the path ends in ".json".
void write_topics(const fs::path& path, const std::vector<TopicRow>& rows);
void write_word_curves(const fs::path& path, const std::vector<CurveRow>& rows, const std::vector<std::string>& skipped);

/// Samples a corpus from the generative process. Writes the bundle, the true
/// embeddings (embeddings.txt) and the remaining ground truth under truth/.
corpus::CorpusBundle run_synth(const RunConfig& config, const fs::path& out_dir);

}  // namespace detm::pipeline
