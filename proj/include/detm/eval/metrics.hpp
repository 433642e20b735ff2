// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Held-out perplexity, NPMI coherence, topic diversity and topic quality.
// Every function here is a pure function of its arguments.

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "detm/corpus/corpus.hpp"
#include "detm/model/topic_model.hpp"

namespace detm::eval {

inline constexpr double kNpmiEpsilon = 1e-10;

/// Indices of the n largest entries of row `row`, descending; ties go to the
/// lower term id.
std::vector<corpus::TermId> top_terms(const nc::Tensor& beta, std::size_t row, std::size_t n);

/// Document-level occurrence index used as the coherence reference.
class ReferenceCorpus {
 public:
  ReferenceCorpus(std::span<const corpus::TimedDocument> docs, std::size_t vocab_size);

  std::size_t num_docs() const { return D_; }
  std::size_t doc_freq(corpus::TermId v) const { return postings_.at(v).size(); }
  std::size_t co_doc_freq(corpus::TermId a, corpus::TermId b) const;

 private:
  std::size_t D_;
  std::vector<std::vector<std::uint32_t>> postings_;  // sorted document ids per term
};

/// NPMI of a term pair with document probabilities. Pairs that co-occur in
/// every document score 0, pairs involving a term absent from the reference
/// score -1; the result is clamped to [-1, 1].
double npmi(const ReferenceCorpus& ref, corpus::TermId a, corpus::TermId b);

struct PerTimeScore {
  double mean = 0.0;
  std::vector<double> per_time;
};

/// Mean pairwise NPMI of each (k, t) top list, averaged over k, then t.
PerTimeScore topic_coherence(const nc::Tensor& beta, std::size_t K, std::size_t T, const ReferenceCorpus& ref,
                             std::size_t top_n = 10);

/// Fraction of unique terms among the K top lists of each time step,
/// averaged over t.
PerTimeScore topic_diversity(const nc::Tensor& beta, std::size_t K, std::size_t T, std::size_t top_n = 25);

struct PerplexityResult {
  double perplexity = 0.0;
  double log_prob = 0.0;      // summed over second-half tokens
  std::size_t tokens = 0;     // second-half tokens
  std::size_t documents = 0;  // documents with >= 2 tokens
  std::vector<double> per_time;  // NaN where a time step has no documents
};

using ThetaFn = std::function<nc::Tensor(model::DocBatch)>;

/// Document completion: theta is inferred from the first ceil(n/2) tokens and
/// scores the remaining ones under the topics of the document's time step.
/// Per-token normalization. Throws DataError when no document has >= 2 tokens.
PerplexityResult doc_completion_perplexity(const ThetaFn& infer_theta, const nc::Tensor& beta, std::size_t K,
                                           std::size_t T, std::span<const corpus::TimedDocument> docs);
PerplexityResult doc_completion_perplexity(const model::TopicModel& model,
                                           std::span<const corpus::TimedDocument> docs);

struct MetricConfig {
  std::size_t coherence_top_n = 10;
  std::size_t diversity_top_n = 25;
};

struct MetricReport {
  std::string model_type;
  std::size_t K = 0, T = 0, V = 0;
  double perplexity = 0.0, tc = 0.0, td = 0.0, tq = 0.0;
  std::vector<double> perplexity_per_time, tc_per_time, td_per_time, tq_per_time;
  std::vector<std::string> time_labels;
  MetricConfig config;
  std::string reference_corpus;
  std::size_t reference_docs = 0;
  std::size_t test_docs = 0, test_tokens = 0;

  nlohmann::json to_json() const;
  /// One row for the whole model ("all") followed by one per time step.
  std::string to_csv() const;
};

/// Perplexity on the test split, coherence against the training split, topics
/// at variational means.
MetricReport metric_report(const model::TopicModel& model, const corpus::CorpusSplit& split,
                           const MetricConfig& config = {});

}  // namespace detm::eval
