// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "detm/errors.hpp"
#include "detm/model/likelihood.hpp"

namespace detm::eval {

namespace {

void require_beta(const nc::Tensor& beta, std::size_t K, std::size_t T) {
  if (beta.rank() != 2 || beta.rows() != K * T)
    throw ShapeError(fmt::format("topic matrix {} does not have K*T = {} rows", nc::shape_str(beta.shape()), K * T));
}

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

std::string csv_number(double x) { return std::isfinite(x) ? fmt::format("{}", x) : std::string(); }

}  // namespace

std::vector<corpus::TermId> top_terms(const nc::Tensor& beta, std::size_t row, std::size_t n) {
  const std::size_t V = beta.cols();
  if (n > V) throw ConfigError(fmt::format("top_n = {} exceeds the vocabulary size {}", n, V));
  const double* p = beta.ptr() + row * V;
  std::vector<corpus::TermId> ids(V);
  std::iota(ids.begin(), ids.end(), 0u);
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [p](corpus::TermId a, corpus::TermId b) { return p[a] > p[b] || (p[a] == p[b] && a < b); });
  ids.resize(n);
  return ids;
}

ReferenceCorpus::ReferenceCorpus(std::span<const corpus::TimedDocument> docs, std::size_t vocab_size)
    : D_(docs.size()), postings_(vocab_size) {
  if (docs.empty()) throw DataError("coherence reference corpus is empty");
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (const auto& tc : docs[d].counts) {
      if (tc.term >= vocab_size) throw DataError(fmt::format("term id {} outside vocabulary of {}", tc.term, vocab_size));
      postings_[tc.term].push_back(static_cast<std::uint32_t>(d));
    }
}

std::size_t ReferenceCorpus::co_doc_freq(corpus::TermId a, corpus::TermId b) const {
  const auto &x = postings_.at(a), &y = postings_.at(b);
  std::size_t n = 0;
  auto i = x.begin(), j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double npmi(const ReferenceCorpus& ref, corpus::TermId a, corpus::TermId b) {
  const double D = static_cast<double>(ref.num_docs());
  const std::size_t da = ref.doc_freq(a), db = ref.doc_freq(b);
  if (da == 0 || db == 0) return -1.0;
  const std::size_t dab = ref.co_doc_freq(a, b);
  if (dab == ref.num_docs()) return 0.0;
  const double pa = static_cast<double>(da) / D, pb = static_cast<double>(db) / D;
  const double pab = static_cast<double>(dab) / D;
  const double value = std::log((pab + kNpmiEpsilon) / (pa * pb)) / -std::log(pab + kNpmiEpsilon);
  return std::clamp(value, -1.0, 1.0);
}

PerTimeScore topic_coherence(const nc::Tensor& beta, std::size_t K, std::size_t T, const ReferenceCorpus& ref,
                             std::size_t top_n) {
  require_beta(beta, K, T);
  if (top_n < 2) throw ConfigError("coherence needs top_n >= 2");
  PerTimeScore out;
  for (std::size_t t = 0; t < T; ++t) {
    double over_k = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const auto top = top_terms(beta, model::topic_row(k, t, T), top_n);
      double s = 0.0;
      for (std::size_t i = 0; i < top_n; ++i)
        for (std::size_t j = i + 1; j < top_n; ++j) s += npmi(ref, top[i], top[j]);
      over_k += s / static_cast<double>(top_n * (top_n - 1) / 2);
    }
    out.per_time.push_back(over_k / static_cast<double>(K));
  }
  out.mean = std::accumulate(out.per_time.begin(), out.per_time.end(), 0.0) / static_cast<double>(T);
  return out;
}

PerTimeScore topic_diversity(const nc::Tensor& beta, std::size_t K, std::size_t T, std::size_t top_n) {
  require_beta(beta, K, T);
  if (top_n < 1) throw ConfigError("diversity needs top_n >= 1");
  PerTimeScore out;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<corpus::TermId> all;
    for (std::size_t k = 0; k < K; ++k) {
      auto top = top_terms(beta, model::topic_row(k, t, T), top_n);
      all.insert(all.end(), top.begin(), top.end());
    }
    std::sort(all.begin(), all.end());
    const auto unique = static_cast<double>(std::unique(all.begin(), all.end()) - all.begin());
    out.per_time.push_back(unique / static_cast<double>(top_n * K));
  }
  out.mean = std::accumulate(out.per_time.begin(), out.per_time.end(), 0.0) / static_cast<double>(T);
  return out;
}

PerplexityResult doc_completion_perplexity(const ThetaFn& infer_theta, const nc::Tensor& beta, std::size_t K,
                                           std::size_t T, std::span<const corpus::TimedDocument> docs) {
  require_beta(beta, K, T);
  std::vector<corpus::TimedDocument> first, second;
  for (const auto& d : docs) {
    if (d.length() < 2) continue;
    if (d.time_bin >= T) throw DataError(fmt::format("document time bin {} outside T = {}", d.time_bin, T));
    const std::size_t cut = (d.length() + 1) / 2;
    first.push_back(corpus::TimedDocument::from_tokens({d.tokens.begin(), d.tokens.begin() + cut}, d.time_bin));
    second.push_back(corpus::TimedDocument::from_tokens({d.tokens.begin() + cut, d.tokens.end()}, d.time_bin));
  }
  if (first.empty()) throw DataError("perplexity: no test document has at least 2 tokens");

  PerplexityResult r;
  std::vector<double> lp_t(T, 0.0), n_t(T, 0.0);
  constexpr std::size_t kChunk = 512;
  for (std::size_t start = 0; start < first.size(); start += kChunk) {
    const std::size_t end = std::min(first.size(), start + kChunk);
    std::vector<const corpus::TimedDocument*> chunk;
    for (std::size_t i = start; i < end; ++i) chunk.push_back(&first[i]);
    const nc::Tensor theta = infer_theta(chunk);
    if (theta.rank() != 2 || theta.rows() != chunk.size() || theta.cols() != K)
      throw ShapeError("perplexity: inferred theta has shape " + nc::shape_str(theta.shape()));
    for (std::size_t i = start; i < end; ++i) {
      const auto& d = second[i];
      const double lp =
          model::doc_log_likelihood(d, std::span<const double>(theta.ptr() + (i - start) * K, K), beta, T);
      r.log_prob += lp;
      r.tokens += d.length();
      lp_t[d.time_bin] += lp;
      n_t[d.time_bin] += static_cast<double>(d.length());
    }
  }
  r.documents = first.size();
  r.perplexity = std::exp(-r.log_prob / static_cast<double>(r.tokens));
  for (std::size_t t = 0; t < T; ++t)
    r.per_time.push_back(n_t[t] > 0 ? std::exp(-lp_t[t] / n_t[t]) : std::numeric_limits<double>::quiet_NaN());
  return r;
}

PerplexityResult doc_completion_perplexity(const model::TopicModel& model,
                                           std::span<const corpus::TimedDocument> docs) {
  return doc_completion_perplexity([&](model::DocBatch b) { return model.infer_theta(b); }, model.topic_matrix(),
                                   model.num_topics(), model.num_times(), docs);
}

MetricReport metric_report(const model::TopicModel& model, const corpus::CorpusSplit& split,
                           const MetricConfig& config) {
  MetricReport r;
  r.model_type = model.model_type();
  r.K = model.num_topics();
  r.T = model.num_times();
  r.V = model.vocab_size();
  r.config = config;
  r.time_labels = split.bin_labels;
  r.reference_corpus = "train";
  r.reference_docs = split.train.size();

  const nc::Tensor beta = model.topic_matrix();
  const auto ppl = doc_completion_perplexity([&](model::DocBatch b) { return model.infer_theta(b); }, beta, r.K, r.T,
                                             split.test);
  r.perplexity = ppl.perplexity;
  r.perplexity_per_time = ppl.per_time;
  r.test_docs = ppl.documents;
  r.test_tokens = ppl.tokens;

  const ReferenceCorpus ref(split.train, r.V);
  const auto tc = topic_coherence(beta, r.K, r.T, ref, config.coherence_top_n);
  const auto td = topic_diversity(beta, r.K, r.T, config.diversity_top_n);
  r.tc = tc.mean;
  r.td = td.mean;
  r.tq = r.tc * r.td;
  r.tc_per_time = tc.per_time;
  r.td_per_time = td.per_time;
  for (std::size_t t = 0; t < r.T; ++t) r.tq_per_time.push_back(tc.per_time[t] * td.per_time[t]);
  return r;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["model_type"] = model_type;
  j["K"] = K;
  j["T"] = T;
  j["V"] = V;
  j["perplexity"] = perplexity;
  j["tc"] = tc;
  j["td"] = td;
  j["tq"] = tq;
  auto& pt = j["per_time"];
  pt["label"] = time_labels;
  pt["perplexity"] = nlohmann::json::array();
  for (double x : perplexity_per_time) pt["perplexity"].push_back(number_or_null(x));
  pt["tc"] = tc_per_time;
  pt["td"] = td_per_time;
  pt["tq"] = tq_per_time;
  j["config"] = {{"coherence_top_n", config.coherence_top_n},
                 {"diversity_top_n", config.diversity_top_n},
                 {"npmi_epsilon", kNpmiEpsilon},
                 {"reference_corpus", reference_corpus},
                 {"reference_docs", reference_docs}};
  j["test_docs"] = test_docs;
  j["test_tokens"] = test_tokens;
  return j;
}

std::string MetricReport::to_csv() const {
  std::string out = "time,label,perplexity,tc,td,tq\n";
  out += fmt::format("all,,{},{},{},{}\n", csv_number(perplexity), csv_number(tc), csv_number(td), csv_number(tq));
  for (std::size_t t = 0; t < T; ++t) {
    out += fmt::format("{},{},{},{},{},{}\n", t, t < time_labels.size() ? time_labels[t] : "",
                       csv_number(perplexity_per_time.at(t)), csv_number(tc_per_time.at(t)),
                       csv_number(td_per_time.at(t)), csv_number(tq_per_time.at(t)));
  }
  return out;
}

}  // namespace detm::eval
