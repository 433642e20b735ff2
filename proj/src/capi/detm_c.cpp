// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/detm.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include <spdlog/spdlog.h>

#include "detm/errors.hpp"
#include "detm/model/checkpoint.hpp"
#include "detm/pipeline/pipeline.hpp"

using namespace detm;

struct detm_config {
  pipeline::RunConfig rep;
};

struct detm_corpus {
  corpus::CorpusBundle rep;
};

struct detm_embedding {
  emb::EmbeddingMatrix rep;
};

struct detm_model {
  std::unique_ptr<model::TopicModel> rep;
  model::TrainerState state;
};

struct detm_report {
  eval::MetricReport rep;
};

namespace {

thread_local std::string g_last_error;

detm_status fail(detm_status code, const char* what) {
  g_last_error = what;
  return code;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
detm_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return DETM_OK;
  } catch (const ConfigError& e) {
    return fail(DETM_ERR_CONFIG, e.what());
  } catch (const NumericalError& e) {
    return fail(DETM_ERR_NUMERICAL, e.what());
  } catch (const DataError& e) {
    return fail(DETM_ERR_DATA, e.what());
  } catch (const ShapeError& e) {
    return fail(DETM_ERR_DATA, e.what());
  } catch (const std::exception& e) {
    return fail(DETM_ERR_DATA, e.what());
  } catch (...) {
    return fail(DETM_ERR_DATA, "unknown error");
  }
}

#define DETM_REQUIRE(cond)                                                  \
  do {                                                                      \
    if (!(cond)) return fail(DETM_ERR_CONFIG, "invalid argument: " #cond); \
  } while (0)

pipeline::RunConfig resolved(const detm_config* c) {
  pipeline::RunConfig r = c ? c->rep : pipeline::RunConfig{};
  r.resolve();
  return r;
}

detm_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return DETM_OK;
}

}  // namespace

extern "C" {

const char* detm_version(void) { return DETM_VERSION; }

const char* detm_last_error(void) { return g_last_error.c_str(); }

void detm_set_verbosity(int level) {
  spdlog::set_level(level <= 0 ? spdlog::level::warn : level == 1 ? spdlog::level::info : spdlog::level::debug);
}

detm_status detm_config_new(detm_config** out) {
  DETM_REQUIRE(out);
  return guarded([&] { *out = new detm_config(); });
}

void detm_config_free(detm_config* config) { delete config; }

detm_status detm_config_load(detm_config* config, const char* path) {
  DETM_REQUIRE(config && path);
  return guarded([&] { config->rep.merge_file(path); });
}

detm_status detm_config_set(detm_config* config, const char* key, const char* value) {
  DETM_REQUIRE(config && key && value);
  return guarded([&] { config->rep.set(key, value); });
}

detm_status detm_config_get(const detm_config* config, const char* key, char* buf, size_t cap, size_t* needed) {
  DETM_REQUIRE(config && key);
  std::string value;
  const detm_status s = guarded([&] { value = config->rep.get(key); });
  return s == DETM_OK ? copy_out(value, buf, cap, needed) : s;
}

detm_status detm_config_write(const detm_config* config, const char* path) {
  DETM_REQUIRE(config && path);
  return guarded([&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(std::string("cannot write ") + path);
    out << config->rep.to_ini();
  });
}

detm_status detm_preprocess(const detm_config* config, const char* input, const char* out_dir, detm_corpus** out) {
  DETM_REQUIRE(input && out_dir);
  return guarded([&] {
    auto r = pipeline::run_preprocess(resolved(config), input, out_dir);
    spdlog::info("{} raw documents, {} dropped as empty, {} held-out documents dropped as too short",
                 r.report.raw_documents, r.report.empty_dropped, r.report.short_heldout_dropped);
    if (out) *out = new detm_corpus{std::move(r.bundle)};
  });
}

detm_status detm_corpus_load(const char* bundle_dir, detm_corpus** out) {
  DETM_REQUIRE(bundle_dir && out);
  return guarded([&] { *out = new detm_corpus{corpus::load_bundle(bundle_dir)}; });
}

void detm_corpus_free(detm_corpus* corpus) { delete corpus; }

size_t detm_corpus_vocab_size(const detm_corpus* corpus) { return corpus ? corpus->rep.V() : 0; }

size_t detm_corpus_num_times(const detm_corpus* corpus) { return corpus ? corpus->rep.T() : 0; }

size_t detm_corpus_num_docs(const detm_corpus* corpus, detm_split split) {
  if (!corpus) return 0;
  switch (split) {
    case DETM_SPLIT_TRAIN: return corpus->rep.split.train.size();
    case DETM_SPLIT_VALIDATION: return corpus->rep.split.validation.size();
    case DETM_SPLIT_TEST: return corpus->rep.split.test.size();
  }
  return 0;
}

detm_status detm_corpus_summary(const detm_corpus* corpus, char* buf, size_t cap, size_t* needed) {
  DETM_REQUIRE(corpus);
  std::string s;
  const detm_status st = guarded([&] { s = corpus::summary_table(corpus->rep); });
  return st == DETM_OK ? copy_out(s, buf, cap, needed) : st;
}

detm_status detm_embed(const detm_config* config, const detm_corpus* corpus, const char* out_dir,
                       detm_embedding** out) {
  DETM_REQUIRE(corpus && out_dir);
  return guarded([&] {
    auto e = pipeline::run_embed(resolved(config), corpus->rep, out_dir);
    if (out) *out = new detm_embedding{std::move(e)};
  });
}

detm_status detm_embedding_load(const detm_config* config, const detm_corpus* corpus, const char* path,
                                detm_embedding** out) {
  DETM_REQUIRE(corpus && path && out);
  return guarded([&] { *out = new detm_embedding{pipeline::load_vectors(resolved(config), corpus->rep, path)}; });
}

void detm_embedding_free(detm_embedding* embedding) { delete embedding; }

size_t detm_embedding_dim(const detm_embedding* embedding) { return embedding ? embedding->rep.L() : 0; }

detm_status detm_train(const detm_config* config, const detm_corpus* corpus, const detm_embedding* embedding,
                       const char* checkpoint_dir, int resume, detm_model** out) {
  DETM_REQUIRE(corpus && checkpoint_dir);
  return guarded([&] {
    auto r = pipeline::run_train(resolved(config), corpus->rep, embedding ? &embedding->rep : nullptr,
                                 checkpoint_dir, resume != 0);
    if (out) *out = new detm_model{std::move(r.model), std::move(r.state)};
  });
}

detm_status detm_model_load(const char* checkpoint_dir, const detm_corpus* corpus, detm_model** out) {
  DETM_REQUIRE(checkpoint_dir && out);
  return guarded([&] {
    auto loaded = pipeline::load_model(checkpoint_dir, corpus ? &corpus->rep : nullptr);
    *out = new detm_model{std::move(loaded.model), std::move(loaded.trainer)};
  });
}

void detm_model_free(detm_model* model) { delete model; }

size_t detm_model_num_topics(const detm_model* model) { return model ? model->rep->num_topics() : 0; }

size_t detm_model_epochs_done(const detm_model* model) { return model ? model->state.epochs_done : 0; }

double detm_model_last_elbo(const detm_model* model) {
  if (!model || model->state.log.empty()) return std::numeric_limits<double>::quiet_NaN();
  return model->state.log.back().train.elbo;
}

detm_status detm_model_topic_prob(const detm_model* model, size_t k, size_t t, size_t v, double* out) {
  DETM_REQUIRE(model && out);
  const auto& m = *model->rep;
  if (k >= m.num_topics() || t >= m.num_times() || v >= m.vocab_size())
    return fail(DETM_ERR_CONFIG, "topic, time or term index out of range");
  return guarded([&] { *out = m.topic_matrix().at(model::topic_row(k, t, m.num_times()), v); });
}

detm_status detm_eval(const detm_config* config, const detm_model* model, const detm_corpus* corpus,
                      const char* out_dir, detm_report** out) {
  DETM_REQUIRE(model && corpus && out_dir);
  return guarded([&] {
    auto r = pipeline::run_eval(resolved(config), *model->rep, corpus->rep, out_dir);
    if (out) *out = new detm_report{std::move(r)};
  });
}

void detm_report_free(detm_report* report) { delete report; }

detm_status detm_report_get(const detm_report* report, const char* name, double* out) {
  DETM_REQUIRE(report && name && out);
  const std::string n = name;
  if (n == "perplexity") *out = report->rep.perplexity;
  else if (n == "tc") *out = report->rep.tc;
  else if (n == "td") *out = report->rep.td;
  else if (n == "tq") *out = report->rep.tq;
  else return fail(DETM_ERR_CONFIG, "unknown metric name");
  return DETM_OK;
}

detm_status detm_export_topics(const detm_config* config, const detm_model* model, const detm_corpus* corpus,
                               const char* path) {
  DETM_REQUIRE(model && corpus && path);
  return guarded([&] {
    const auto cfg = resolved(config);
    pipeline::write_topics(path, pipeline::topic_rows(*model->rep, corpus->rep.vocab, cfg.export_top_n));
  });
}

detm_status detm_export_word_curves(const detm_model* model, const detm_corpus* corpus, const char* const* terms,
                                    size_t n_terms, const char* path, size_t* n_skipped) {
  DETM_REQUIRE(model && corpus && path && (terms || n_terms == 0));
  std::vector<std::string> skipped;
  const detm_status s = guarded([&] {
    std::vector<std::string> wanted(terms, terms + n_terms);
    const auto rows = pipeline::word_curve_rows(*model->rep, corpus->rep.vocab, wanted, skipped);
    pipeline::write_word_curves(path, rows, skipped);
  });
  if (s != DETM_OK) return s;
  if (n_skipped) *n_skipped = skipped.size();
  if (n_terms == 0) return fail(DETM_ERR_CONFIG, "no terms given");
  if (skipped.size() == n_terms) return fail(DETM_ERR_DATA, "none of the requested terms is in the vocabulary");
  return DETM_OK;
}

detm_status detm_synth(const detm_config* config, const char* out_dir, detm_corpus** out) {
  DETM_REQUIRE(out_dir);
  return guarded([&] {
    auto b = pipeline::run_synth(resolved(config), out_dir);
    if (out) *out = new detm_corpus{std::move(b)};
  });
}

}  // extern "C"
