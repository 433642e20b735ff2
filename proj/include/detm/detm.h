/* Copyright (c) 2026, The detm Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to libdetm. All objects are opaque handles created by the
 * library and released with the matching *_free function (NULL is accepted).
 * Every fallible call returns a detm_status; on failure the message is
 * available from detm_last_error() on the same thread.
 */
#ifndef DETM_DETM_H_
#define DETM_DETM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DETM_API __declspec(dllexport)
#else
#define DETM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum detm_status {
  DETM_OK = 0,
  DETM_ERR_CONFIG = 1,    /* usage or configuration problem */
  DETM_ERR_DATA = 2,      /* missing, malformed or mismatched input */
  DETM_ERR_NUMERICAL = 3  /* non-finite objective or similar */
} detm_status;

typedef enum detm_split { DETM_SPLIT_TRAIN = 0, DETM_SPLIT_VALIDATION = 1, DETM_SPLIT_TEST = 2 } detm_split;

typedef struct detm_config detm_config;
typedef struct detm_corpus detm_corpus;
typedef struct detm_embedding detm_embedding;
typedef struct detm_model detm_model;
typedef struct detm_report detm_report;

DETM_API const char* detm_version(void);
/* Message of the last failed call on this thread ("" if none). */
DETM_API const char* detm_last_error(void);
/* 0 = warnings only, 1 = progress, 2 = debug. */
DETM_API void detm_set_verbosity(int level);

/* ---- configuration ---------------------------------------------------- */

DETM_API detm_status detm_config_new(detm_config** out);
DETM_API void detm_config_free(detm_config* config);
/* Merges an INI file; unknown keys fail with DETM_ERR_CONFIG. */
DETM_API detm_status detm_config_load(detm_config* config, const char* path);
/* key is "section.name", e.g. "detm.K". */
DETM_API detm_status detm_config_set(detm_config* config, const char* key, const char* value);
/* Copies the value into buf (always NUL-terminated when cap > 0); *needed
 * receives the full length including the terminator. */
DETM_API detm_status detm_config_get(const detm_config* config, const char* key, char* buf, size_t cap,
                                     size_t* needed);
DETM_API detm_status detm_config_write(const detm_config* config, const char* path);

/* ---- corpus ----------------------------------------------------------- */

/* input: a JSONL file or a directory of text files. Writes a bundle. */
DETM_API detm_status detm_preprocess(const detm_config* config, const char* input, const char* out_dir,
                                     detm_corpus** out);
DETM_API detm_status detm_corpus_load(const char* bundle_dir, detm_corpus** out);
DETM_API void detm_corpus_free(detm_corpus* corpus);
DETM_API size_t detm_corpus_vocab_size(const detm_corpus* corpus);
DETM_API size_t detm_corpus_num_times(const detm_corpus* corpus);
DETM_API size_t detm_corpus_num_docs(const detm_corpus* corpus, detm_split split);
/* Tab-separated summary table (same buffer convention as detm_config_get). */
DETM_API detm_status detm_corpus_summary(const detm_corpus* corpus, char* buf, size_t cap, size_t* needed);

/* ---- embeddings ------------------------------------------------------- */

/* Skip-gram on the training split; writes out_dir/embeddings.txt. */
DETM_API detm_status detm_embed(const detm_config* config, const detm_corpus* corpus, const char* out_dir,
                                detm_embedding** out);
/* word2vec text format, dimension taken from embeddings.dim. */
DETM_API detm_status detm_embedding_load(const detm_config* config, const detm_corpus* corpus, const char* path,
                                         detm_embedding** out);
DETM_API void detm_embedding_free(detm_embedding* embedding);
DETM_API size_t detm_embedding_dim(const detm_embedding* embedding);

/* ---- models ----------------------------------------------------------- */

/* Trains run.model into checkpoint_dir. embedding may be NULL for dlda-rep
 * or when resume is nonzero. */
DETM_API detm_status detm_train(const detm_config* config, const detm_corpus* corpus,
                                const detm_embedding* embedding, const char* checkpoint_dir, int resume,
                                detm_model** out);
DETM_API detm_status detm_model_load(const char* checkpoint_dir, const detm_corpus* corpus, detm_model** out);
DETM_API void detm_model_free(detm_model* model);
DETM_API size_t detm_model_num_topics(const detm_model* model);
DETM_API size_t detm_model_epochs_done(const detm_model* model);
/* Mean training ELBO of the last completed epoch (NaN if none). */
DETM_API double detm_model_last_elbo(const detm_model* model);
/* Probability of vocabulary term v under topic k at time t. */
DETM_API detm_status detm_model_topic_prob(const detm_model* model, size_t k, size_t t, size_t v, double* out);

/* ---- evaluation and export -------------------------------------------- */

/* Writes out_dir/metrics.json and metrics.csv. */
DETM_API detm_status detm_eval(const detm_config* config, const detm_model* model, const detm_corpus* corpus,
                               const char* out_dir, detm_report** out);
DETM_API void detm_report_free(detm_report* report);
/* name: "perplexity", "tc", "td" or "tq". */
DETM_API detm_status detm_report_get(const detm_report* report, const char* name, double* out);

/* Top export.top_n terms per (t, k). CSV unless path ends in ".json". */
DETM_API detm_status detm_export_topics(const detm_config* config, const detm_model* model, const detm_corpus* corpus,
                                        const char* path);
/* Probability series of the given terms. Unknown terms are listed in the
 * output; *n_skipped receives their count. Fails with DETM_ERR_DATA if every
 * term is unknown (the file is still written). */
DETM_API detm_status detm_export_word_curves(const detm_model* model, const detm_corpus* corpus,
                                             const char* const* terms, size_t n_terms, const char* path,
                                             size_t* n_skipped);

/* Samples a corpus from the generative process into out_dir. */
DETM_API detm_status detm_synth(const detm_config* config, const char* out_dir, detm_corpus** out);

#ifdef __cplusplus
}
#endif

#endif /* DETM_DETM_H_ */
