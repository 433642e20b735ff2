// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exercises libdetm through the C header only; links nothing else.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "detm/detm.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("detm_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

detm_config* small_config(const char* model) {
  detm_set_verbosity(0);
  detm_config* c = nullptr;
  REQUIRE(detm_config_new(&c) == DETM_OK);
  const std::vector<std::pair<const char*, const char*>> kv = {
      {"run.seed", "11"},          {"run.model", model},       {"synth.K", "3"},
      {"synth.T", "4"},            {"synth.V", "40"},          {"synth.L", "6"},
      {"synth.n_docs", "160"},     {"synth.tokens_per_doc", "25"},
      {"embeddings.dim", "6"},     {"detm.K", "3"},            {"detm.epochs", "4"},
      {"detm.batch_size", "32"},   {"dlda.K", "3"},            {"dlda.tied_epochs", "2"},
      {"dlda.epochs", "2"},        {"dlda.batch_size", "32"},
  };
  for (const auto& [k, v] : kv) REQUIRE_MESSAGE(detm_config_set(c, k, v) == DETM_OK, k);
  return c;
}

std::vector<double> all_topic_probs(const detm_model* m, const detm_corpus* c) {
  std::vector<double> out;
  const std::size_t K = detm_model_num_topics(m), T = detm_corpus_num_times(c), V = detm_corpus_vocab_size(c);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t v = 0; v < V; ++v) {
        double p = 0;
        REQUIRE(detm_model_topic_prob(m, k, t, v, &p) == DETM_OK);
        out.push_back(p);
      }
  return out;
}

}  // namespace

TEST_CASE("config get and set round trip through the buffer convention") {
  detm_config* c = nullptr;
  REQUIRE(detm_config_new(&c) == DETM_OK);
  CHECK(detm_config_set(c, "detm.K", "17") == DETM_OK);
  std::size_t needed = 0;
  CHECK(detm_config_get(c, "detm.K", nullptr, 0, &needed) == DETM_OK);
  CHECK(needed == 3);
  char small[2];
  CHECK(detm_config_get(c, "detm.K", small, sizeof small, &needed) == DETM_OK);
  CHECK(std::string(small) == "1");
  char buf[16];
  CHECK(detm_config_get(c, "detm.K", buf, sizeof buf, &needed) == DETM_OK);
  CHECK(std::string(buf) == "17");

  CHECK(detm_config_set(c, "detm.nonsense", "1") == DETM_ERR_CONFIG);
  CHECK(std::string(detm_last_error()).find("detm.nonsense") != std::string::npos);
  CHECK(detm_config_get(c, "nosection", buf, sizeof buf, &needed) == DETM_ERR_CONFIG);

  const fs::path dir = scratch("config");
  CHECK(detm_config_write(c, (dir / "c.ini").c_str()) == DETM_OK);
  detm_config* c2 = nullptr;
  REQUIRE(detm_config_new(&c2) == DETM_OK);
  CHECK(detm_config_load(c2, (dir / "c.ini").c_str()) == DETM_OK);
  CHECK(detm_config_get(c2, "detm.K", buf, sizeof buf, &needed) == DETM_OK);
  CHECK(std::string(buf) == "17");
  CHECK(detm_config_load(c2, (dir / "missing.ini").c_str()) != DETM_OK);
  detm_config_free(c2);
  detm_config_free(c);
}

TEST_CASE("null arguments and missing inputs map to status codes") {
  CHECK(detm_config_new(nullptr) == DETM_ERR_CONFIG);
  detm_corpus* corpus = nullptr;
  CHECK(detm_corpus_load("/nonexistent/bundle", &corpus) == DETM_ERR_DATA);
  CHECK(corpus == nullptr);
  CHECK(std::string(detm_last_error()).size() > 0);
  detm_config* c = nullptr;
  REQUIRE(detm_config_new(&c) == DETM_OK);
  CHECK(detm_config_set(c, "detm.K", "0") == DETM_OK);
  const fs::path dir = scratch("invalid");
  // Validation covers the whole config, not just the step's own section.
  CHECK(detm_synth(c, dir.c_str(), nullptr) == DETM_ERR_CONFIG);
  detm_corpus_free(nullptr);
  detm_model_free(nullptr);
  detm_config_free(c);
  CHECK(detm_corpus_vocab_size(nullptr) == 0);
  CHECK(std::isnan(detm_model_last_elbo(nullptr)));
}

TEST_CASE("synth, train, eval and export through the C API") {
  const fs::path dir = scratch("pipeline");
  detm_config* c = small_config("detm");
  detm_corpus* corpus = nullptr;
  REQUIRE(detm_synth(c, (dir / "synth").c_str(), &corpus) == DETM_OK);
  CHECK(detm_corpus_vocab_size(corpus) == 40);
  CHECK(detm_corpus_num_times(corpus) == 4);
  const std::size_t n = detm_corpus_num_docs(corpus, DETM_SPLIT_TRAIN) + detm_corpus_num_docs(corpus, DETM_SPLIT_VALIDATION) +
                        detm_corpus_num_docs(corpus, DETM_SPLIT_TEST);
  CHECK(n == 160);

  SUBCASE("detm needs embeddings") {
    detm_model* m = nullptr;
    CHECK(detm_train(c, corpus, nullptr, (dir / "noemb").c_str(), 0, &m) == DETM_ERR_CONFIG);
    CHECK(m == nullptr);
  }

  SUBCASE("detm with the sampled embeddings") {
    detm_embedding* e = nullptr;
    REQUIRE(detm_embedding_load(c, corpus, (dir / "synth" / "embeddings.txt").c_str(), &e) == DETM_OK);
    CHECK(detm_embedding_dim(e) == 6);
    detm_model* m = nullptr;
    REQUIRE(detm_train(c, corpus, e, (dir / "ckpt").c_str(), 0, &m) == DETM_OK);
    CHECK(detm_model_num_topics(m) == 3);
    CHECK(detm_model_epochs_done(m) >= 1);
    CHECK(std::isfinite(detm_model_last_elbo(m)));

    // Each topic is a distribution over the vocabulary.
    const auto probs = all_topic_probs(m, corpus);
    for (std::size_t r = 0; r < probs.size() / 40; ++r) {
      double s = 0;
      for (std::size_t v = 0; v < 40; ++v) s += probs[r * 40 + v];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    double p = 0;
    CHECK(detm_model_topic_prob(m, 3, 0, 0, &p) == DETM_ERR_CONFIG);

    detm_report* r = nullptr;
    REQUIRE(detm_eval(c, m, corpus, (dir / "eval").c_str(), &r) == DETM_OK);
    double ppl = 0, td = 0;
    CHECK(detm_report_get(r, "perplexity", &ppl) == DETM_OK);
    CHECK(detm_report_get(r, "td", &td) == DETM_OK);
    CHECK(detm_report_get(r, "nope", &td) == DETM_ERR_CONFIG);
    CHECK(ppl > 1.0);
    CHECK(ppl < 200.0);
    CHECK(fs::exists(dir / "eval" / "metrics.json"));
    CHECK(fs::exists(dir / "eval" / "metrics.csv"));
    detm_report_free(r);

    // A reloaded model gives the same topics.
    detm_model* m2 = nullptr;
    REQUIRE(detm_model_load((dir / "ckpt").c_str(), corpus, &m2) == DETM_OK);
    CHECK(all_topic_probs(m2, corpus) == probs);
    detm_model_free(m2);

    CHECK(detm_config_set(c, "export.top_n", "4") == DETM_OK);
    REQUIRE(detm_export_topics(c, m, corpus, (dir / "topics.csv").c_str()) == DETM_OK);
    const std::string topics = slurp(dir / "topics.csv");
    CHECK(topics.rfind("t,k,rank,term,prob\n", 0) == 0);
    CHECK(std::count(topics.begin(), topics.end(), '\n') == 1 + 4 * 3 * 4);

    const char* terms[] = {"w00001", "absent"};
    std::size_t skipped = 0;
    CHECK(detm_export_word_curves(m, corpus, terms, 2, (dir / "curves.json").c_str(), &skipped) == DETM_OK);
    CHECK(skipped == 1);
    CHECK(slurp(dir / "curves.json").find("\"absent\"") != std::string::npos);
    CHECK(detm_export_word_curves(m, corpus, terms + 1, 1, (dir / "none.csv").c_str(), &skipped) == DETM_ERR_DATA);
    CHECK(detm_export_word_curves(m, corpus, terms, 0, (dir / "zero.csv").c_str(), &skipped) == DETM_ERR_CONFIG);

    detm_model_free(m);
    detm_embedding_free(e);
  }

  detm_corpus_free(corpus);
  detm_config_free(c);
}

TEST_CASE("a checkpoint does not load against another vocabulary") {
  const fs::path dir = scratch("mismatch");
  detm_config* c = small_config("dlda-rep");
  detm_corpus* a = nullptr;
  REQUIRE(detm_synth(c, (dir / "a").c_str(), &a) == DETM_OK);
  CHECK(detm_config_set(c, "synth.V", "41") == DETM_OK);
  detm_corpus* b = nullptr;
  REQUIRE(detm_synth(c, (dir / "b").c_str(), &b) == DETM_OK);
  CHECK(detm_config_set(c, "dlda.epochs", "0") == DETM_OK);
  CHECK(detm_config_set(c, "dlda.tied_epochs", "0") == DETM_OK);
  detm_model* m = nullptr;
  REQUIRE(detm_train(c, a, nullptr, (dir / "ckpt").c_str(), 0, &m) == DETM_OK);
  CHECK(detm_model_epochs_done(m) == 0);
  detm_model_free(m);

  detm_model* loaded = nullptr;
  CHECK(detm_model_load((dir / "ckpt").c_str(), b, &loaded) == DETM_ERR_DATA);
  CHECK(std::string(detm_last_error()).find("vocabulary") != std::string::npos);
  CHECK(detm_model_load((dir / "ckpt").c_str(), a, &loaded) == DETM_OK);
  detm_model_free(loaded);
  CHECK(detm_train(c, b, nullptr, (dir / "ckpt").c_str(), 1, &m) == DETM_ERR_DATA);
  detm_corpus_free(a);
  detm_corpus_free(b);
  detm_config_free(c);
}

TEST_CASE("an interrupted and resumed run matches an uninterrupted one") {
  const fs::path dir = scratch("resume");
  for (const char* model : {"dlda-rep", "detm"}) {
    CAPTURE(model);
    detm_config* c = small_config(model);
    detm_corpus* corpus = nullptr;
    REQUIRE(detm_synth(c, (dir / "synth").c_str(), &corpus) == DETM_OK);
    detm_embedding* e = nullptr;
    REQUIRE(detm_embedding_load(c, corpus, (dir / "synth" / "embeddings.txt").c_str(), &e) == DETM_OK);

    detm_model* full = nullptr;
    REQUIRE(detm_train(c, corpus, e, (dir / "full").c_str(), 0, &full) == DETM_OK);

    const char* key = std::string(model) == "detm" ? "detm.epochs" : "dlda.epochs";
    // DLDA stops inside its dynamic phase; DETM halfway through.
    CHECK(detm_config_set(c, key, std::string(model) == "detm" ? "2" : "1") == DETM_OK);
    detm_model* part = nullptr;
    REQUIRE(detm_train(c, corpus, e, (dir / "part").c_str(), 0, &part) == DETM_OK);
    detm_model_free(part);
    CHECK(detm_config_set(c, key, std::string(model) == "detm" ? "4" : "2") == DETM_OK);
    detm_model* resumed = nullptr;
    REQUIRE(detm_train(c, corpus, nullptr, (dir / "part").c_str(), 1, &resumed) == DETM_OK);

    CHECK(detm_model_epochs_done(resumed) == detm_model_epochs_done(full));
    const auto a = all_topic_probs(full, corpus), b = all_topic_probs(resumed, corpus);
    REQUIRE(a.size() == b.size());
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    CHECK(worst < 1e-6);
    CHECK(detm_model_last_elbo(resumed) == doctest::Approx(detm_model_last_elbo(full)).epsilon(1e-9));

    detm_model_free(full);
    detm_model_free(resumed);
    detm_embedding_free(e);
    detm_corpus_free(corpus);
    detm_config_free(c);
    fs::remove_all(dir / "full");
    fs::remove_all(dir / "part");
  }
}
