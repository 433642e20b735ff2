// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// detm: command-line front end over the C API.
//
//   detm preprocess --out bundle corpus.jsonl
//   detm embed      --out emb --bundle bundle
//   detm train      --out ckpt --bundle bundle --embeddings emb/embeddings.txt
//   detm eval       --out eval --bundle bundle --checkpoint ckpt
//   detm export     --out figs --bundle bundle --checkpoint ckpt --what topics
//   detm synth      --out synth
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "detm/detm.h"

namespace {

namespace fs = std::filesystem;

struct Status {
  detm_status code;
};

// Throws on failure so every subcommand can bail out with one line.
void check(detm_status s) {
  if (s != DETM_OK) throw Status{s};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<detm_config, Deleter<detm_config, detm_config_free>>;
using Corpus = std::unique_ptr<detm_corpus, Deleter<detm_corpus, detm_corpus_free>>;
using Embedding = std::unique_ptr<detm_embedding, Deleter<detm_embedding, detm_embedding_free>>;
using Model = std::unique_ptr<detm_model, Deleter<detm_model, detm_model_free>>;
using Report = std::unique_ptr<detm_report, Deleter<detm_report, detm_report_free>>;

struct Globals {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  int verbose = 0;
};

Config make_config(const Globals& g) {
  detm_config* raw = nullptr;
  check(detm_config_new(&raw));
  Config c(raw);
  if (!g.config_file.empty()) check(detm_config_load(c.get(), g.config_file.c_str()));
  if (g.seed) check(detm_config_set(c.get(), "run.seed", std::to_string(*g.seed).c_str()));
  if (g.threads) check(detm_config_set(c.get(), "run.threads", std::to_string(*g.threads).c_str()));
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      throw Status{DETM_ERR_CONFIG};
    }
    check(detm_config_set(c.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  return c;
}

std::string config_value(const Config& c, const char* key) {
  std::size_t needed = 0;
  check(detm_config_get(c.get(), key, nullptr, 0, &needed));
  std::string s(needed, '\0');
  check(detm_config_get(c.get(), key, s.data(), s.size(), &needed));
  s.resize(needed - 1);
  return s;
}

Corpus load_corpus(const std::string& dir) {
  detm_corpus* raw = nullptr;
  check(detm_corpus_load(dir.c_str(), &raw));
  return Corpus(raw);
}

Model load_model(const std::string& dir, const Corpus& corpus) {
  detm_model* raw = nullptr;
  check(detm_model_load(dir.c_str(), corpus.get(), &raw));
  return Model(raw);
}

void print_summary(const Corpus& corpus) {
  std::size_t needed = 0;
  check(detm_corpus_summary(corpus.get(), nullptr, 0, &needed));
  std::string s(needed, '\0');
  check(detm_corpus_summary(corpus.get(), s.data(), s.size(), &needed));
  std::fputs(s.c_str(), stdout);
}

std::vector<std::string> split_terms(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const std::string t = csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!t.empty()) out.push_back(t);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic embedded topic models: preprocessing, training, evaluation and export"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(detm_version()));

  Globals g;
  app.add_option("--config", g.config_file, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "Override a config key, e.g. --set detm.K=20")->take_all();
  app.add_option("--seed", g.seed, "Random seed for every component");
  app.add_option("--out", g.out, "Output directory")->required();
  app.add_option("--threads", g.threads, "Worker threads for preprocessing")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", g.verbose, "More logging (repeat for debug output)");
  // Global options may also follow the subcommand name.
  app.fallthrough();

  std::string input;
  auto* pre = app.add_subcommand("preprocess", "Tokenize, build the vocabulary, split and bin a corpus");
  pre->add_option("input", input, "JSONL file or directory of text files")->required();

  std::string bundle, embeddings, checkpoint, model_type, what = "topics", terms, format = "csv";
  std::optional<std::size_t> epochs, top_n, n_docs;
  bool resume = false;

  auto* embed = app.add_subcommand("embed", "Train skip-gram embeddings on the training split");
  embed->add_option("--bundle", bundle, "Corpus bundle directory")->required();

  auto* train = app.add_subcommand("train", "Train a DETM or DLDA-rep model");
  train->add_option("--bundle", bundle, "Corpus bundle directory")->required();
  train->add_option("--embeddings", embeddings, "Word vectors (word2vec text format)");
  train->add_option("--model", model_type, "detm or dlda-rep")->check(CLI::IsMember({"detm", "dlda-rep"}));
  train->add_option("--epochs", epochs, "Epoch budget (DLDA-rep adds its warm-start epochs)");
  train->add_flag("--resume", resume, "Continue from the checkpoint in --out");

  auto* evaluate = app.add_subcommand("eval", "Perplexity, coherence, diversity and quality");
  evaluate->add_option("--bundle", bundle, "Corpus bundle directory")->required();
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();

  auto* exporter = app.add_subcommand("export", "Topic word lists or word probability curves");
  exporter->add_option("--bundle", bundle, "Corpus bundle directory")->required();
  exporter->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  exporter->add_option("--what", what, "topics or word-curves")->check(CLI::IsMember({"topics", "word-curves"}));
  exporter->add_option("--terms", terms, "Comma-separated terms for word-curves");
  exporter->add_option("--top-n", top_n, "Words per topic for topics");
  exporter->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* synth = app.add_subcommand("synth", "Sample a corpus from the generative model");
  synth->add_option("--n-docs", n_docs, "Number of documents");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  detm_set_verbosity(g.verbose);
  try {
    Config cfg = make_config(g);
    const fs::path out = g.out;

    if (*pre) {
      detm_corpus* raw = nullptr;
      check(detm_preprocess(cfg.get(), input.c_str(), out.c_str(), &raw));
      print_summary(Corpus(raw));
    } else if (*embed) {
      Corpus corpus = load_corpus(bundle);
      check(detm_embed(cfg.get(), corpus.get(), out.c_str(), nullptr));
      std::printf("wrote %s\n", (out / "embeddings.txt").c_str());
    } else if (*train) {
      if (!model_type.empty()) check(detm_config_set(cfg.get(), "run.model", model_type.c_str()));
      const std::string model_name = config_value(cfg, "run.model");
      if (epochs) {
        const char* key = model_name == "dlda-rep" ? "dlda.epochs" : "detm.epochs";
        check(detm_config_set(cfg.get(), key, std::to_string(*epochs).c_str()));
      }
      Corpus corpus = load_corpus(bundle);
      Embedding emb;
      if (!embeddings.empty() && !resume) {
        detm_embedding* raw = nullptr;
        check(detm_embedding_load(cfg.get(), corpus.get(), embeddings.c_str(), &raw));
        emb.reset(raw);
      }
      detm_model* raw = nullptr;
      check(detm_train(cfg.get(), corpus.get(), emb.get(), out.c_str(), resume ? 1 : 0, &raw));
      Model m(raw);
      std::printf("epochs %zu  final elbo %.10g\n", detm_model_epochs_done(m.get()), detm_model_last_elbo(m.get()));
    } else if (*evaluate) {
      Corpus corpus = load_corpus(bundle);
      Model m = load_model(checkpoint, corpus);
      detm_report* raw = nullptr;
      check(detm_eval(cfg.get(), m.get(), corpus.get(), out.c_str(), &raw));
      Report r(raw);
      double ppl = 0, tc = 0, td = 0, tq = 0;
      check(detm_report_get(r.get(), "perplexity", &ppl));
      check(detm_report_get(r.get(), "tc", &tc));
      check(detm_report_get(r.get(), "td", &td));
      check(detm_report_get(r.get(), "tq", &tq));
      std::printf("perplexity\ttc\ttd\ttq\n%.6g\t%.6g\t%.6g\t%.6g\n", ppl, tc, td, tq);
    } else if (*exporter) {
      if (top_n) check(detm_config_set(cfg.get(), "export.top_n", std::to_string(*top_n).c_str()));
      Corpus corpus = load_corpus(bundle);
      Model m = load_model(checkpoint, corpus);
      fs::create_directories(out);
      if (what == "topics") {
        const fs::path file = out / ("topics." + format);
        check(detm_export_topics(cfg.get(), m.get(), corpus.get(), file.c_str()));
        std::printf("wrote %s\n", file.c_str());
      } else {
        const auto list = split_terms(terms);
        if (list.empty()) {
          std::fprintf(stderr, "error: word-curves needs --terms\n");
          return 1;
        }
        std::vector<const char*> ptrs;
        for (const auto& t : list) ptrs.push_back(t.c_str());
        const fs::path file = out / ("word_curves." + format);
        std::size_t skipped = 0;
        const detm_status s = detm_export_word_curves(m.get(), corpus.get(), ptrs.data(), ptrs.size(), file.c_str(),
                                                      &skipped);
        if (skipped > 0) std::fprintf(stderr, "%zu term(s) not in the vocabulary; listed in %s\n", skipped, file.c_str());
        check(s);
        std::printf("wrote %s\n", file.c_str());
      }
    } else if (*synth) {
      if (n_docs) check(detm_config_set(cfg.get(), "synth.n_docs", std::to_string(*n_docs).c_str()));
      detm_corpus* raw = nullptr;
      check(detm_synth(cfg.get(), out.c_str(), &raw));
      print_summary(Corpus(raw));
    }
  } catch (const Status& s) {
    const char* msg = detm_last_error();
    if (msg && *msg) std::fprintf(stderr, "error: %s\n", msg);
    return static_cast<int>(s.code);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
