// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/pipeline/pipeline.hpp"

#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "detm/detm/detm.hpp"
#include "detm/detm/synthetic.hpp"
#include "detm/dlda/dlda.hpp"
#include "detm/errors.hpp"
#include "detm/model/checkpoint.hpp"
#include "detm/numcore/serialize.hpp"

namespace detm::pipeline {

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed for " + path.string());
}

bool wants_json(const fs::path& path) { return path.extension() == ".json"; }

std::string checkpoint_type(const std::string& model) { return model == "dlda-rep" ? "dlda_rep" : "detm"; }

void require_same_vocab(const model::TopicModel& m, const corpus::CorpusBundle& bundle, const std::string& where) {
  if (m.vocab_hash() != bundle.vocab.hash())
    throw DataError(fmt::format("{}: vocabulary hash {} does not match the corpus bundle ({})", where, m.vocab_hash(),
                                bundle.vocab.hash()));
  if (m.vocab_size() != bundle.V() || m.num_times() != bundle.T())
    throw DataError(fmt::format("{}: model has V={} T={} but the bundle has V={} T={}", where, m.vocab_size(),
                                m.num_times(), bundle.V(), bundle.T()));
}

}  // namespace

PreprocessResult run_preprocess(const RunConfig& config, const fs::path& input, const fs::path& out_dir) {
  config.validate();
  PreprocessResult r;
  r.bundle = corpus::preprocess(corpus::load_documents(input), config.preprocess, &r.report);
  corpus::save_bundle(r.bundle, out_dir);
  write_resolved_config(out_dir, config);
  return r;
}

emb::EmbeddingMatrix run_embed(const RunConfig& config, const corpus::CorpusBundle& bundle,
                                      const fs::path& out_dir) {
  config.validate();
  auto result = emb::train_skipgram(bundle.split.train, bundle.vocab, config.skipgram);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
    spdlog::info("skip-gram epoch {}  loss {:.5f}", e, result.epoch_loss[e]);
  fs::create_directories(out_dir);
  emb::save_embeddings(out_dir / "embeddings.txt", result.embeddings, bundle.vocab);
  write_resolved_config(out_dir, config);
  return std::move(result.embeddings);
}

emb::EmbeddingMatrix load_vectors(const RunConfig& config, const corpus::CorpusBundle& bundle,
                                         const fs::path& path) {
  emb::LoadReport report;
  auto vectors = emb::load_embeddings(path, bundle.vocab, config.skipgram.dim, config.seed, &report);
  if (report.oov_initialized > 0)
    spdlog::info("{} vocabulary terms had no vector and were initialized randomly", report.oov_initialized);
  return vectors;
}

TrainOutcome run_train(const RunConfig& config, const corpus::CorpusBundle& bundle,
                       const emb::EmbeddingMatrix* embeddings, const fs::path& checkpoint_dir, bool resume) {
  config.validate();
  const bool dlda = config.model == "dlda-rep";
  TrainOutcome out;
  std::optional<model::LoadedCheckpoint> loaded;
  if (resume) {
    loaded = model::load_checkpoint(checkpoint_dir);
    if (loaded->model->model_type() != checkpoint_type(config.model))
      throw ConfigError(fmt::format("checkpoint in {} holds a {} model, not {}", checkpoint_dir.string(),
                                    loaded->model->model_type(), config.model));
    require_same_vocab(*loaded->model, bundle, "resume");
    out.model = std::move(loaded->model);
  } else if (dlda) {
    out.model = std::make_unique<DldaRep>(config.dlda, bundle.V(), bundle.T(), bundle.vocab.hash());
  } else {
    if (!embeddings) throw ConfigError("detm training needs word embeddings (--embeddings)");
    emb::require_bound_to(*embeddings, bundle.vocab);
    out.model = std::make_unique<Detm>(config.detm, embeddings->rho, corpus::aggregate_by_time(bundle.split, bundle.V()),
                                       bundle.vocab.hash());
  }

  // Optimization settings come from the model's own hyperparameters so a
  // resumed run keeps the original ones; only the epoch budget may change.
  const nlohmann::json h = out.model->hyperparams_json();
  model::TrainConfig tc;
  tc.epochs = dlda ? config.dlda.total_epochs() : config.detm.epochs;
  tc.batch_size = h.at("batch_size").get<std::size_t>();
  tc.clip_norm = h.at("clip_norm").get<double>();
  tc.patience = h.at("patience").get<std::size_t>();
  tc.seed = h.at("seed").get<std::uint64_t>();

  model::Trainer trainer(*out.model, bundle.split, tc);
  if (loaded) trainer.restore(loaded->trainer, loaded->optimizer_state);
  write_resolved_config(checkpoint_dir, config);
  if (!loaded) model::save_checkpoint(checkpoint_dir, *out.model, trainer.state(), &trainer.optimizer());
  trainer.run([&](const model::Trainer& t) {
    model::save_checkpoint(checkpoint_dir, *out.model, t.state(), &t.optimizer());
  });
  out.state = trainer.state();
  return out;
}

model::LoadedCheckpoint load_model(const fs::path& checkpoint_dir, const corpus::CorpusBundle* bundle) {
  auto loaded = model::load_checkpoint(checkpoint_dir);
  if (bundle) require_same_vocab(*loaded.model, *bundle, checkpoint_dir.string());
  return loaded;
}

eval::MetricReport run_eval(const RunConfig& config, const model::TopicModel& model,
                            const corpus::CorpusBundle& bundle, const fs::path& out_dir) {
  config.validate();
  require_same_vocab(model, bundle, "eval");
  auto report = eval::metric_report(model, bundle.split, config.metrics);
  write_file(out_dir / "metrics.json", report.to_json().dump(2) + "\n");
  write_file(out_dir / "metrics.csv", report.to_csv());
  write_resolved_config(out_dir, config);
  return report;
}

std::vector<TopicRow> topic_rows(const model::TopicModel& model, const corpus::Vocabulary& vocab, std::size_t top_n) {
  const nc::Tensor beta = model.topic_matrix();
  const std::size_t K = model.num_topics(), T = model.num_times(), V = beta.cols();
  std::vector<TopicRow> rows;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t r = model::topic_row(k, t, T);
      const auto top = eval::top_terms(beta, r, std::min(top_n, V));
      for (std::size_t i = 0; i < top.size(); ++i)
        rows.push_back({t, k, i + 1, vocab.term(top[i]), beta.at(r, top[i])});
    }
  return rows;
}

std::vector<CurveRow> word_curve_rows(const model::TopicModel& model, const corpus::Vocabulary& vocab,
                                      const std::vector<std::string>& terms, std::vector<std::string>& skipped) {
  const nc::Tensor beta = model.topic_matrix();
  const std::size_t K = model.num_topics(), T = model.num_times();
  std::vector<CurveRow> rows;
  for (const auto& term : terms) {
    const auto id = vocab.find(term);
    if (!id) {
      skipped.push_back(term);
      continue;
    }
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t t = 0; t < T; ++t) rows.push_back({t, k, term, beta.at(model::topic_row(k, t, T), *id)});
  }
  return rows;
}

void write_topics(const fs::path& path, const std::vector<TopicRow>& rows) {
  if (wants_json(path)) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) j.push_back({{"t", r.t}, {"k", r.k}, {"rank", r.rank}, {"term", r.term}, {"prob", r.prob}});
    write_file(path, nlohmann::json{{"topics", j}}.dump(2) + "\n");
    return;
  }
  std::string out = "t,k,rank,term,prob\n";
  for (const auto& r : rows) out += fmt::format("{},{},{},{},{}\n", r.t, r.k, r.rank, r.term, r.prob);
  write_file(path, out);
}

void write_word_curves(const fs::path& path, const std::vector<CurveRow>& rows,
                       const std::vector<std::string>& skipped) {
  if (wants_json(path)) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) j.push_back({{"t", r.t}, {"k", r.k}, {"term", r.term}, {"prob", r.prob}});
    write_file(path, nlohmann::json{{"curves", j}, {"skipped_terms", skipped}}.dump(2) + "\n");
    return;
  }
  std::string out = "t,k,term,prob\n";
  for (const auto& r : rows) out += fmt::format("{},{},{},{}\n", r.t, r.k, r.term, r.prob);
  // Comment lines, so CSV readers can skip them with comment='#'.
  if (!skipped.empty()) {
    out += "# skipped terms (not in vocabulary)\n";
    for (const auto& s : skipped) out += "# " + s + "\n";
  }
  write_file(path, out);
}

corpus::CorpusBundle run_synth(const RunConfig& config, const fs::path& out_dir) {
  config.validate();
  auto synth = sample_corpus(config.synth);
  corpus::CorpusBundle bundle{std::move(synth.vocab), std::move(synth.split), config.preprocess};
  corpus::save_bundle(bundle, out_dir);
  emb::save_embeddings(out_dir / "embeddings.txt", {synth.truth.rho, bundle.vocab.hash()}, bundle.vocab);

  const auto& tr = synth.truth;
  nc::Tensor doc_time({tr.doc_time.size()});
  for (std::size_t i = 0; i < tr.doc_time.size(); ++i) doc_time[i] = static_cast<double>(tr.doc_time[i]);
  nc::TensorMap truth{{"alpha", tr.alpha}, {"eta", tr.eta}, {"beta", tr.beta}, {"theta", tr.theta},
                      {"doc_time", doc_time}};
  fs::remove_all(out_dir / "truth");
  nlohmann::json manifest = {{"K", config.synth.K},
                             {"T", config.synth.T},
                             {"V", config.synth.V},
                             {"L", config.synth.L},
                             {"tensors", nc::save_tensors(out_dir, truth, "truth")}};
  write_file(out_dir / "truth" / "manifest.json", manifest.dump(2) + "\n");
  write_resolved_config(out_dir, config);
  return bundle;
}

}  // namespace detm::pipeline
