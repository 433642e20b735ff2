// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Drives the detm executable as a subprocess and checks its files against
// the library.

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "detm/corpus/io.hpp"
#include "detm/eval/metrics.hpp"
#include "detm/model/checkpoint.hpp"
#include "detm/model/topic_model.hpp"

namespace fs = std::filesystem;
using namespace detm;

namespace {

const fs::path kFixture = fs::path(DETM_TEST_DATA) / "fixture_corpus.jsonl";

struct Run {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work() {
  static const fs::path dir = [] {
    const fs::path p = fs::temp_directory_path() / "detm_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Run cli(const std::string& args) {
  const fs::path o = work() / "stdout.txt", e = work() / "stderr.txt";
  const std::string cmd = std::string(DETM_CLI) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

// Every file under `dir`, keyed by relative path.
std::vector<std::pair<std::string, std::string>> tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files.emplace_back(fs::relative(entry.path(), dir).string(), slurp(entry.path()));
  std::sort(files.begin(), files.end());
  return files;
}

// Small enough to train in a few seconds.
fs::path config_file() {
  const fs::path p = work() / "small.ini";
  std::ofstream(p) << "[run]\nseed = 5\n\n[embeddings]\ndim = 8\nepochs = 2\n\n"
                      "[detm]\nK = 3\nepochs = 3\nbatch_size = 32\nencoder_hidden = 16\nlstm_hidden = 8\n\n"
                      "[dlda]\nK = 3\ntied_epochs = 1\nepochs = 2\nbatch_size = 32\n\n[export]\ntop_n = 5\n";
  return p;
}

std::string base() { return "--config " + config_file().string(); }

// Bundle, embeddings and one trained DETM checkpoint shared by the cases below.
const fs::path& trained() {
  static const fs::path root = [] {
    const fs::path r = work() / "shared";
    REQUIRE(cli(base() + " --out " + (r / "bundle").string() + " preprocess " + kFixture.string()).code == 0);
    REQUIRE(cli(base() + " --out " + (r / "emb").string() + " embed --bundle " + (r / "bundle").string()).code == 0);
    const Run t = cli(base() + " --out " + (r / "ckpt").string() + " train --bundle " + (r / "bundle").string() +
                      " --embeddings " + (r / "emb" / "embeddings.txt").string());
    REQUIRE_MESSAGE(t.code == 0, t.err);
    return r;
  }();
  return root;
}

}  // namespace

TEST_CASE("preprocess prints the summary and is byte-identical on rerun") {
  const Run a = cli(base() + " --out " + (work() / "pre_a").string() + " preprocess " + kFixture.string());
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("# Docs Train\t# Docs Val\t# Docs Test\t# Timestamps\tVocabulary\n", 0) == 0);
  const Run b = cli(base() + " --threads 1 --out " + (work() / "pre_b").string() + " preprocess " + kFixture.string());
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  const auto ta = tree(work() / "pre_a"), tb = tree(work() / "pre_b");
  CHECK(ta.size() >= 5);
  CHECK(ta == tb);

  const auto bundle = corpus::load_bundle(work() / "pre_a");
  CHECK(bundle.T() == 4);
  CHECK(a.out == corpus::summary_table(bundle));
}

TEST_CASE("exit codes") {
  CHECK(cli("--help").code == 0);
  CHECK(cli("--out x").code == 1);  // no subcommand
  CHECK(cli("--out x frobnicate").code == 1);
  CHECK(cli("--out x --set detm.nope=1 synth").code == 1);
  CHECK(cli("--out x --set detm.K synth").code == 1);
  const Run missing = cli("--out " + (work() / "x").string() + " embed --bundle /nonexistent");
  CHECK(missing.code == 2);
  CHECK(missing.err.find("error:") != std::string::npos);
  // DETM without embeddings is a usage error.
  CHECK(cli(base() + " --out " + (work() / "noemb").string() + " train --bundle " +
            (trained() / "bundle").string())
            .code == 1);
  // Checkpoint against another vocabulary.
  const fs::path other = work() / "other";
  REQUIRE(cli("--out " + other.string() + " --set synth.V=30 synth").code == 0);
  CHECK(cli("--out " + (work() / "ev_bad").string() + " eval --bundle " + other.string() + " --checkpoint " +
            (trained() / "ckpt").string())
            .code == 2);
}

TEST_CASE("eval writes exactly what the library computes") {
  const fs::path out = work() / "eval";
  const Run r = cli(base() + " --out " + out.string() + " eval --bundle " + (trained() / "bundle").string() +
                    " --checkpoint " + (trained() / "ckpt").string());
  REQUIRE_MESSAGE(r.code == 0, r.err);

  const auto bundle = corpus::load_bundle(trained() / "bundle");
  const auto loaded = model::load_checkpoint(trained() / "ckpt");
  const auto report = eval::metric_report(*loaded.model, bundle.split, eval::MetricConfig{});
  CHECK(slurp(out / "metrics.json") == report.to_json().dump(2) + "\n");
  CHECK(slurp(out / "metrics.csv") == report.to_csv());
  CHECK(fs::exists(out / "resolved_config.ini"));
}

TEST_CASE("topic export is deterministic and ranks by probability") {
  const std::string args = " export --bundle " + (trained() / "bundle").string() + " --checkpoint " +
                           (trained() / "ckpt").string();
  REQUIRE(cli(base() + " --out " + (work() / "exp_a").string() + args).code == 0);
  REQUIRE(cli(base() + " --out " + (work() / "exp_b").string() + args).code == 0);
  REQUIRE(cli(base() + " --out " + (work() / "exp_b").string() + args + " --format json").code == 0);
  const std::string csv = slurp(work() / "exp_a" / "topics.csv");
  CHECK(csv == slurp(work() / "exp_b" / "topics.csv"));
  CHECK(slurp(work() / "exp_b" / "topics.json").find("\"topics\"") != std::string::npos);

  const auto bundle = corpus::load_bundle(trained() / "bundle");
  const auto loaded = model::load_checkpoint(trained() / "ckpt");
  const nc::Tensor beta = loaded.model->topic_matrix();
  const std::size_t T = bundle.T();
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,k,rank,term,prob");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream f(line);
    std::string t, k, rank, term, prob;
    std::getline(f, t, ',');
    std::getline(f, k, ',');
    std::getline(f, rank, ',');
    std::getline(f, term, ',');
    std::getline(f, prob, ',');
    const auto id = bundle.vocab.find(term);
    REQUIRE(id);
    const std::size_t r = model::topic_row(std::stoul(k), std::stoul(t), T);
    const auto top = eval::top_terms(beta, r, 5);
    CHECK(top[std::stoul(rank) - 1] == *id);
    CHECK(std::stod(prob) == beta.at(r, *id));
    ++rows;
  }
  CHECK(rows == 5 * 3 * T);
}

TEST_CASE("word curves recompute from the checkpoint") {
  const auto bundle = corpus::load_bundle(trained() / "bundle");
  const std::string a = bundle.vocab.term(0), b = bundle.vocab.term(bundle.V() - 1);
  const fs::path out = work() / "curves";
  const Run r = cli("--out " + out.string() + " export --what word-curves --terms " + a + ",notaword," + b +
                    " --bundle " + (trained() / "bundle").string() + " --checkpoint " + (trained() / "ckpt").string());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.err.find("1 term(s)") != std::string::npos);

  const auto loaded = model::load_checkpoint(trained() / "ckpt");
  const nc::Tensor beta = loaded.model->topic_matrix();
  const std::size_t T = bundle.T(), K = 3;
  std::istringstream in(slurp(out / "word_curves.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,k,term,prob");
  std::size_t rows = 0;
  std::vector<std::string> comments;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      comments.push_back(line);
      continue;
    }
    std::istringstream f(line);
    std::string t, k, term, prob;
    std::getline(f, t, ',');
    std::getline(f, k, ',');
    std::getline(f, term, ',');
    std::getline(f, prob, ',');
    const std::size_t row = model::topic_row(std::stoul(k), std::stoul(t), T);
    CHECK(std::stod(prob) == beta.at(row, *bundle.vocab.find(term)));
    ++rows;
  }
  CHECK(rows == 2 * K * T);
  REQUIRE(comments.size() == 2);
  CHECK(comments[1] == "# notaword");

  CHECK(cli("--out " + out.string() + " export --what word-curves --terms notaword --bundle " +
            (trained() / "bundle").string() + " --checkpoint " + (trained() / "ckpt").string())
            .code == 2);
  CHECK(cli("--out " + out.string() + " export --what word-curves --bundle " + (trained() / "bundle").string() +
            " --checkpoint " + (trained() / "ckpt").string())
            .code == 1);
}

TEST_CASE("training reruns and resumes reproduce the same checkpoint") {
  const std::string bundle = (trained() / "bundle").string();
  for (const std::string model : {"dlda-rep", "detm"}) {
    CAPTURE(model);
    const std::string emb = model == "detm" ? " --embeddings " + (trained() / "emb" / "embeddings.txt").string() : "";
    const std::string common = " train --model " + model + " --bundle " + bundle;
    const fs::path full = work() / ("full_" + model), again = work() / ("again_" + model),
                   part = work() / ("part_" + model);
    REQUIRE(cli(base() + " --out " + full.string() + common + emb + " --epochs 2").code == 0);
    REQUIRE(cli(base() + " --out " + again.string() + common + emb + " --epochs 2").code == 0);
    CHECK(tree(full) == tree(again));

    REQUIRE(cli(base() + " --out " + part.string() + common + emb + " --epochs 1").code == 0);
    const Run resumed = cli(base() + " --out " + part.string() + common + " --epochs 2 --resume");
    REQUIRE_MESSAGE(resumed.code == 0, resumed.err);

    const auto a = model::load_checkpoint(full), b = model::load_checkpoint(part);
    CHECK(a.trainer.epochs_done == b.trainer.epochs_done);
    const nc::Tensor ba = a.model->topic_matrix(), bb = b.model->topic_matrix();
    REQUIRE(ba.size() == bb.size());
    double worst = 0;
    for (std::size_t i = 0; i < ba.size(); ++i) worst = std::max(worst, std::abs(ba[i] - bb[i]));
    CHECK(worst < 1e-6);
  }
  // A zero-epoch run still writes a loadable initial checkpoint.
  const fs::path init = work() / "init";
  REQUIRE(cli(base() + " --out " + init.string() + " --set dlda.tied_epochs=0 train --model dlda-rep --epochs 0 --bundle " +
              bundle)
              .code == 0);
  const auto loaded = model::load_checkpoint(init);
  CHECK(loaded.trainer.epochs_done == 0);
  CHECK(loaded.model->num_topics() == 3);
}
