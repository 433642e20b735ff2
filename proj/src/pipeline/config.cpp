// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "detm/corpus/text.hpp"
#include "detm/errors.hpp"

namespace detm::pipeline {

namespace {

struct Field {
  std::string key;  // section.name
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, text));
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

class Binder {
 public:
  void num(const std::string& key, std::size_t& x) { integral(key, x); }
  void num(const std::string& key, unsigned& x) { integral(key, x); }
  void num(const std::string& key, int& x) { integral(key, x); }
  void num(const std::string& key, double& x) {
    fields.push_back({key, [key, &x](const std::string& v) { x = parse_number<double>(key, v); },
                      [&x] { return fmt::format("{}", x); }});
  }
  void flag(const std::string& key, bool& x) {
    fields.push_back({key, [key, &x](const std::string& v) { x = parse_bool(key, v); },
                      [&x] { return std::string(x ? "true" : "false"); }});
  }
  void text(const std::string& key, std::string& x) {
    fields.push_back({key, [&x](const std::string& v) { x = v; }, [&x] { return x; }});
  }
  void ratios(const std::string& key, std::array<double, 3>& x) {
    fields.push_back({key,
                      [key, &x](const std::string& v) {
                        std::array<double, 3> r{};
                        std::size_t i = 0, start = 0;
                        while (true) {
                          const auto comma = v.find(',', start);
                          if (i == 3) throw ConfigError(key + ": expected three comma-separated fractions");
                          r[i++] = parse_number<double>(key, trim(v.substr(start, comma - start)));
                          if (comma == std::string::npos) break;
                          start = comma + 1;
                        }
                        if (i != 3) throw ConfigError(key + ": expected three comma-separated fractions");
                        x = r;
                      },
                      [&x] { return fmt::format("{},{},{}", x[0], x[1], x[2]); }});
  }

  std::vector<Field> fields;

 private:
  template <typename T>
  void integral(const std::string& key, T& x) {
    fields.push_back({key, [key, &x](const std::string& v) { x = parse_number<T>(key, v); },
                      [&x] { return fmt::format("{}", x); }});
  }
};

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed binding assumes a 64-bit size_t");

std::vector<Field> bind(RunConfig& c) {
  Binder b;
  b.num("run.seed", c.seed);
  b.num("run.threads", c.threads);
  b.text("run.model", c.model);

  b.flag("corpus.lowercase", c.preprocess.tokenization.lowercase);
  b.num("corpus.min_token_length", c.preprocess.tokenization.min_token_length);
  b.num("corpus.min_df", c.preprocess.vocab.min_df);
  b.num("corpus.max_df_fraction", c.preprocess.vocab.max_df_fraction);
  b.text("corpus.stopwords", c.stopwords);
  b.ratios("corpus.split_ratios", c.preprocess.split.ratios);
  b.num("corpus.bin_width", c.preprocess.split.bin_width);

  b.num("embeddings.dim", c.skipgram.dim);
  b.num("embeddings.window", c.skipgram.window);
  b.num("embeddings.negatives", c.skipgram.negatives);
  b.num("embeddings.lr", c.skipgram.lr);
  b.num("embeddings.epochs", c.skipgram.epochs);
  b.num("embeddings.subsample", c.skipgram.subsample);

  auto& d = c.detm;
  b.num("detm.K", d.K);
  b.num("detm.delta2", d.delta2);
  b.num("detm.gamma2", d.gamma2);
  b.num("detm.a2", d.a2);
  b.num("detm.batch_size", d.batch_size);
  b.num("detm.lr", d.lr);
  b.num("detm.epochs", d.epochs);
  b.num("detm.clip_norm", d.clip_norm);
  b.num("detm.dropout", d.dropout);
  b.num("detm.encoder_hidden", d.encoder_hidden);
  b.num("detm.encoder_layers", d.encoder_layers);
  b.num("detm.lstm_input_dim", d.lstm_input_dim);
  b.num("detm.lstm_hidden", d.lstm_hidden);
  b.num("detm.lstm_layers", d.lstm_layers);
  b.num("detm.weight_decay", d.weight_decay);
  b.num("detm.patience", d.patience);
  b.flag("detm.finetune_rho", d.finetune_rho);
  b.num("detm.alpha_init_sd", d.alpha_init_sd);
  b.num("detm.alpha_init_logvar", d.alpha_init_logvar);

  auto& l = c.dlda;
  b.num("dlda.K", l.K);
  b.num("dlda.sigma2", l.sigma2);
  b.num("dlda.delta2", l.delta2);
  b.num("dlda.a2", l.a2);
  b.num("dlda.batch_size", l.batch_size);
  b.num("dlda.lr_mean", l.lr_mean);
  b.num("dlda.lr_var", l.lr_var);
  b.num("dlda.lr_network", l.lr_network);
  b.num("dlda.tied_epochs", l.tied_epochs);
  b.num("dlda.epochs", l.epochs);
  b.num("dlda.clip_norm", l.clip_norm);
  b.num("dlda.dropout", l.dropout);
  b.num("dlda.encoder_hidden", l.encoder_hidden);
  b.num("dlda.encoder_layers", l.encoder_layers);
  b.num("dlda.weight_decay", l.weight_decay);
  b.num("dlda.patience", l.patience);
  b.num("dlda.beta_init_sd", l.beta_init_sd);
  b.num("dlda.beta_init_logvar", l.beta_init_logvar);
  b.num("dlda.eta_init_log_sd", l.eta_init_log_sd);

  b.num("eval.coherence_top_n", c.metrics.coherence_top_n);
  b.num("eval.diversity_top_n", c.metrics.diversity_top_n);
  b.num("export.top_n", c.export_top_n);

  auto& s = c.synth;
  b.num("synth.K", s.K);
  b.num("synth.T", s.T);
  b.num("synth.V", s.V);
  b.num("synth.L", s.L);
  b.num("synth.delta2", s.delta2);
  b.num("synth.gamma2", s.gamma2);
  b.num("synth.a2", s.a2);
  b.num("synth.n_docs", s.n_docs);
  b.num("synth.tokens_per_doc", s.tokens_per_doc);
  return std::move(b.fields);
}

const Field& find(const std::vector<Field>& fields, const std::string& key) {
  for (const auto& f : fields)
    if (f.key == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  find(bind(*this), dotted_key).set(trim(value));
}

std::string RunConfig::get(const std::string& dotted_key) const {
  return find(bind(const_cast<RunConfig&>(*this)), dotted_key).get();
}

std::vector<std::string> RunConfig::keys() {
  RunConfig scratch;
  std::vector<std::string> out;
  for (const auto& f : bind(scratch)) out.push_back(f.key);
  return out;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  const auto fields = bind(*this);
  std::string line, section;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto where = [&] { return fmt::format("{}:{}", path.string(), lineno); };
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where() + ": malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + ": expected key = value");
    if (section.empty()) throw ConfigError(where() + ": key outside of a section");
    const std::string key = section + "." + trim(std::string_view(t).substr(0, eq));
    try {
      find(fields, key).set(trim(std::string_view(t).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where() + ": " + e.what());
    }
  }
}

void RunConfig::resolve() {
  preprocess.split.seed = seed;
  preprocess.threads = threads;
  skipgram.seed = seed;
  detm.seed = seed;
  dlda.seed = seed;
  synth.seed = seed;
  synth.split = preprocess.split;
  if (stopwords == "default") {
    preprocess.vocab.stopwords = corpus::default_stopwords();
  } else if (stopwords == "none") {
    preprocess.vocab.stopwords.clear();
  } else {
    preprocess.vocab.stopwords = corpus::load_stopwords(stopwords);
  }
}

void RunConfig::validate() const {
  if (model != "detm" && model != "dlda-rep")
    throw ConfigError("run.model must be 'detm' or 'dlda-rep', got '" + model + "'");
  if (threads < 1) throw ConfigError("run.threads must be >= 1");
  detm.validate();
  dlda.validate();
  if (skipgram.dim < 1 || skipgram.window < 1 || skipgram.epochs < 1 || !(skipgram.lr > 0))
    throw ConfigError("embeddings: dim, window, epochs and lr must be positive");
  if (export_top_n < 1) throw ConfigError("export.top_n must be >= 1");
  if (metrics.coherence_top_n < 2 || metrics.diversity_top_n < 1)
    throw ConfigError("eval: coherence_top_n must be >= 2 and diversity_top_n >= 1");
}

std::string RunConfig::to_ini() const {
  std::string out = fmt::format("# detm {}\n", DETM_VERSION);
  std::string section;
  for (const auto& f : bind(const_cast<RunConfig&>(*this))) {
    const auto dot = f.key.find('.');
    const std::string s = f.key.substr(0, dot);
    if (s != section) {
      out += fmt::format("{}[{}]\n", section.empty() ? "" : "\n", s);
      section = s;
    }
    out += fmt::format("{} = {}\n", f.key.substr(dot + 1), f.get());
  }
  return out;
}

void write_resolved_config(const std::filesystem::path& dir, const RunConfig& config) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "resolved_config.ini", std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / "resolved_config.ini").string());
  out << config.to_ini();
}

}  // namespace detm::pipeline
