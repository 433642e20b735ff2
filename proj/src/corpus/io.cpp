// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/corpus/io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "detm/errors.hpp"

namespace detm::corpus {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint32_t kDocsMagic = 0x424D5444;    // "DTMB"
constexpr std::uint32_t kTokensMagic = 0x544D5444;  // "DTMT"
constexpr std::uint32_t kFormatVersion = 1;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + p.string());
}

void put_u32(std::string& buf, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  buf.append(b, 4);
}

class U32Reader {
 public:
  U32Reader(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}
  std::uint32_t next() {
    if (pos_ + 4 > bytes_.size()) throw DataError(what_ + ": truncated");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += 4;
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw DataError(std::string(what) + " exceeds 32-bit range");
  return static_cast<std::uint32_t>(v);
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::int64_t parse_year(const std::string& timestamp) {
  std::size_t i = 0;
  while (i < timestamp.size() && std::isspace(static_cast<unsigned char>(timestamp[i]))) ++i;
  bool neg = false;
  if (i < timestamp.size() && (timestamp[i] == '-' || timestamp[i] == '+')) neg = timestamp[i++] == '-';
  std::size_t start = i;
  std::int64_t v = 0;
  while (i < timestamp.size() && std::isdigit(static_cast<unsigned char>(timestamp[i]))) {
    if (i - start >= 12) throw DataError("timestamp '" + timestamp + "' is out of range");
    v = v * 10 + (timestamp[i++] - '0');
  }
  if (i == start) throw DataError("timestamp '" + timestamp + "' has no leading year");
  return neg ? -v : v;
}

std::vector<RawDocument> load_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<RawDocument> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!rec.is_object() || !rec.contains("text") || !rec["text"].is_string())
      throw DataError(where + ": record needs a string \"text\" field");
    if (!rec.contains("timestamp")) throw DataError(where + ": record has no \"timestamp\"");
    RawDocument d;
    d.text = rec["text"].get<std::string>();
    const auto& ts = rec["timestamp"];
    if (ts.is_number_integer()) d.year = ts.get<std::int64_t>();
    else if (ts.is_string()) d.year = parse_year(ts.get<std::string>());
    else throw DataError(where + ": \"timestamp\" must be a string or an integer");
    if (rec.contains("id")) d.source_id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
    else d.source_id = std::to_string(lineno);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<RawDocument> load_text_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RawDocument> out;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    if (name.empty() || !std::isdigit(static_cast<unsigned char>(name[0])))
      throw DataError("file name '" + name + "' does not start with a year");
    RawDocument d;
    d.year = parse_year(name);
    d.text = read_file(f);
    d.source_id = name;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<RawDocument> load_documents(const fs::path& path) {
  return fs::is_directory(path) ? load_text_directory(path) : load_jsonl(path);
}

CorpusBundle preprocess(const std::vector<RawDocument>& docs, const PreprocessConfig& config,
                        PreprocessReport* report) {
  PreprocessReport rep;
  rep.raw_documents = docs.size();
  if (docs.empty()) throw DataError("no input documents");

  std::vector<std::vector<std::string>> tokens(docs.size());
  parallel_for(docs.size(), config.threads,
               [&](std::size_t i) { tokens[i] = tokenize(docs[i].text, config.tokenization); });

  CorpusBundle bundle;
  bundle.config = config;
  bundle.vocab = build_vocabulary(tokens, config.vocab);

  std::vector<TimedDocument> kept;
  std::vector<std::int64_t> years;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::vector<TermId> ids;
    ids.reserve(tokens[i].size());
    for (const auto& tok : tokens[i]) {
      if (auto id = bundle.vocab.find(tok)) ids.push_back(*id);
      else ++rep.oov_tokens_dropped;
    }
    if (ids.empty()) {
      ++rep.empty_dropped;
      continue;
    }
    kept.push_back(TimedDocument::from_tokens(std::move(ids), 0, docs[i].source_id));
    years.push_back(docs[i].year);
  }
  if (rep.empty_dropped > 0) spdlog::info("dropped {} empty documents after filtering", rep.empty_dropped);
  if (kept.empty()) throw DataError("every document is empty after vocabulary filtering");

  const std::size_t n_kept = kept.size();
  bundle.split = split_and_bin(std::move(kept), years, config.split);
  rep.short_heldout_dropped =
      n_kept - bundle.split.train.size() - bundle.split.validation.size() - bundle.split.test.size();
  if (rep.short_heldout_dropped > 0)
    spdlog::info("dropped {} one-word documents from validation/test", rep.short_heldout_dropped);
  if (report) *report = rep;
  return bundle;
}

void save_bundle(const CorpusBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& s = bundle.split;
  std::vector<const TimedDocument*> all;
  for (const auto* part : {&s.train, &s.validation, &s.test})
    for (const auto& d : *part) all.push_back(&d);

  std::string vocab;
  for (const auto& t : bundle.vocab.terms()) vocab += t + "\n";
  write_file(dir / "vocab.txt", vocab);

  std::size_t n_triples = 0;
  for (const auto* d : all) n_triples += d->counts.size();
  std::string docs_bin;
  put_u32(docs_bin, kDocsMagic);
  put_u32(docs_bin, kFormatVersion);
  put_u32(docs_bin, checked_u32(all.size(), "document count"));
  put_u32(docs_bin, checked_u32(bundle.V(), "vocabulary size"));
  put_u32(docs_bin, checked_u32(n_triples, "triple count"));
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (const auto& tc : all[i]->counts) {
      put_u32(docs_bin, static_cast<std::uint32_t>(i));
      put_u32(docs_bin, tc.term);
      put_u32(docs_bin, tc.count);
    }
  }
  write_file(dir / "docs.bin", docs_bin);

  std::string tokens_bin;
  put_u32(tokens_bin, kTokensMagic);
  put_u32(tokens_bin, kFormatVersion);
  put_u32(tokens_bin, checked_u32(all.size(), "document count"));
  for (const auto* d : all) {
    put_u32(tokens_bin, checked_u32(d->tokens.size(), "document length"));
    for (auto t : d->tokens) put_u32(tokens_bin, t);
  }
  write_file(dir / "tokens.bin", tokens_bin);

  auto range = [](std::size_t from, std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = from + i;
    return v;
  };
  json splits;
  splits["train"] = range(0, s.train.size());
  splits["validation"] = range(s.train.size(), s.validation.size());
  splits["test"] = range(s.train.size() + s.validation.size(), s.test.size());
  splits["ratios"] = bundle.config.split.ratios;
  splits["seed"] = bundle.config.split.seed;
  json ids = json::array();
  for (const auto* d : all) ids.push_back(d->source_id);
  splits["source_ids"] = std::move(ids);
  write_file(dir / "splits.json", splits.dump(2) + "\n");

  json bins;
  bins["T"] = s.T;
  bins["bin_width"] = bundle.config.split.bin_width;
  bins["labels"] = s.bin_labels;
  json doc_bins = json::array();
  for (const auto* d : all) doc_bins.push_back(d->time_bin);
  bins["doc_bins"] = std::move(doc_bins);
  write_file(dir / "bins.json", bins.dump(2) + "\n");

  const auto& c = bundle.config;
  json meta;
  meta["format_version"] = kFormatVersion;
  meta["V"] = bundle.V();
  meta["T"] = bundle.T();
  meta["vocab_hash"] = bundle.vocab.hash();
  meta["doc_freq"] = bundle.vocab.doc_freqs();
  meta["config"] = {
      {"lowercase", c.tokenization.lowercase},
      {"min_token_length", c.tokenization.min_token_length},
      {"min_df", c.vocab.min_df},
      {"max_df_fraction", c.vocab.max_df_fraction},
      {"stopwords", c.vocab.stopwords},
  };
  write_file(dir / "bundle.json", meta.dump(2) + "\n");
}

CorpusBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("corpus bundle " + dir.string() + " does not exist");
  json meta, splits, bins;
  try {
    meta = json::parse(read_file(dir / "bundle.json"));
    splits = json::parse(read_file(dir / "splits.json"));
    bins = json::parse(read_file(dir / "bins.json"));
  } catch (const json::exception& e) {
    throw DataError("corpus bundle " + dir.string() + ": " + e.what());
  }

  CorpusBundle b;
  try {
    std::vector<std::string> terms;
    {
      std::istringstream in(read_file(dir / "vocab.txt"));
      std::string line;
      while (std::getline(in, line)) terms.push_back(line);
    }
    b.vocab = Vocabulary(std::move(terms), meta.at("doc_freq").get<std::vector<std::size_t>>());
    if (b.vocab.hash() != meta.at("vocab_hash").get<std::string>())
      throw DataError("vocab.txt does not match the vocabulary hash in bundle.json");

    const auto& c = meta.at("config");
    b.config.tokenization.lowercase = c.at("lowercase").get<bool>();
    b.config.tokenization.min_token_length = c.at("min_token_length").get<std::size_t>();
    b.config.vocab.min_df = c.at("min_df").get<std::size_t>();
    b.config.vocab.max_df_fraction = c.at("max_df_fraction").get<double>();
    b.config.vocab.stopwords = c.at("stopwords").get<std::set<std::string>>();
    b.config.split.ratios = splits.at("ratios").get<std::array<double, 3>>();
    b.config.split.seed = splits.at("seed").get<std::uint64_t>();
    b.config.split.bin_width = bins.at("bin_width").get<int>();

    b.split.T = bins.at("T").get<std::size_t>();
    b.split.bin_labels = bins.at("labels").get<std::vector<std::string>>();
    const auto doc_bins = bins.at("doc_bins").get<std::vector<std::uint32_t>>();
    const auto source_ids = splits.at("source_ids").get<std::vector<std::string>>();

    const std::string tokens_bytes = read_file(dir / "tokens.bin");
    U32Reader tr(tokens_bytes, "tokens.bin");
    if (tr.next() != kTokensMagic) throw DataError("tokens.bin: bad magic");
    if (tr.next() != kFormatVersion) throw DataError("tokens.bin: unsupported version");
    const std::uint32_t n_docs = tr.next();
    if (n_docs != doc_bins.size() || n_docs != source_ids.size())
      throw DataError("bundle files disagree on the document count");

    std::vector<TimedDocument> all(n_docs);
    for (std::uint32_t i = 0; i < n_docs; ++i) {
      std::vector<TermId> toks(tr.next());
      for (auto& t : toks) {
        t = tr.next();
        if (t >= b.vocab.size()) throw DataError("tokens.bin: term id out of range");
      }
      if (doc_bins[i] >= b.split.T) throw DataError("bins.json: time bin out of range");
      all[i] = TimedDocument::from_tokens(std::move(toks), doc_bins[i], source_ids[i]);
    }
    if (!tr.done()) throw DataError("tokens.bin: trailing bytes");

    // docs.bin is the canonical count table; it has to agree with the tokens.
    const std::string docs_bytes = read_file(dir / "docs.bin");
    U32Reader dr(docs_bytes, "docs.bin");
    if (dr.next() != kDocsMagic) throw DataError("docs.bin: bad magic");
    if (dr.next() != kFormatVersion) throw DataError("docs.bin: unsupported version");
    if (dr.next() != n_docs) throw DataError("docs.bin: document count mismatch");
    if (dr.next() != b.vocab.size()) throw DataError("docs.bin: vocabulary size mismatch");
    const std::uint32_t n_triples = dr.next();
    std::vector<std::size_t> cursor(n_docs, 0);
    for (std::uint32_t k = 0; k < n_triples; ++k) {
      const std::uint32_t d = dr.next(), term = dr.next(), count = dr.next();
      if (d >= n_docs || cursor[d] >= all[d].counts.size() || all[d].counts[cursor[d]] != TermCount{term, count})
        throw DataError("docs.bin disagrees with tokens.bin");
      ++cursor[d];
    }
    if (!dr.done()) throw DataError("docs.bin: trailing bytes");
    for (std::uint32_t d = 0; d < n_docs; ++d)
      if (cursor[d] != all[d].counts.size()) throw DataError("docs.bin disagrees with tokens.bin");

    auto take = [&](const char* key, std::vector<TimedDocument>& into) {
      for (auto idx : splits.at(key).get<std::vector<std::size_t>>()) {
        if (idx >= n_docs) throw DataError(std::string("splits.json: index out of range in ") + key);
        into.push_back(all[idx]);
      }
    };
    take("train", b.split.train);
    take("validation", b.split.validation);
    take("test", b.split.test);
  } catch (const json::exception& e) {
    throw DataError("corpus bundle " + dir.string() + ": " + e.what());
  }
  return b;
}

std::string summary_table(const CorpusBundle& b) {
  std::ostringstream os;
  os << "# Docs Train\t# Docs Val\t# Docs Test\t# Timestamps\tVocabulary\n"
     << b.split.train.size() << '\t' << b.split.validation.size() << '\t' << b.split.test.size() << '\t'
     << b.T() << '\t' << b.V() << '\n';
  return os.str();
}

}  // namespace detm::corpus
