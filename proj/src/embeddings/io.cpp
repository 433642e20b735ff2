// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "detm/embeddings/embeddings.hpp"
#include "detm/errors.hpp"
#include "detm/numcore/random.hpp"

namespace detm::emb {

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const corpus::Vocabulary& vocab, std::size_t dim,
                                std::uint64_t seed, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  std::size_t count = 0, file_dim = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> count >> file_dim)) throw DataError(path.string() + ": header must be \"<count> <dim>\"");
  }
  if (file_dim != dim) {
    throw DataError(path.string() + ": embedding dimension " + std::to_string(file_dim) + " does not match L=" +
                    std::to_string(dim));
  }

  const std::size_t V = vocab.size();
  EmbeddingMatrix emb{nc::Tensor({dim, V}), vocab.hash()};
  std::vector<bool> seen(V, false);
  LoadReport rep;
  std::size_t rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++rows;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw DataError(path.string() + ":" + std::to_string(lineno) + ": no values");
    const auto id = vocab.find(line.substr(0, sp));
    if (!id) {
      ++rep.unused_rows;
      continue;
    }
    const char* p = line.data() + sp;
    const char* end = line.data() + line.size();
    for (std::size_t l = 0; l < dim; ++l) {
      while (p < end && *p == ' ') ++p;
      double v;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                        " numbers");
      }
      emb.rho.at(l, *id) = v;
      p = next;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) throw DataError(path.string() + ":" + std::to_string(lineno) + ": too many values");
    seen[*id] = true;
  }
  if (rows != count) {
    spdlog::warn("{}: header announces {} rows but the file has {}", path.string(), count, rows);
  }

  nc::Rng rng(seed);
  for (std::size_t v = 0; v < V; ++v) {
    if (seen[v]) continue;
    ++rep.oov_initialized;
    for (std::size_t l = 0; l < dim; ++l) emb.rho.at(l, v) = 0.1 * rng.normal();
  }
  if (rep.oov_initialized > 0)
    spdlog::info("{} vocabulary terms missing from {}; initialized randomly", rep.oov_initialized, path.string());
  if (!emb.rho.all_finite()) throw DataError(path.string() + ": non-finite embedding values");
  if (report) *report = rep;
  return emb;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& emb, const corpus::Vocabulary& vocab) {
  require_bound_to(emb, vocab);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{} {}\n", emb.V(), emb.L());
  for (std::size_t v = 0; v < emb.V(); ++v) {
    fmt::format_to(std::back_inserter(buf), "{}", vocab.term(static_cast<corpus::TermId>(v)));
    for (std::size_t l = 0; l < emb.L(); ++l) fmt::format_to(std::back_inserter(buf), " {}", emb.rho.at(l, v));
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace detm::emb
