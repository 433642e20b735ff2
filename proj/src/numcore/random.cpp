// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/numcore/random.hpp"

#include <vector>

namespace detm::nc {

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto p : path) push(p);
  std::seed_seq seq(words.begin(), words.end());
  std::uint64_t state[2];
  seq.generate(reinterpret_cast<std::uint32_t*>(state),
               reinterpret_cast<std::uint32_t*>(state) + 4);
  return Rng(state[0] ^ (state[1] << 1));
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

Tensor Rng::normal_tensor(const Shape& shape, double mean, double stddev) {
  Tensor t(shape);
  for (auto& v : t.data()) v = mean + stddev * normal();
  return t;
}

Tensor Rng::uniform_tensor(const Shape& shape, double lo, double hi) {
  Tensor t(shape);
  for (auto& v : t.data()) v = lo + (hi - lo) * uniform();
  return t;
}

}  // namespace detm::nc
