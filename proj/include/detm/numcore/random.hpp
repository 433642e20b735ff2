// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "detm/numcore/tensor.hpp"

namespace detm::nc {

/// Seeded random stream. Streams for sub-tasks are derived from a root seed
/// plus a path of integers, so any step of a run can be replayed in
/// isolation (e.g. after resuming from a checkpoint).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);
  std::mt19937_64& engine() { return engine_; }

  Tensor normal_tensor(const Shape& shape, double mean = 0.0, double stddev = 1.0);
  Tensor uniform_tensor(const Shape& shape, double lo, double hi);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace detm::nc
