// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

namespace detm::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  std::filesystem::path scratch;       // working directory, wiped per check
  std::filesystem::path data_dir;      // tests/data
  std::filesystem::path cli;           // detm executable
  std::filesystem::path debian_docs;   // root holding */changelog.Debian.gz
};

Outcome gradient_suite(const Options&);
Outcome kl_oracles(const Options&);
Outcome marginalization(const Options&);
Outcome metric_oracles(const Options&);
Outcome optimization_and_recovery(const Options&, Outcome& recovery);
Outcome smoothness(const Options&);
Outcome determinism(const Options&);
Outcome diversity_ordering(const Options&);
Outcome cli_round_trip(const Options&);

}  // namespace detm::acceptance
