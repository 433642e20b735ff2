// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any fails. Tolerances live next to each check.
//
//   detm_acceptance [--only name[,name...]] [--scratch DIR] [--debian-docs DIR]

#include <chrono>
#include <cstdio>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "acceptance.hpp"

using namespace detm::acceptance;

int main(int argc, char** argv) {
  Options opt;
  opt.scratch = std::filesystem::temp_directory_path() / "detm_acceptance";
  opt.data_dir = DETM_TEST_DATA;
  opt.cli = DETM_CLI;
  opt.debian_docs = "/usr/share/doc";
  std::string only, scratch, debian;

  CLI::App app{"detm acceptance checks"};
  app.add_option("--only", only, "Comma-separated subset of checks");
  app.add_option("--scratch", scratch, "Working directory");
  app.add_option("--debian-docs", debian, "Directory holding <package>/changelog.Debian.gz");
  CLI11_PARSE(app, argc, argv);
  if (!scratch.empty()) opt.scratch = scratch;
  if (!debian.empty()) opt.debian_docs = debian;
  std::filesystem::remove_all(opt.scratch);
  std::filesystem::create_directories(opt.scratch);
  spdlog::set_level(spdlog::level::warn);

  std::set<std::string> wanted;
  for (std::size_t s = 0; s <= only.size() && !only.empty();) {
    const auto c = only.find(',', s);
    wanted.insert(only.substr(s, c == std::string::npos ? std::string::npos : c - s));
    if (c == std::string::npos) break;
    s = c + 1;
  }
  auto selected = [&](const std::string& n) { return wanted.empty() || wanted.count(n) > 0; };

  int failures = 0;
  auto report = [&](const std::string& name, const Outcome& o, double secs) {
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  auto run = [&](const std::string& name, auto&& check) {
    if (!selected(name)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check(opt);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };

  run("gradient-suite", gradient_suite);
  run("kl-oracles", kl_oracles);
  run("marginalization", marginalization);
  if (selected("optimization-sanity") || selected("topic-recovery")) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome opt_outcome, recovery;
    try {
      opt_outcome = optimization_and_recovery(opt, recovery);
    } catch (const std::exception& e) {
      opt_outcome = recovery = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (selected("optimization-sanity")) report("optimization-sanity", opt_outcome, secs);
    if (selected("topic-recovery")) report("topic-recovery", recovery, 0.0);
  }
  run("metric-oracles", metric_oracles);
  run("smoothness", smoothness);
  run("determinism", determinism);
  run("diversity-ordering", diversity_ordering);
  run("cli-round-trip", cli_round_trip);

  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
  return failures == 0 ? 0 : 1;
}
