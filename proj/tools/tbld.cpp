// Copyright 2026 The tracebuild Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// tbld: build a project from its Buildfile, rerunning only what changed.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tbld/engine.hpp"
#include "tbld/trace_io.hpp"

namespace {

int print_stats(const tbld::BuildStats& s) {
  std::cout << fmt::format(
      "phases {}\ntraced {}\nemulated {}\nbacktracked {}\nversions committed {}\n"
      "cache hits {}\ncache misses {}\n",
      s.phases, s.traced, s.skipped, s.backtracked, s.versions_committed, s.cache_hits,
      s.cache_misses);
  if (s.post_anomaly) std::cout << "warning: end-of-build check saw a change\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tbld: forward build tool"};
  tbld::BuildOptions opts;
  std::string dir = ".";
  bool show = false;
  bool stats = false;
  std::optional<std::uint64_t> seed;
  app.add_option("-C,--directory", dir, "Project directory");
  app.add_option("--seed", seed, "Seed for temporary file names");

  auto* build = app.add_subcommand("build", "Build the project (default)");
  auto add_build_flags = [&](CLI::App* a) {
    a->add_option("-f,--file", opts.buildfile, "Build script to run (default Buildfile)");
    a->add_flag("--fresh", opts.fresh, "Ignore the previous trace and build from scratch");
    a->add_flag("-n,--dry-run", opts.dry_run, "Report what would run without running it");
    a->add_flag("--show", show, "Print what build scripts write to stdout");
    a->add_flag("--stats", stats, "Print build statistics");
    a->add_flag("--explain", opts.explain, "Explain why each command runs");
  };
  add_build_flags(&app);
  add_build_flags(build);
  auto* trace = app.add_subcommand("trace", "Inspect the stored trace");
  auto* dump = trace->add_subcommand("dump", "Print every statement");
  auto* gc = app.add_subcommand("gc", "Remove cached files the trace no longer uses");
  trace->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  opts.root = std::filesystem::absolute(dir);
  if (const char* env = std::getenv("TBLD_DIR"); env && *env) {
    opts.state_dir = std::filesystem::absolute(env);
  }
  opts.seed = seed;

  try {
    if (dump->parsed()) {
      for (const auto& s : tbld::load_trace(opts.trace_path())) {
        std::cout << tbld::render_statement(s) << "\n";
      }
      return 0;
    }
    if (gc->parsed()) {
      std::cout << fmt::format("removed {} cached files\n", tbld::collect_garbage(opts));
      return 0;
    }
    if (show) opts.console = &std::cout;
    opts.log = &std::cerr;
    tbld::BuildResult r = tbld::do_build(opts);
    if (opts.dry_run) {
      for (const auto& c : r.will_run) std::cout << "will run: " << c << "\n";
      for (const auto& c : r.may_run) std::cout << "may run: " << c << "\n";
    }
    if (stats) print_stats(r.stats);
    if (r.exit_code != 0) std::cerr << "tbld: the build script failed\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "tbld: " << e.what() << "\n";
    return 2;
  }
}
