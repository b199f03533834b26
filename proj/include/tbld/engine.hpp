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

// The build loop: emulate, plan, run, repeat until nothing changes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tbld/evaluator.hpp"

namespace tbld {

struct BuildOptions {
  std::filesystem::path root;       // project directory, the sandbox
  std::filesystem::path state_dir;  // empty: root/.tbld
  std::string buildfile = "Buildfile";
  bool fresh = false;               // ignore the previous trace
  bool dry_run = false;
  bool explain = false;
  std::optional<std::uint64_t> seed;  // temp-name generator
  std::ostream* console = nullptr;    // what scripts print
  std::ostream* log = nullptr;        // explanations and dry-run report
  int max_phases = 64;
  // Called after every pass with its number, result and the next run set.
  std::function<void(int, const PassResult&, const RunSet&)> observer;

  std::filesystem::path state() const { return state_dir.empty() ? root / ".tbld" : state_dir; }
  std::filesystem::path trace_path() const { return state() / "trace"; }
  std::filesystem::path cache_dir() const { return state() / "cache"; }
};

struct BuildStats {
  std::size_t phases = 0;
  std::size_t traced = 0;
  std::size_t skipped = 0;
  std::size_t backtracked = 0;
  std::size_t versions_committed = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  bool post_anomaly = false;
};

struct BuildResult {
  int exit_code = 0;  // 0 ok, 1 the build script failed
  BuildStats stats;
  // Command lines of every traced command, in order.
  std::vector<std::string> traced;
  // Command lines of every command in the final trace.
  std::vector<std::string> commands;
  // Dry runs only.
  std::vector<std::string> will_run;
  std::vector<std::string> may_run;
};

BuildResult do_build(const BuildOptions& opts);

/// Drops cached files the current trace no longer mentions. Returns the
/// number removed.
std::size_t collect_garbage(const BuildOptions& opts);

/// Digests of all file contents a trace mentions.
std::set<Digest> live_digests(const std::vector<Statement>& trace);

}  // namespace tbld
