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

// One build pass: re-emulates the previous trace, runs the commands of the
// run set through the tracer, and produces the next trace, the dependence
// graph and the commands that observed a change.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbld/cache.hpp"
#include "tbld/fsmodel.hpp"
#include "tbld/planner.hpp"
#include "tbld/traceir.hpp"

namespace tbld {

struct PassInput {
  const std::vector<Statement>* trace = nullptr;  // previous trace
  RunSet run;                                     // ids of the previous trace
  std::set<CmdRef> fresh;                         // traced earlier in this build
  bool post = false;                              // record end-of-build partners
  Env* final_env = nullptr;                       // end-of-build state, post passes only
  std::mt19937_64* rng = nullptr;
  // Exit-code re-marks per command line, shared across passes of one build.
  std::map<std::string, int>* remarks = nullptr;
  int max_remarks = 16;
  std::ostream* console = nullptr;
};

struct PassResult {
  std::vector<Statement> trace;
  DepGraph graph;
  RunSet marked;  // ids of the new trace
  std::set<CmdRef> fresh;
  std::vector<CmdRef> traced;
  std::vector<CmdRef> skipped;
  std::map<CmdRef, std::string> names;
  std::size_t backtracked = 0;
  std::size_t cache_misses = 0;
  bool post_anomaly = false;  // a post pass observed a change
  std::int32_t root_exit = 0;
};

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PassResult run_pass(Env& env, ContentCache& cache, const PassInput& in);

/// The trace of a build that has never run: the tool launches ./Buildfile
/// with the standard streams.
std::vector<Statement> seed_trace(const std::string& buildfile = "Buildfile");

/// Renders a statement in the dump syntax.
std::string render_statement(const Statement& s);

}  // namespace tbld
