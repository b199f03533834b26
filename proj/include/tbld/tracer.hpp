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

// Runs BuildScript processes for real and reports what they did as trace
// statements. Every effect goes through the model first: paths resolve
// against the Env, state reaches the disk through Env::commit, and the
// resulting statements are handed to a TraceHost.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tbld/buildscript.hpp"
#include "tbld/cache.hpp"
#include "tbld/fsmodel.hpp"
#include "tbld/planner.hpp"
#include "tbld/traceir.hpp"

namespace tbld {

struct SpawnOutcome {
  CmdRef child;
  std::optional<std::int32_t> skipped_exit;  // set when the child was emulated
};

class TraceHost {
 public:
  virtual ~TraceHost() = default;

  virtual Env& env() = 0;
  virtual ContentCache& cache() = 0;
  virtual std::mt19937_64& rng() = 0;

  /// Evaluates a statement of a traced command and appends it to the trace.
  virtual void emit(const Statement& s) = 0;
  /// Emits the Launch for a child of a traced parent and decides whether the
  /// child has to run.
  virtual SpawnOutcome spawn(CmdRef parent, const Command& cmd) = 0;
  virtual void mark(CmdRef c, MarkReason why) = 0;

  /// Commands (traced or emulated) whose Exit has been seen this pass.
  virtual const std::set<std::uint32_t>& exited() const = 0;
  virtual std::optional<std::int32_t> exit_code(CmdRef c) const = 0;

  /// Output written to the stdout/stderr special files.
  virtual void console(const std::string& text) = 0;
};

struct Process;

class Tracer {
 public:
  explicit Tracer(TraceHost& host);
  ~Tracer();
  Tracer(const Tracer&) = delete;
  Tracer& operator=(const Tracer&) = delete;

  /// Registers a traced command. Its refs must already be bound.
  void start(CmdRef id, const Command& cmd);

  /// Steps every runnable process until all are blocked or done.
  void run_until_quiescent();
  /// Runs until id has exited, forcing end-of-file on stuck pipe reads.
  void run_until_exited(CmdRef id);
  void run_to_completion();

  bool running(CmdRef id) const;
  std::size_t started() const { return started_; }

 private:
  enum class Step { kProgress, kBlocked, kDone };
  Step step(Process& p);
  bool step_all();
  bool force_one_eof();

  TraceHost& host_;
  std::map<std::uint32_t, std::unique_ptr<Process>> procs_;
  std::size_t started_ = 0;
  // Bytes written to each pipe and not yet read.
  std::map<ArtifactId, std::string> pipe_bytes_;

  friend class ProcessOps;
};

}  // namespace tbld
