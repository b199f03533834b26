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

// Internal state of one pass. Shared by evaluator*.cpp only.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tbld/evaluator.hpp"
#include "tbld/tracer.hpp"

namespace tbld {

using TempMap = std::map<std::string, std::string>;

// Everything a speculative skip may have to undo.
struct PassState {
  DepGraph graph;
  std::map<std::uint32_t, std::uint32_t> ids;  // old id -> new id
  std::uint32_t next_id = 1;
  std::set<std::uint32_t> claimed;  // old ids matched by a traced parent's spawn
  TempMap temp_old_to_new, temp_new_to_old;  // temp names paired by earlier matches
  std::set<CmdRef> pre, post;
  RunSet marks;
  std::set<std::uint32_t> exited;
  std::map<std::uint32_t, std::int32_t> exit_codes;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<StateId>> ref_deps;
  std::map<ArtifactId, std::set<CmdRef>> pipe_readers, pipe_writers;
  std::set<StateId> emulated_pipe_writes;
  std::set<CmdRef> fresh;  // new ids
  std::vector<CmdRef> skipped;
  std::map<CmdRef, std::string> names;
  std::int32_t root_exit = 0;
};

class Pass : public TraceHost {
 public:
  Pass(Env& env, ContentCache& cache, const PassInput& in);
  PassResult run();

  // TraceHost
  Env& env() override { return *env_; }
  ContentCache& cache() override { return cache_; }
  std::mt19937_64& rng() override { return *in_.rng; }
  void emit(const Statement& s) override;
  SpawnOutcome spawn(CmdRef parent, const Command& cmd) override;
  void mark(CmdRef c, MarkReason why) override;
  const std::set<std::uint32_t>& exited() const override { return st_.exited; }
  std::optional<std::int32_t> exit_code(CmdRef c) const override;
  void console(const std::string& text) override;

 private:
  // Old trace structure.
  void index_trace();
  bool deferred(std::uint32_t old) const;
  std::vector<std::uint32_t> subtree(std::uint32_t old) const;

  // Evaluation. i indexes the old trace; committed means a traced command.
  std::uint32_t map_id(std::uint32_t old);
  Statement translate(const Statement& s, const TempMap* temps);
  void echo(std::size_t i, const TempMap* temps);
  void eval(const Statement& s, bool committed, std::optional<std::size_t> old_index);
  bool post_changed(const Statement& partner);
  // A check of owner disagreed. pre_only for updates whose outcome differed.
  void note_change(CmdRef owner, std::optional<std::size_t> old_index, bool pre_only);
  std::optional<ArtifactId> usable(CmdRef owner, RefId ref) const;
  bool fresh(CmdRef c) const { return prior_fresh_.count(c) > 0; }
  void depend(CmdRef consumer, StateId state);
  void output(CmdRef producer, StateId state);
  void bind_child_refs(CmdRef parent, const stmt::Launch& l);
  void finish_pipes();

  // Launch of a child of the run set from an emulated parent.
  void trace_child(const stmt::Launch& old_launch, CmdRef parent_new);
  void on_exit_result(std::size_t i);

  // Template skipping.
  std::optional<std::uint32_t> find_candidate(const Command& cmd, TempMap& temps);
  bool can_skip(std::uint32_t old, const Command& cmd, CmdRef parent);
  bool echo_subtree(std::uint32_t old, const TempMap& temps);

  // Post partners.
  void add_partner(const Statement& s);

  Env* env_;
  ContentCache& cache_;
  PassInput in_;
  const std::vector<Statement>& old_;
  PassState st_;
  std::vector<Statement> out_;
  std::unique_ptr<Tracer> tracer_;
  std::vector<CmdRef> traced_;
  std::size_t backtracked_ = 0;
  std::size_t cache_misses_ = 0;
  bool post_anomaly_ = false;
  std::set<CmdRef> prior_fresh_;

  // Post passes: how each ref was resolved, to re-resolve at the end state.
  struct PathRecord {
    std::string base;
    std::string path;
    AccessFlags flags;
  };
  std::map<std::pair<std::uint32_t, std::uint32_t>, PathRecord> path_records_;  // new ids of commands traced in earlier passes

  // Indexed old trace.
  std::map<std::uint32_t, std::uint32_t> parent_;
  std::map<std::uint32_t, std::vector<std::uint32_t>> children_;
  std::map<std::uint32_t, std::size_t> launch_pos_;
  std::map<std::uint32_t, const Command*> commands_;
  std::set<std::uint32_t> has_exit_;
  std::map<std::uint32_t, std::vector<std::size_t>> stmts_of_;
  std::set<std::uint32_t> deferred_;
};

/// Normalizes temp-file tokens to TMP0, TMP1, ... in order of appearance.
std::vector<std::string> normalize_argv(const std::vector<std::string>& argv,
                                        std::vector<std::string>* temps);

}  // namespace tbld
