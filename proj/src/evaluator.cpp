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

#include <cstdio>
#include <cstdlib>
#include <ostream>

#include <fmt/format.h>

#include "pass.hpp"

namespace tbld {

namespace {

void substitute(std::string& s, const TempMap& temps) {
  for (const auto& [from, to] : temps) {
    for (std::size_t pos = s.find(from); pos != std::string::npos;
         pos = s.find(from, pos + to.size())) {
      s.replace(pos, from.size(), to);
    }
  }
}

}  // namespace

std::vector<Statement> seed_trace(const std::string& buildfile) {
  std::vector<Statement> t;
  t.push_back(make_stmt(kToolCmd, stmt::SpecialRef{SpecialWhich::kRoot, {}, RefId{0}}));
  t.push_back(make_stmt(kToolCmd, stmt::SpecialRef{SpecialWhich::kStdin, {}, RefId{1}}));
  t.push_back(make_stmt(kToolCmd, stmt::SpecialRef{SpecialWhich::kStdout, {}, RefId{2}}));
  t.push_back(make_stmt(kToolCmd, stmt::SpecialRef{SpecialWhich::kStderr, {}, RefId{3}}));
  Command c;
  c.exe = buildfile;
  c.argv = {buildfile};
  c.cwd = RefId{0};
  c.root = RefId{0};
  c.initial_fds = {{0, RefId{1}}, {1, RefId{2}}, {2, RefId{3}}};
  t.push_back(make_stmt(kToolCmd, stmt::Launch{CmdRef{1}, c}));
  t.push_back(make_stmt(kToolCmd, stmt::Join{CmdRef{1}}));
  t.push_back(make_stmt(kToolCmd, stmt::ExitResult{CmdRef{1}, 0}));
  return t;
}

Pass::Pass(Env& env, ContentCache& cache, const PassInput& in)
    : env_(&env), cache_(cache), in_(in), old_(*in.trace) {
  index_trace();
  tracer_ = std::make_unique<Tracer>(*this);
}

void Pass::index_trace() {
  for (std::size_t i = 0; i < old_.size(); ++i) {
    const Statement& s = old_[i];
    stmts_of_[s.owner.id].push_back(i);
    if (const auto* l = std::get_if<stmt::Launch>(&s.body)) {
      parent_[l->child.id] = s.owner.id;
      children_[s.owner.id].push_back(l->child.id);
      launch_pos_[l->child.id] = i;
      commands_[l->child.id] = &l->command;
    } else if (std::holds_alternative<stmt::Exit>(s.body)) {
      has_exit_.insert(s.owner.id);
    }
  }
  for (const auto& [child, pos] : launch_pos_) {
    if (deferred(child)) deferred_.insert(child);
  }
}

bool Pass::deferred(std::uint32_t old) const {
  for (auto it = parent_.find(old); it != parent_.end(); it = parent_.find(it->second)) {
    if (it->second != 0 && in_.run.count(CmdRef{it->second})) return true;
    if (it->second == 0) break;
  }
  return false;
}

std::vector<std::uint32_t> Pass::subtree(std::uint32_t old) const {
  std::vector<std::uint32_t> out{old};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (auto it = children_.find(out[i]); it != children_.end()) {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

std::uint32_t Pass::map_id(std::uint32_t old) {
  if (old == 0) return 0;
  auto [it, inserted] = st_.ids.emplace(old, 0);
  if (inserted) {
    it->second = st_.next_id++;
    if (in_.fresh.count(CmdRef{old})) {
      st_.fresh.insert(CmdRef{it->second});
      prior_fresh_.insert(CmdRef{it->second});
    }
  }
  return it->second;
}

Statement Pass::translate(const Statement& s, const TempMap* temps) {
  Statement t = s;
  t.owner = CmdRef{map_id(s.owner.id)};
  if (auto* l = std::get_if<stmt::Launch>(&t.body)) {
    l->child = CmdRef{map_id(l->child.id)};
    if (temps) {
      substitute(l->command.exe, *temps);
      for (auto& a : l->command.argv) substitute(a, *temps);
    }
  } else if (auto* j = std::get_if<stmt::Join>(&t.body)) {
    j->child = CmdRef{map_id(j->child.id)};
  } else if (auto* x = std::get_if<stmt::ExitResult>(&t.body)) {
    x->child = CmdRef{map_id(x->child.id)};
  } else if (temps) {
    if (auto* p = std::get_if<stmt::PathRef>(&t.body)) substitute(p->path, *temps);
    if (auto* y = std::get_if<stmt::SymlinkRef>(&t.body)) substitute(y->dest, *temps);
  }
  return t;
}

void Pass::echo(std::size_t i, const TempMap* temps) {
  Statement t = translate(old_[i], temps);
  if (t.phase == Phase::kPostBuild) {
    // Partners are consulted through the pre-phase check; a post pass
    // records new ones.
    if (!in_.post) out_.push_back(std::move(t));
    return;
  }
  if (const auto* l = std::get_if<stmt::Launch>(&t.body)) {
    st_.names[l->child] = l->command.command_line();
    if (!has_exit_.count(std::get<stmt::Launch>(old_[i].body).child.id)) {
      // Never ran to completion: nothing recorded can stand in for it.
      mark(l->child, MarkReason::kChanged);
    } else {
      st_.skipped.push_back(l->child);
    }
  }
  eval(t, false, i);
  out_.push_back(t);
  if (in_.post && t.is_check()) add_partner(t);
}

void Pass::trace_child(const stmt::Launch& old_launch, CmdRef parent_new) {
  CmdRef child{map_id(old_launch.child.id)};
  stmt::Launch l{child, old_launch.command};
  Statement s = make_stmt(parent_new, l);
  st_.names[child] = l.command.command_line();
  eval(s, true, std::nullopt);
  out_.push_back(s);
  st_.fresh.insert(child);
  traced_.push_back(child);
  tracer_->start(child, l.command);
  tracer_->run_until_quiescent();
}

void Pass::on_exit_result(std::size_t i) {
  Statement t = translate(old_[i], nullptr);
  auto& x = std::get<stmt::ExitResult>(t.body);
  if (tracer_->running(x.child)) tracer_->run_until_exited(x.child);
  auto actual = exit_code(x.child);
  if (actual && *actual != x.expected) {
    if (t.owner == kToolCmd) {
      x.expected = *actual;
    } else if (st_.fresh.count(x.child)) {
      // The parent was emulated on the assumption of the old exit status.
      const std::string key = st_.names[t.owner];
      if (in_.remarks && ++(*in_.remarks)[key] > in_.max_remarks) {
        throw BuildError(fmt::format("exit status seen by '{}' does not settle", key));
      }
      ++backtracked_;
      mark(t.owner, MarkReason::kChanged);
    } else {
      note_change(t.owner, i, false);
    }
  }
  if (t.owner == kToolCmd) st_.root_exit = x.expected;
  out_.push_back(t);
  if (in_.post) add_partner(t);
}

std::optional<std::int32_t> Pass::exit_code(CmdRef c) const {
  auto it = st_.exit_codes.find(c.id);
  if (it == st_.exit_codes.end()) return std::nullopt;
  return it->second;
}

void Pass::console(const std::string& text) {
  if (in_.console) *in_.console << text;
}

void Pass::mark(CmdRef c, MarkReason why) {
  if (c == kToolCmd) return;
  st_.marks.emplace(c, why);
}

void Pass::emit(const Statement& s) {
  if (std::getenv("TBLD_DEBUG")) std::fprintf(stderr, "%s\n", render_statement(s).c_str());
  eval(s, true, std::nullopt);
  out_.push_back(s);
}

void Pass::finish_pipes() {
  // Pipe traffic is never cached: every writer feeds every reader.
  for (const auto& [pipe, readers] : st_.pipe_readers) {
    auto w = st_.pipe_writers.find(pipe);
    if (w == st_.pipe_writers.end()) continue;
    StateId id = env_->content_state_id(pipe);
    for (CmdRef writer : w->second) {
      for (CmdRef reader : readers) st_.graph.add_edge(writer, reader, id, false);
    }
  }
}

PassResult Pass::run() {
  for (std::size_t i = 0; i < old_.size(); ++i) {
    const Statement& s = old_[i];
    const std::uint32_t o = s.owner.id;
    if (o != 0 && (in_.run.count(s.owner) || deferred_.count(o))) continue;
    if (const auto* l = std::get_if<stmt::Launch>(&s.body);
        l && in_.run.count(l->child) && s.phase == Phase::kPreBuild) {
      trace_child(*l, CmdRef{map_id(o)});
      continue;
    }
    if (std::holds_alternative<stmt::ExitResult>(s.body) && s.phase == Phase::kPreBuild) {
      on_exit_result(i);
      continue;
    }
    echo(i, nullptr);
    if (const auto* j = std::get_if<stmt::Join>(&s.body)) {
      CmdRef child{map_id(j->child.id)};
      if (tracer_->running(child)) tracer_->run_until_exited(child);
    }
  }
  tracer_->run_to_completion();
  finish_pipes();

  PassResult r;
  for (CmdRef c : st_.pre) {
    if (st_.post.count(c)) st_.marks.emplace(c, MarkReason::kChanged);
  }
  st_.graph.set_persists(env_->persistent_states());
  r.trace = std::move(out_);
  r.graph = std::move(st_.graph);
  r.marked = std::move(st_.marks);
  r.fresh = std::move(st_.fresh);
  r.traced = traced_;
  r.skipped = std::move(st_.skipped);
  r.names = std::move(st_.names);
  r.backtracked = backtracked_;
  r.cache_misses = cache_misses_;
  r.post_anomaly = post_anomaly_;
  r.root_exit = st_.root_exit;
  return r;
}

PassResult run_pass(Env& env, ContentCache& cache, const PassInput& in) {
  Pass p(env, cache, in);
  return p.run();
}

}  // namespace tbld
