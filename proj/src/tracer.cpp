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

// Scheduling of traced processes. Processes advance one instruction at a
// time in id order, so a build with pipes interleaves deterministically.

#include "tbld/tracer.hpp"

#include "tbld/evaluator.hpp"
#include "tracer_ops.hpp"

namespace tbld {

Tracer::Tracer(TraceHost& host) : host_(host) {}
Tracer::~Tracer() = default;

void Tracer::start(CmdRef id, const Command& cmd) {
  auto p = std::make_unique<Process>();
  p->id = id;
  p->cmd = cmd;
  p->next_ref = static_cast<std::uint32_t>(2 + cmd.initial_fds.size());
  p->scope.args = cmd.argv;
  if (p->scope.args.empty()) p->scope.args.push_back(cmd.exe);
  procs_[id.id] = std::move(p);
  ++started_;
}

bool Tracer::running(CmdRef id) const {
  auto it = procs_.find(id.id);
  return it != procs_.end() && it->second->state != Process::State::kDone;
}

Tracer::Step Tracer::step(Process& p) {
  ProcessOps ops(*this, p);
  auto finish = [&](std::int32_t code) {
    p.state = Process::State::kDone;
    p.exit_code = code;
    p.frames.clear();
    host_.emit(make_stmt(p.id, stmt::Exit{code}));
    return Step::kDone;
  };
  try {
    if (p.state == Process::State::kStarting) {
      if (auto failed = ops.load_script()) return finish(*failed);
      p.state = Process::State::kRunning;
      Frame top;
      top.body = &p.program->instrs;
      p.frames.push_back(top);
      return Step::kProgress;
    }
    if (p.frames.empty()) return finish(0);
    Frame& f = p.frames.back();
    if (f.pc >= f.body->size()) {
      if (f.loop && f.loop_next < f.loop_values.size()) {
        p.scope.vars[f.loop_var] = {f.loop_values[f.loop_next++]};
        f.pc = 0;
      } else {
        p.frames.pop_back();
      }
      return Step::kProgress;
    }
    const Instr& in = (*f.body)[f.pc];
    const std::size_t depth = p.frames.size();
    p.blocked_on_pipe = false;
    if (ops.exec(in) == Exec::kBlock) return Step::kBlocked;
    // exec may have pushed a block frame; advance the one that ran.
    if (p.state != Process::State::kDone) ++p.frames[depth - 1].pc;
    return Step::kProgress;
  } catch (const InstrExit& e) {
    return finish(e.code);
  }
}

bool Tracer::step_all() {
  std::vector<std::uint32_t> ids;
  for (const auto& [id, p] : procs_) {
    if (p->state != Process::State::kDone) ids.push_back(id);
  }
  // Starting a child is progress even when the parent then blocks on it.
  const auto started = started_;
  bool progress = false;
  for (std::uint32_t id : ids) {
    Process& p = *procs_.at(id);
    if (p.state == Process::State::kDone) continue;
    if (step(p) != Step::kBlocked) progress = true;
  }
  return progress || started_ != started;
}

bool Tracer::force_one_eof() {
  for (auto& [id, p] : procs_) {
    if (p->state != Process::State::kDone && p->blocked_on_pipe && !p->force_eof) {
      p->force_eof = true;
      return true;
    }
  }
  return false;
}

void Tracer::run_until_quiescent() {
  while (step_all()) {
  }
}

void Tracer::run_until_exited(CmdRef id) {
  while (running(id)) {
    if (step_all()) continue;
    if (!force_one_eof()) throw BuildError("traced commands are deadlocked");
  }
}

void Tracer::run_to_completion() {
  for (;;) {
    bool any = false;
    for (const auto& [id, p] : procs_) any = any || p->state != Process::State::kDone;
    if (!any) return;
    if (step_all()) continue;
    if (!force_one_eof()) throw BuildError("traced commands are deadlocked");
  }
}

}  // namespace tbld
