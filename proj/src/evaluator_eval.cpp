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

// Evaluating single statements against the model.

#include <cstdio>
#include <cstdlib>
#include <algorithm>

#include "pass.hpp"

namespace tbld {

namespace {

bool dir_change_produced(Env& env, ArtifactId dir, const DirContent& expected) {
  auto now = env.list(dir);
  std::vector<std::string> diff;
  std::set_symmetric_difference(now.begin(), now.end(), expected.entries.begin(),
                                expected.entries.end(), std::back_inserter(diff));
  auto produced = env.produced_entries(dir);
  return std::any_of(diff.begin(), diff.end(),
                     [&](const std::string& n) { return produced.count(n) > 0; });
}

}  // namespace

std::optional<ArtifactId> Pass::usable(CmdRef owner, RefId ref) const {
  if (!env_->has_ref(owner, ref)) return std::nullopt;
  const RefEntry& e = env_->ref(owner, ref);
  if (e.result != ResultCode::kSuccess || !e.artifact) return std::nullopt;
  return e.artifact;
}

void Pass::depend(CmdRef consumer, StateId state) {
  if (state.id == 0) return;
  const StateInfo& info = env_->state_info(state);
  if (!info.producer || *info.producer == consumer) return;
  st_.graph.add_edge(*info.producer, consumer, state, info.cached);
}

void Pass::output(CmdRef producer, StateId state) {
  st_.graph.add_output(producer, state, env_->state_info(state).cached);
}

void Pass::bind_child_refs(CmdRef parent, const stmt::Launch& l) {
  auto copy = [&](RefId from) {
    if (env_->has_ref(parent, from)) return env_->ref(parent, from);
    RefEntry missing;
    missing.result = ResultCode::kNoEnt;
    return missing;
  };
  std::uint32_t next = 0;
  env_->bind_ref(l.child, RefId{next++}, copy(l.command.root));
  env_->bind_ref(l.child, RefId{next++}, copy(l.command.cwd));
  for (const auto& [fd, ref] : l.command.initial_fds) {
    env_->bind_ref(l.child, RefId{next++}, copy(ref));
  }
}

void Pass::note_change(CmdRef owner, std::optional<std::size_t> old_index, bool pre_only) {
  if (in_.post) {
    post_anomaly_ = true;
    return;
  }
  if (std::getenv("TBLD_DEBUG")) {
    std::fprintf(stderr, "change c%u%s: %s\n", owner.id, pre_only ? " (pre only)" : "",
                 old_index ? render_statement(old_[*old_index]).c_str() : "?");
  }
  st_.pre.insert(owner);
  if (pre_only) return;
  if (old_index && *old_index + 1 < old_.size()) {
    const Statement& next = old_[*old_index + 1];
    if (next.phase == Phase::kPostBuild && next.owner == old_[*old_index].owner &&
        next.body.index() == old_[*old_index].body.index()) {
      Statement partner = next;
      partner.owner = owner;
      if (post_changed(partner)) st_.post.insert(owner);
      return;
    }
  }
  st_.post.insert(owner);
}

bool Pass::post_changed(const Statement& partner) {
  const CmdRef o = partner.owner;
  if (const auto* x = std::get_if<stmt::ExpectResult>(&partner.body)) {
    if (!env_->has_ref(o, x->ref)) return true;
    return env_->ref(o, x->ref).result != x->expected;
  }
  if (const auto* m = std::get_if<stmt::MatchContent>(&partner.body)) {
    auto a = usable(o, m->ref);
    if (!a || env_->artifact(*a).kind == ArtifactKind::kPipe) return true;
    return !env_->match_content(*a, m->state);
  }
  if (const auto* m = std::get_if<stmt::MatchMetadata>(&partner.body)) {
    auto a = usable(o, m->ref);
    return !a || !env_->match_metadata(*a, m->state);
  }
  return true;
}

void Pass::eval(const Statement& s, bool committed, std::optional<std::size_t> oi) {
  Env& e = *env_;
  const CmdRef o = s.owner;
  const bool checking = !committed;
  auto changed = [&](bool counts) {
    if (checking && counts) note_change(o, oi, false);
  };

  if (const auto* p = std::get_if<stmt::PathRef>(&s.body)) {
    auto base = usable(o, p->base);
    if (!base) {
      if (committed) throw ModelError("traced path resolution from an unusable ref");
      RefEntry bad;
      bad.result = ResultCode::kNoEnt;
      e.bind_ref(o, p->out, bad);
      return;
    }
    Resolution r = e.resolve(*base, p->path, p->flags, o, committed);
    e.bind_ref(o, p->out, RefEntry{r.artifact, r.code, false, PipeEnd::kNone, r.produced});
    std::vector<StateId> deps;
    for (ArtifactId t : r.traversed) deps.push_back(e.content_state_id(t));
    st_.ref_deps[{o.id, p->out.id}] = std::move(deps);
    if (in_.post) {
      if (auto bp = e.sandbox_path(*base)) {
        path_records_[{o.id, p->out.id}] = PathRecord{*bp, p->path, p->flags};
      } else {
        path_records_.erase({o.id, p->out.id});
      }
    }
    if (r.artifact && (p->flags.create || p->flags.truncate)) {
      StateId id = e.content_state_id(*r.artifact);
      if (e.state_info(id).producer == o) output(o, id);
    }
  } else if (const auto* x = std::get_if<stmt::ExpectResult>(&s.body)) {
    for (StateId d : st_.ref_deps[{o.id, x->ref.id}]) depend(o, d);
    const bool known = e.has_ref(o, x->ref);
    const ResultCode now = known ? e.ref(o, x->ref).result : ResultCode::kNoEnt;
    if (now != x->expected) {
      changed(!fresh(o) || !known || e.ref(o, x->ref).produced);
    }
  } else if (const auto* m = std::get_if<stmt::MatchMetadata>(&s.body)) {
    auto a = usable(o, m->ref);
    if (!a) {
      changed(true);
      return;
    }
    depend(o, e.metadata_state_id(*a));
    if (!e.match_metadata(*a, m->state)) changed(!fresh(o) || e.metadata_produced(*a));
  } else if (const auto* m = std::get_if<stmt::MatchContent>(&s.body)) {
    auto a = usable(o, m->ref);
    if (!a) {
      changed(true);
      return;
    }
    const Artifact& art = e.artifact(*a);
    if (art.kind == ArtifactKind::kPipe) {
      const bool same = committed || e.match_content(*a, m->state);
      st_.pipe_readers[*a].insert(o);
      bool emulated_input = false;
      for (StateId w : e.consume_pipe(*a)) {
        depend(o, w);
        if (committed && st_.emulated_pipe_writes.count(w)) {
          emulated_input = true;
          if (auto prod = e.state_info(w).producer) mark(*prod, MarkReason::kChanged);
        }
      }
      // A traced reader cannot see bytes an emulated writer never produced.
      if (committed && emulated_input) mark(o, MarkReason::kChanged);
      if (!same) changed(true);
      return;
    }
    depend(o, e.content_state_id(*a));
    if (e.match_content(*a, m->state)) return;
    bool counts = !fresh(o);
    if (!counts) {
      if (art.kind == ArtifactKind::kDir) {
        const auto* d = std::get_if<DirContent>(&m->state);
        counts = !d || dir_change_produced(e, *a, *d);
      } else {
        counts = e.content_produced(*a);
      }
    }
    changed(counts);
  } else if (const auto* c = std::get_if<stmt::CompareRefs>(&s.body)) {
    auto a = usable(o, c->a);
    auto b = usable(o, c->b);
    const bool same = a && b && *a == *b;
    if (same != (c->type == RefComparison::kSameInstance)) changed(true);
  } else if (const auto* x = std::get_if<stmt::ExitResult>(&s.body)) {
    auto code = exit_code(x->child);
    if (checking && code && *code != x->expected) changed(true);
  } else if (const auto* u = std::get_if<stmt::UpdateMetadata>(&s.body)) {
    auto a = usable(o, u->ref);
    auto id = a ? e.apply_metadata(*a, u->state, o, committed) : std::nullopt;
    if (!id) {
      if (checking) note_change(o, oi, true);
      return;
    }
    output(o, *id);
  } else if (const auto* u = std::get_if<stmt::UpdateContent>(&s.body)) {
    auto a = usable(o, u->ref);
    auto id = a ? e.apply_content(*a, u->state, o, committed) : std::nullopt;
    if (!id) {
      if (checking) note_change(o, oi, true);
      return;
    }
    const ArtifactKind kind = e.artifact(*a).kind;
    if (kind == ArtifactKind::kPipe) {
      st_.pipe_writers[*a].insert(o);
      if (!committed) st_.emulated_pipe_writes.insert(*id);
    } else if (kind != ArtifactKind::kSpecial) {
      output(o, *id);
    }
  } else if (const auto* ae = std::get_if<stmt::AddEntry>(&s.body)) {
    auto dir = usable(o, ae->dir);
    auto target = usable(o, ae->target);
    if (!dir || !target) {
      if (checking) note_change(o, oi, true);
      return;
    }
    if (checking) {
      // Something else already sits at the name: the add would fail, so the
      // model keeps what is there.
      auto existing = e.lookup(*dir, ae->name);
      if (existing && *existing != *target) {
        note_change(o, oi, true);
        return;
      }
    }
    if (e.add_entry(*dir, ae->name, *target, o, committed) && checking) note_change(o, oi, true);
    output(o, e.content_state_id(*dir));
  } else if (const auto* re = std::get_if<stmt::RemoveEntry>(&s.body)) {
    auto dir = usable(o, re->dir);
    auto target = usable(o, re->target);
    if (!dir || !target) {
      if (checking) note_change(o, oi, true);
      return;
    }
    if (e.remove_entry(*dir, re->name, *target, o, committed) && checking) {
      note_change(o, oi, true);
    }
    output(o, e.content_state_id(*dir));
  } else if (const auto* f = std::get_if<stmt::FileRef>(&s.body)) {
    e.bind_ref(o, f->out, RefEntry{e.new_file(o, committed), ResultCode::kSuccess});
  } else if (const auto* d = std::get_if<stmt::DirRef>(&s.body)) {
    e.bind_ref(o, d->out, RefEntry{e.new_dir(o, committed), ResultCode::kSuccess});
  } else if (const auto* y = std::get_if<stmt::SymlinkRef>(&s.body)) {
    e.bind_ref(o, y->out, RefEntry{e.new_symlink(y->dest, o, committed), ResultCode::kSuccess});
  } else if (const auto* pr = std::get_if<stmt::PipeRef>(&s.body)) {
    ArtifactId pipe = e.new_pipe();
    e.bind_ref(o, pr->read_out, RefEntry{pipe, ResultCode::kSuccess, false, PipeEnd::kRead});
    e.bind_ref(o, pr->write_out, RefEntry{pipe, ResultCode::kSuccess, false, PipeEnd::kWrite});
  } else if (const auto* sp = std::get_if<stmt::SpecialRef>(&s.body)) {
    e.bind_ref(o, sp->out, RefEntry{e.special(sp->which, sp->name), ResultCode::kSuccess});
  } else if (const auto* l = std::get_if<stmt::Launch>(&s.body)) {
    bind_child_refs(o, *l);
  } else if (const auto* dr = std::get_if<stmt::DoneWithRef>(&s.body)) {
    if (e.has_ref(o, dr->ref)) e.close_ref(o, dr->ref);
  } else if (const auto* ex = std::get_if<stmt::Exit>(&s.body)) {
    st_.exited.insert(o.id);
    st_.exit_codes[o.id] = ex->code;
  }
  // Join and UsingRef have no effect on the model.
}

}  // namespace tbld
