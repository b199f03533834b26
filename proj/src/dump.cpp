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

// Human-readable rendering of trace statements for `tbld trace dump`.

#include <fmt/format.h>

#include "tbld/evaluator.hpp"

namespace tbld {

namespace {

std::string flags_text(const AccessFlags& f) {
  std::string s;
  s += f.read ? 'r' : '-';
  s += f.write ? 'w' : '-';
  s += f.execute ? 'x' : '-';
  if (f.create) s += fmt::format(" create {:o}", f.create_mode);
  if (f.exclusive) s += " excl";
  if (f.truncate) s += " trunc";
  if (f.nofollow) s += " nofollow";
  return s;
}

std::string content_text(const ContentState& c) {
  if (const auto* f = std::get_if<FileContent>(&c)) {
    return fmt::format("file {} {}B{}", f->hash.hex().substr(0, 12), f->size,
                       f->cached ? "" : " uncached");
  }
  if (const auto* d = std::get_if<DirContent>(&c)) {
    std::string s = "dir [";
    for (std::size_t i = 0; i < d->entries.size(); ++i) {
      if (i) s += ' ';
      s += d->entries[i];
    }
    return s + "]";
  }
  if (const auto* l = std::get_if<SymlinkContent>(&c)) return fmt::format("symlink -> {}", l->dest);
  if (const auto* p = std::get_if<PipeContent>(&c)) {
    return fmt::format("pipe {} {}", p->op == PipeOp::kRead ? "read" : "write", p->writer_epoch);
  }
  const auto& sp = std::get<SpecialContent>(c);
  return sp.policy == SpecialPolicy::kAlwaysChanged ? "special always-changed"
                                                     : "special never-changed";
}

std::string meta_text(const MetadataState& m) {
  return fmt::format("{}:{} {} {:04o}", m.uid, m.gid, kind_name(m.kind), m.perms);
}

const char* special_text(SpecialWhich w) {
  switch (w) {
    case SpecialWhich::kStdin: return "stdin";
    case SpecialWhich::kStdout: return "stdout";
    case SpecialWhich::kStderr: return "stderr";
    case SpecialWhich::kRoot: return "root";
    case SpecialWhich::kNamed: return "named";
  }
  return "?";
}

std::string body_text(const StatementBody& b) {
  using namespace stmt;
  if (const auto* x = std::get_if<PathRef>(&b)) {
    return fmt::format("r{} = PathRef(r{}, \"{}\", {})", x->out.id, x->base.id, x->path,
                       flags_text(x->flags));
  }
  if (const auto* x = std::get_if<FileRef>(&b)) return fmt::format("r{} = FileRef()", x->out.id);
  if (const auto* x = std::get_if<DirRef>(&b)) return fmt::format("r{} = DirRef()", x->out.id);
  if (const auto* x = std::get_if<PipeRef>(&b)) {
    return fmt::format("r{}, r{} = PipeRef()", x->read_out.id, x->write_out.id);
  }
  if (const auto* x = std::get_if<SymlinkRef>(&b)) {
    return fmt::format("r{} = SymlinkRef(\"{}\")", x->out.id, x->dest);
  }
  if (const auto* x = std::get_if<SpecialRef>(&b)) {
    return fmt::format("r{} = SpecialRef({}{})", x->out.id, special_text(x->which),
                       x->name.empty() ? "" : " " + x->name);
  }
  if (const auto* x = std::get_if<CompareRefs>(&b)) {
    return fmt::format("CompareRefs(r{}, r{}, {})", x->a.id, x->b.id,
                       x->type == RefComparison::kSameInstance ? "same" : "different");
  }
  if (const auto* x = std::get_if<ExpectResult>(&b)) {
    return fmt::format("ExpectResult(r{}, {})", x->ref.id, result_name(x->expected));
  }
  if (const auto* x = std::get_if<MatchMetadata>(&b)) {
    return fmt::format("MatchMetadata(r{}, {})", x->ref.id, meta_text(x->state));
  }
  if (const auto* x = std::get_if<MatchContent>(&b)) {
    return fmt::format("MatchContent(r{}, {})", x->ref.id, content_text(x->state));
  }
  if (const auto* x = std::get_if<ExitResult>(&b)) {
    return fmt::format("ExitResult(c{}, {})", x->child.id, x->expected);
  }
  if (const auto* x = std::get_if<UpdateMetadata>(&b)) {
    return fmt::format("UpdateMetadata(r{}, {})", x->ref.id, meta_text(x->state));
  }
  if (const auto* x = std::get_if<UpdateContent>(&b)) {
    return fmt::format("UpdateContent(r{}, {})", x->ref.id, content_text(x->state));
  }
  if (const auto* x = std::get_if<AddEntry>(&b)) {
    return fmt::format("AddEntry(r{}, \"{}\", r{})", x->dir.id, x->name, x->target.id);
  }
  if (const auto* x = std::get_if<RemoveEntry>(&b)) {
    return fmt::format("RemoveEntry(r{}, \"{}\", r{})", x->dir.id, x->name, x->target.id);
  }
  if (const auto* x = std::get_if<Launch>(&b)) {
    std::string fds;
    for (const auto& [fd, ref] : x->command.initial_fds) fds += fmt::format(" {}:r{}", fd, ref.id);
    return fmt::format("Launch(c{}, [{}], cwd r{}, root r{}, fds{})", x->child.id,
                       x->command.command_line(), x->command.cwd.id, x->command.root.id, fds);
  }
  if (const auto* x = std::get_if<Join>(&b)) return fmt::format("Join(c{})", x->child.id);
  if (const auto* x = std::get_if<UsingRef>(&b)) return fmt::format("UsingRef(r{})", x->ref.id);
  if (const auto* x = std::get_if<DoneWithRef>(&b)) {
    return fmt::format("DoneWithRef(r{})", x->ref.id);
  }
  return fmt::format("Exit({})", std::get<Exit>(b).code);
}

}  // namespace

std::string render_statement(const Statement& s) {
  return fmt::format("[{}] c{}: {}", s.phase == Phase::kPreBuild ? "pre " : "post", s.owner.id,
                     body_text(s.body));
}

}  // namespace tbld
