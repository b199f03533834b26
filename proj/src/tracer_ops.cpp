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

// File, directory and pipe effects of traced processes.

#include <fnmatch.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "tracer_ops.hpp"

namespace tbld {

namespace fs = std::filesystem;

namespace {

void need(bool ok) {
  if (!ok) throw InstrExit{1};
}

std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Splits "a/b/c" into ("a/b", "c"); a bare name has parent ".".
std::pair<std::string, std::string> split_last(std::string path) {
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  auto slash = path.find_last_of('/');
  if (slash == std::string::npos) return {".", path};
  return {slash == 0 ? "/" : path.substr(0, slash), path.substr(slash + 1)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

RefId ProcessOps::fd_ref(int fd) const {
  std::uint32_t k = 2;
  for (const auto& [n, ref] : p_.cmd.initial_fds) {
    if (n == fd) return RefId{k};
    ++k;
  }
  throw InstrExit{1};
}

void ProcessOps::emit(StatementBody body) { h_.emit(Statement{p_.id, Phase::kPreBuild, std::move(body)}); }

ResultCode ProcessOps::open(const std::string& path, const AccessFlags& flags, RefId& out) {
  out = new_ref();
  emit(stmt::PathRef{RefId{1}, path, flags, out});
  ResultCode code = env().ref(p_.id, out).result;
  emit(stmt::ExpectResult{out, code});
  return code;
}

void ProcessOps::commit(ArtifactId a) {
  try {
    env().commit(a);
  } catch (const UncommittableError& e) {
    // The bytes are gone; whoever wrote them has to run, and so do we.
    if (e.producer()) h_.mark(*e.producer(), MarkReason::kChanged);
    h_.mark(p_.id, MarkReason::kChanged);
  }
}

std::string ProcessOps::read_file(ArtifactId a, RefId ref) {
  commit(a);
  auto path = env().disk_path(a);
  std::string bytes = path ? slurp(*path) : std::string();
  const auto key = std::make_pair(a, env().content_state_id(a).id);
  if (p_.reads.insert(key).second) emit(stmt::MatchContent{ref, env().current_content(a)});
  return bytes;
}

void ProcessOps::write_file(ArtifactId a, RefId ref, const std::string& bytes, bool append) {
  commit(a);
  auto path = env().disk_path(a);
  need(path.has_value());
  {
    std::ofstream out(*path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    need(static_cast<bool>(out));
    out << bytes;
  }
  std::string all = append ? slurp(*path) : bytes;
  if (!all.empty()) h_.cache().store(all);
  FileContent fc = env().fingerprint_disk_file(a);
  emit(stmt::UpdateContent{ref, fc});
  // Our own write is not an input.
  p_.reads.insert({a, env().content_state_id(a).id});
}

void ProcessOps::write_pipe(ArtifactId a, RefId ref, const std::string& bytes) {
  const auto epoch = static_cast<std::int64_t>(env().artifact(a).unread_writes.size());
  emit(stmt::UpdateContent{ref, PipeContent{PipeOp::kWrite, epoch}});
  t_.pipe_bytes_[a] += bytes;
}

void ProcessOps::write_fd(int fd, const std::string& bytes) {
  RefId ref = fd_ref(fd);
  need(env().has_ref(p_.id, ref));
  const RefEntry& e = env().ref(p_.id, ref);
  need(e.artifact.has_value());
  ArtifactId a = *e.artifact;
  switch (env().artifact(a).kind) {
    case ArtifactKind::kSpecial:
      emit(stmt::UpdateContent{ref, SpecialContent{env().artifact(a).policy}});
      h_.console(bytes);
      break;
    case ArtifactKind::kPipe:
      write_pipe(a, ref, bytes);
      break;
    case ArtifactKind::kFile:
      write_file(a, ref, bytes, true);
      break;
    default:
      need(false);
  }
}

std::string ProcessOps::read_path(const std::string& path) {
  RefId ref;
  need(open(path, AccessFlags{.read = true}, ref) == ResultCode::kSuccess);
  ArtifactId a = env().ref_artifact(p_.id, ref);
  need(env().artifact(a).kind == ArtifactKind::kFile);
  return read_file(a, ref);
}

void ProcessOps::write_path(const std::string& path, const std::string& bytes, bool append) {
  RefId ref;
  AccessFlags f{.write = true, .create = true, .truncate = !append, .create_mode = 0666};
  need(open(path, f, ref) == ResultCode::kSuccess);
  ArtifactId a = env().ref_artifact(p_.id, ref);
  need(env().artifact(a).kind == ArtifactKind::kFile);
  if (append) read_file(a, ref);
  write_file(a, ref, bytes, append);
}

PipeHandle& ProcessOps::pipe(const std::string& token) {
  auto it = p_.pipes.find(token);
  need(it != p_.pipes.end());
  return it->second;
}

Exec ProcessOps::read_pipe(ArtifactId pa, RefId ref, std::string& text) {
  if (!p_.force_eof && env().pipe_write_held(pa, h_.exited())) {
    p_.blocked_on_pipe = true;
    return Exec::kBlock;
  }
  p_.force_eof = false;
  emit(stmt::MatchContent{ref, env().current_content(pa)});
  text = std::move(t_.pipe_bytes_[pa]);
  t_.pipe_bytes_[pa].clear();
  return Exec::kNext;
}

Exec ProcessOps::op_read(const std::vector<std::string>& a, const std::optional<std::string>& var) {
  need(a.size() == 1);
  std::string text;
  if (a[0].rfind('@', 0) == 0) {
    PipeHandle& ph = pipe(a[0]);
    need(ph.read_open);
    if (read_pipe(env().ref_artifact(p_.id, ph.read), ph.read, text) == Exec::kBlock) {
      return Exec::kBlock;
    }
  } else if (a[0] == "-") {
    RefId ref = fd_ref(0);
    need(env().has_ref(p_.id, ref));
    ArtifactId sa = env().ref_artifact(p_.id, ref);
    switch (env().artifact(sa).kind) {
      case ArtifactKind::kPipe:
        if (read_pipe(sa, ref, text) == Exec::kBlock) return Exec::kBlock;
        break;
      case ArtifactKind::kFile:
        text = read_file(sa, ref);
        break;
      default:
        // The build's own stdin: nothing to read, but the read is recorded.
        emit(stmt::MatchContent{ref, env().current_content(sa)});
    }
  } else {
    text = read_path(a[0]);
  }
  if (var) p_.scope.vars[*var] = words_of(text);
  return Exec::kNext;
}

void ProcessOps::op_stat(const std::vector<std::string>& a, const std::optional<std::string>& var) {
  need(a.size() == 1);
  RefId ref;
  std::string kind = "none";
  if (open(a[0], AccessFlags{}, ref) == ResultCode::kSuccess) {
    ArtifactId art = env().ref_artifact(p_.id, ref);
    emit(stmt::MatchMetadata{ref, env().current_metadata(art)});
    kind = kind_name(env().artifact(art).kind);
  }
  if (var) p_.scope.vars[*var] = {kind};
}

std::vector<std::string> ProcessOps::list_dir(const std::string& dir, bool must_exist) {
  RefId ref;
  ResultCode code = open(dir, AccessFlags{.read = true}, ref);
  if (code != ResultCode::kSuccess) {
    need(!must_exist);
    return {};
  }
  ArtifactId a = env().ref_artifact(p_.id, ref);
  need(env().artifact(a).kind == ArtifactKind::kDir);
  auto names = env().list(a);
  emit(stmt::MatchContent{ref, DirContent{names}});
  return names;
}

void ProcessOps::op_glob(const std::string& pattern, const std::optional<std::string>& var) {
  auto [dir, base] = split_last(pattern);
  const bool rooted = pattern.find('/') != std::string::npos;
  std::vector<std::string> out;
  for (const auto& name : list_dir(dir, false)) {
    if (::fnmatch(base.c_str(), name.c_str(), FNM_PERIOD) != 0) continue;
    out.push_back(rooted ? (dir == "/" ? "/" + name : dir + "/" + name) : name);
  }
  if (var) p_.scope.vars[*var] = out;
}

void ProcessOps::op_mkdir(const std::string& path) {
  // mkdir -p: create each missing component in turn.
  std::string prefix = path.rfind('/', 0) == 0 ? "/" : "";
  std::istringstream parts(path);
  for (std::string part; std::getline(parts, part, '/');) {
    if (part.empty() || part == ".") continue;
    const std::string parent = prefix.empty() ? "." : prefix;
    prefix = prefix.empty() ? part : (prefix == "/" ? "/" + part : prefix + "/" + part);
    RefId ref;
    ResultCode code = open(prefix, AccessFlags{}, ref);
    if (code == ResultCode::kSuccess) {
      need(env().artifact(env().ref_artifact(p_.id, ref)).kind == ArtifactKind::kDir);
      continue;
    }
    need(code == ResultCode::kNoEnt);
    RefId pref;
    need(open(parent, AccessFlags{}, pref) == ResultCode::kSuccess);
    ArtifactId pa = env().ref_artifact(p_.id, pref);
    need(env().artifact(pa).kind == ArtifactKind::kDir);
    commit(pa);
    auto disk = env().disk_path(pa);
    need(disk && ::mkdir((*disk / part).c_str(), 0777) == 0);
    RefId dref = new_ref();
    emit(stmt::DirRef{dref});
    emit(stmt::AddEntry{pref, part, dref});
  }
}

void ProcessOps::op_rm(const std::string& path) {
  RefId ref;
  ResultCode code = open(path, AccessFlags{.nofollow = true}, ref);
  if (code == ResultCode::kNoEnt) return;
  need(code == ResultCode::kSuccess);
  ArtifactId a = env().ref_artifact(p_.id, ref);
  if (env().artifact(a).kind == ArtifactKind::kDir) {
    auto names = env().list(a);
    emit(stmt::MatchContent{ref, DirContent{names}});
    need(names.empty());
  }
  auto [parent, name] = split_last(path);
  need(name != "." && name != ".." && name != "/");
  RefId pref;
  need(open(parent, AccessFlags{}, pref) == ResultCode::kSuccess);
  ArtifactId pa = env().ref_artifact(p_.id, pref);
  commit(pa);
  auto disk = env().disk_path(pa);
  emit(stmt::RemoveEntry{pref, name, ref});
  struct stat st;
  if (disk && ::lstat((*disk / name).c_str(), &st) == 0) {
    std::error_code ec;
    fs::remove(*disk / name, ec);
    need(!ec);
  }
}

void ProcessOps::op_symlink(const std::string& dest, const std::string& link) {
  auto [parent, name] = split_last(link);
  need(name != "." && name != ".." && name != "/");
  RefId pref;
  need(open(parent, AccessFlags{}, pref) == ResultCode::kSuccess);
  ArtifactId pa = env().ref_artifact(p_.id, pref);
  need(env().artifact(pa).kind == ArtifactKind::kDir);
  commit(pa);
  auto disk = env().disk_path(pa);
  need(disk.has_value());
  RefId old;
  ResultCode code = open(link, AccessFlags{.nofollow = true}, old);
  if (code == ResultCode::kSuccess) {
    need(env().artifact(env().ref_artifact(p_.id, old)).kind != ArtifactKind::kDir);
    emit(stmt::RemoveEntry{pref, name, old});
    std::error_code ec;
    fs::remove(*disk / name, ec);
  } else {
    need(code == ResultCode::kNoEnt);
  }
  need(::symlink(dest.c_str(), (*disk / name).c_str()) == 0);
  RefId sref = new_ref();
  emit(stmt::SymlinkRef{dest, sref});
  emit(stmt::AddEntry{pref, name, sref});
}

}  // namespace tbld
