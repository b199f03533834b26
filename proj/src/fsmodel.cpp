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

#include "tbld/fsmodel.hpp"

#include <sys/stat.h>
#include <unistd.h>

#include <deque>

#include <fmt/format.h>

namespace tbld {

namespace fs = std::filesystem;

namespace {

constexpr int kMaxSymlinkHops = 40;

FileContent empty_file() { return FileContent{empty_digest(), 0, 0, true}; }

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) out.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

ArtifactKind kind_of_mode(mode_t m) {
  if (S_ISREG(m)) return ArtifactKind::kFile;
  if (S_ISDIR(m)) return ArtifactKind::kDir;
  if (S_ISLNK(m)) return ArtifactKind::kSymlink;
  if (S_ISFIFO(m)) return ArtifactKind::kPipe;
  return ArtifactKind::kSpecial;
}

}  // namespace

std::string join_sandbox_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir + "/" + name;
}

Env::Env(fs::path sandbox_root, const ContentCache* cache, std::set<std::string> hidden_root_names)
    : sandbox_(fs::weakly_canonical(sandbox_root)),
      cache_(cache),
      hidden_(std::move(hidden_root_names)),
      uid_(::geteuid()),
      gid_(::getegid()) {
  umask_ = ::umask(022);
  ::umask(umask_);
  states_.push_back(StateInfo{});  // id 0 is never handed out
  root_ = make_artifact(ArtifactKind::kDir);
  load_from_disk(root_, sandbox_);
}

ArtifactId Env::make_artifact(ArtifactKind kind) {
  auto id = static_cast<ArtifactId>(artifacts_.size());
  Artifact& a = artifacts_.emplace_back();
  a.id = id;
  a.kind = kind;
  a.dir_version = new_state(id, std::nullopt, true);
  if (kind == ArtifactKind::kPipe) a.policy = SpecialPolicy::kAlwaysChanged;
  return id;
}

StateId Env::new_state(ArtifactId a, std::optional<CmdRef> producer, bool cached) {
  ArtifactKind kind = a < artifacts_.size() ? artifacts_[a].kind : ArtifactKind::kDir;
  states_.push_back(StateInfo{a, kind, producer, cached});
  return StateId{states_.size() - 1};
}

void Env::load_from_disk(ArtifactId id, const fs::path&) {
  Artifact& a = artifacts_[id];
  a.on_disk = true;
  a.metadata.push_back(MetadataVersion{new_state(id, std::nullopt, true), std::nullopt, true, {}});
  a.content.push_back(ContentVersion{new_state(id, std::nullopt, true), std::nullopt, true, {}});
}

void Env::load_listing(ArtifactId dir) {
  Artifact& d = artifacts_[dir];
  if (d.listing_loaded) return;
  d.listing_loaded = true;
  if (!d.on_disk) return;
  auto p = disk_path(dir);
  if (!p) return;
  std::error_code ec;
  for (fs::directory_iterator it(*p, ec), end; !ec && it != end; it.increment(ec)) {
    std::string name = it->path().filename().string();
    if (dir == root_ && hidden_.count(name)) continue;
    if (artifacts_[dir].entries.count(name)) continue;
    artifacts_[dir].entries.emplace(name, DirEntry{true, std::nullopt, true, {}});
  }
}

std::optional<ArtifactId> Env::lookup(ArtifactId dir, const std::string& name) {
  if (artifacts_[dir].kind != ArtifactKind::kDir) return std::nullopt;
  if (dir == root_ && hidden_.count(name)) return std::nullopt;
  auto it = artifacts_[dir].entries.find(name);
  if (it == artifacts_[dir].entries.end()) {
    DirEntry e;
    if (artifacts_[dir].on_disk && !artifacts_[dir].listing_loaded) {
      if (auto p = disk_path(dir)) {
        struct stat st;
        e.present = ::lstat((*p / name).c_str(), &st) == 0;
      }
    }
    it = artifacts_[dir].entries.emplace(name, e).first;
  }
  if (!it->second.present) return std::nullopt;
  if (!it->second.target) {
    // Present on disk but not yet modelled.
    auto p = disk_path(dir);
    struct stat st;
    if (!p || ::lstat((*p / name).c_str(), &st) != 0) {
      it->second.present = false;
      return std::nullopt;
    }
    ArtifactId child = make_artifact(kind_of_mode(st.st_mode));
    artifacts_[child].parent = dir;
    artifacts_[child].name = name;
    load_from_disk(child, *p / name);
    artifacts_[dir].entries[name].target = child;
    return child;
  }
  return it->second.target;
}

std::vector<std::string> Env::list(ArtifactId dir) {
  load_listing(dir);
  std::vector<std::string> names;
  for (const auto& [name, e] : artifacts_[dir].entries) {
    if (e.present && !(dir == root_ && hidden_.count(name))) names.push_back(name);
  }
  return names;
}

// --- references --------------------------------------------------------------

void Env::bind_ref(CmdRef acting, RefId ref, RefEntry entry) {
  auto& table = refs_[acting.id];
  if (table.size() <= ref.id) {
    RefEntry placeholder;
    placeholder.closed = true;
    table.resize(ref.id + 1, placeholder);
  }
  table[ref.id] = entry;
  if (entry.artifact && artifacts_[*entry.artifact].kind == ArtifactKind::kPipe) {
    if (entry.end == PipeEnd::kRead) artifacts_[*entry.artifact].readers.insert(acting);
    if (entry.end == PipeEnd::kWrite) artifacts_[*entry.artifact].writers.insert(acting);
  }
}

bool Env::has_ref(CmdRef acting, RefId ref) const {
  auto it = refs_.find(acting.id);
  return it != refs_.end() && ref.id < it->second.size() && !it->second[ref.id].closed;
}

const RefEntry& Env::ref(CmdRef acting, RefId ref) const {
  if (!has_ref(acting, ref)) {
    throw ModelError(fmt::format("command {} uses unknown or closed ref r{}", acting.id, ref.id));
  }
  return refs_.at(acting.id)[ref.id];
}

void Env::close_ref(CmdRef acting, RefId ref) {
  if (!has_ref(acting, ref)) {
    throw ModelError(fmt::format("command {} closes unknown ref r{}", acting.id, ref.id));
  }
  refs_[acting.id][ref.id].closed = true;
}

ArtifactId Env::ref_artifact(CmdRef acting, RefId r) const {
  const RefEntry& e = ref(acting, r);
  if (!e.artifact) {
    throw ModelError(fmt::format("command {} uses unresolved ref r{}", acting.id, r.id));
  }
  return *e.artifact;
}

// --- resolution ----------------------------------------------------------------

bool Env::permitted(const MetadataState& meta, bool read, bool write, bool exec) const {
  if (uid_ == 0) {
    if (exec && meta.kind != ArtifactKind::kDir) return (meta.perms & 0111) != 0;
    return true;
  }
  unsigned bits = meta.perms;
  if (meta.uid == uid_) {
    bits >>= 6;
  } else if (meta.gid == gid_) {
    bits >>= 3;
  }
  bits &= 7;
  return (!read || (bits & 4)) && (!write || (bits & 2)) && (!exec || (bits & 1));
}

Resolution Env::resolve(ArtifactId base, std::string_view path, const AccessFlags& flags,
                        CmdRef acting, bool committed) {
  Resolution res;
  auto fail = [&](ResultCode c) {
    res.code = c;
    res.artifact.reset();
    return res;
  };
  if (path.empty()) return fail(ResultCode::kNoEnt);

  ArtifactId cur = path.front() == '/' ? root_ : base;
  std::deque<std::string> rest;
  for (auto& c : split_path(path)) rest.push_back(std::move(c));
  bool trailing_slash = path.back() == '/';
  int hops = 0;

  // Final checks on the artifact a path names.
  auto finish = [&](ArtifactId target) -> Resolution {
    const ArtifactKind kind = artifacts_[target].kind;
    if (flags.create && flags.exclusive) return fail(ResultCode::kExist);
    if (trailing_slash && kind != ArtifactKind::kDir) return fail(ResultCode::kNotDir);
    if (kind == ArtifactKind::kDir && (flags.write || flags.create)) {
      return fail(ResultCode::kIsDir);
    }
    if (!permitted(current_metadata(target), flags.read, flags.write, flags.execute)) {
      return fail(ResultCode::kAccess);
    }
    if (flags.truncate && flags.write && kind == ArtifactKind::kFile) {
      apply_content(target, empty_file(), acting, committed);
    }
    res.code = ResultCode::kSuccess;
    res.artifact = target;
    return res;
  };

  if (artifacts_[cur].kind != ArtifactKind::kDir) return fail(ResultCode::kNotDir);

  while (!rest.empty()) {
    std::string name = std::move(rest.front());
    rest.pop_front();
    const bool last = rest.empty();

    if (artifacts_[cur].kind != ArtifactKind::kDir) return fail(ResultCode::kNotDir);
    if (name == ".") {
      if (last) return finish(cur);
      continue;
    }
    if (!permitted(current_metadata(cur), false, false, true)) return fail(ResultCode::kAccess);
    if (name == "..") {
      // The sandbox root is its own parent.
      if (cur != root_ && artifacts_[cur].parent) cur = *artifacts_[cur].parent;
      if (last) return finish(cur);
      continue;
    }
    res.traversed.push_back(cur);
    // open(2) refuses O_CREAT on a name with a trailing slash before looking.
    if (last && flags.create && trailing_slash) return fail(ResultCode::kIsDir);

    std::optional<ArtifactId> target = lookup(cur, name);
    if (auto e = artifacts_[cur].entries.find(name);
        e != artifacts_[cur].entries.end() && e->second.producer) {
      res.produced = true;
    }
    if (!target) {
      if (!last || !flags.create) return fail(ResultCode::kNoEnt);
      if (trailing_slash) return fail(ResultCode::kIsDir);
      if (cur == root_ && hidden_.count(name)) return fail(ResultCode::kAccess);
      if (!permitted(current_metadata(cur), false, true, true)) return fail(ResultCode::kAccess);
      ArtifactId f = make_artifact(ArtifactKind::kFile);
      Artifact& fa = artifacts_[f];
      fa.parent = cur;
      fa.name = name;
      fa.on_disk = committed;
      fa.metadata.push_back(MetadataVersion{
          new_state(f, acting, true),
          MetadataState{uid_, gid_, ArtifactKind::kFile,
                        static_cast<std::uint16_t>(flags.create_mode & 07777 & ~umask_)},
          committed, acting});
      fa.content.push_back(
          ContentVersion{new_state(f, acting, true), empty_file(), committed, acting});
      artifacts_[cur].entries[name] = DirEntry{true, f, committed, acting};
      artifacts_[cur].dir_version = new_state(cur, acting, true);
      res.produced = true;
      res.code = ResultCode::kSuccess;
      res.artifact = f;
      return res;
    }

    if (artifacts_[*target].kind == ArtifactKind::kSymlink &&
        (!last || !flags.nofollow || trailing_slash)) {
      if (last && flags.create && flags.exclusive) return fail(ResultCode::kExist);
      if (++hops > kMaxSymlinkHops) return fail(ResultCode::kAccess);
      res.traversed.push_back(*target);
      if (content_produced(*target)) res.produced = true;
      ContentState c = current_content(*target);
      const auto* link = std::get_if<SymlinkContent>(&c);
      if (!link || link->dest.empty()) return fail(ResultCode::kNoEnt);
      auto parts = split_path(link->dest);
      if (last && link->dest.back() == '/') trailing_slash = true;
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) rest.push_front(*it);
      if (link->dest.front() == '/') cur = root_;
      if (rest.empty()) return finish(cur);  // link to "/"
      continue;
    }

    if (last) return finish(*target);
    cur = *target;
  }
  // Only separators: the path names the starting directory.
  return finish(cur);
}

ResultCode Env::resolve_path(CmdRef acting, RefId base, std::string_view path,
                             const AccessFlags& flags, RefId out, bool committed) {
  ArtifactId b = ref_artifact(acting, base);
  Resolution r = resolve(b, path, flags, acting, committed);
  bind_ref(acting, out, RefEntry{r.artifact, r.code, false, PipeEnd::kNone, r.produced});
  return r.code;
}

std::optional<ArtifactId> Env::peek(ArtifactId base, std::string_view path) {
  Resolution r = resolve(base, path, AccessFlags{}, kToolCmd, true);
  if (r.code != ResultCode::kSuccess) return std::nullopt;
  return r.artifact;
}

// --- anonymous artifacts -----------------------------------------------------------

ArtifactId Env::new_file(CmdRef acting, bool committed) {
  ArtifactId f = make_artifact(ArtifactKind::kFile);
  artifacts_[f].metadata.push_back(MetadataVersion{
      new_state(f, acting, true), MetadataState{uid_, gid_, ArtifactKind::kFile,
                                               static_cast<std::uint16_t>(0666 & ~umask_)}, committed,
      acting});
  artifacts_[f].content.push_back(
      ContentVersion{new_state(f, acting, true), empty_file(), committed, acting});
  return f;
}

ArtifactId Env::new_dir(CmdRef acting, bool committed) {
  ArtifactId d = make_artifact(ArtifactKind::kDir);
  artifacts_[d].metadata.push_back(MetadataVersion{
      new_state(d, acting, true), MetadataState{uid_, gid_, ArtifactKind::kDir,
                                              static_cast<std::uint16_t>(0777 & ~umask_)}, committed,
      acting});
  artifacts_[d].listing_loaded = true;
  return d;
}

ArtifactId Env::new_symlink(std::string dest, CmdRef acting, bool committed) {
  ArtifactId s = make_artifact(ArtifactKind::kSymlink);
  artifacts_[s].metadata.push_back(MetadataVersion{
      new_state(s, acting, true), MetadataState{uid_, gid_, ArtifactKind::kSymlink, 0777},
      committed, acting});
  artifacts_[s].content.push_back(ContentVersion{
      new_state(s, acting, true), SymlinkContent{std::move(dest)}, committed, acting});
  return s;
}

ArtifactId Env::new_pipe() {
  ArtifactId p = make_artifact(ArtifactKind::kPipe);
  artifacts_[p].metadata.push_back(MetadataVersion{
      new_state(p, std::nullopt, true), MetadataState{uid_, gid_, ArtifactKind::kPipe, 0600},
      true, {}});
  artifacts_[p].content.push_back(ContentVersion{new_state(p, std::nullopt, false),
                                                 PipeContent{PipeOp::kWrite, 0}, true, {}});
  return p;
}

ArtifactId Env::special(SpecialWhich which, const std::string& name) {
  if (which == SpecialWhich::kRoot) return root_;
  if (which == SpecialWhich::kNamed) {
    auto it = named_specials_.find(name);
    if (it != named_specials_.end()) return it->second;
  } else {
    auto it = specials_.find(which);
    if (it != specials_.end()) return it->second;
  }
  ArtifactId s = make_artifact(ArtifactKind::kSpecial);
  Artifact& a = artifacts_[s];
  a.policy = which == SpecialWhich::kStdin ? SpecialPolicy::kAlwaysChanged
                                           : SpecialPolicy::kNeverChanged;
  a.special_name = name;
  a.metadata.push_back(MetadataVersion{new_state(s, std::nullopt, true),
                                       MetadataState{uid_, gid_, ArtifactKind::kSpecial, 0666},
                                       true, {}});
  a.content.push_back(
      ContentVersion{new_state(s, std::nullopt, true), SpecialContent{a.policy}, true, {}});
  if (which == SpecialWhich::kNamed) {
    named_specials_[name] = s;
  } else {
    specials_[which] = s;
  }
  return s;
}

}  // namespace tbld
