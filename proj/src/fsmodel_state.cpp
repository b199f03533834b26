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

// Checks and updates against the model.

#include <sys/stat.h>
#include <unistd.h>

#include "tbld/fsmodel.hpp"

namespace tbld {

namespace fs = std::filesystem;

namespace {

std::int64_t mtime_ns(const struct stat& st) {
  return static_cast<std::int64_t>(st.st_mtim.tv_sec) * 1000000000 + st.st_mtim.tv_nsec;
}

bool valid_entry_name(const std::string& name) {
  return !name.empty() && name != "." && name != ".." && name.find('/') == std::string::npos;
}

}  // namespace

std::optional<fs::path> Env::disk_path(ArtifactId a) const {
  if (a == root_) return sandbox_;
  const Artifact& art = artifacts_.at(a);
  if (!art.parent) return std::nullopt;
  auto parent = disk_path(*art.parent);
  if (!parent) return std::nullopt;
  return *parent / art.name;
}

std::optional<std::string> Env::sandbox_path(ArtifactId a) const {
  if (a == root_) return std::string(".");
  const Artifact& art = artifacts_.at(a);
  if (!art.parent) return std::nullopt;
  auto parent = sandbox_path(*art.parent);
  if (!parent) return std::nullopt;
  return join_sandbox_path(*parent, art.name);
}

bool Env::linked_at_location(ArtifactId a) const {
  if (a == root_) return true;
  const Artifact& art = artifacts_.at(a);
  if (!art.parent) return false;
  const Artifact& dir = artifacts_.at(*art.parent);
  auto it = dir.entries.find(art.name);
  if (it == dir.entries.end() || !it->second.present || it->second.target != a) return false;
  return linked_at_location(*art.parent);
}

std::optional<Digest> Env::disk_digest(const fs::path& p) {
  struct stat st;
  if (::stat(p.c_str(), &st) != 0 || !S_ISREG(st.st_mode)) return std::nullopt;
  auto key = p.string();
  auto it = fingerprints_.find(key);
  if (it != fingerprints_.end() && it->second.mtime_ns == mtime_ns(st) &&
      it->second.size == static_cast<std::uint64_t>(st.st_size) && it->second.ino == st.st_ino) {
    return it->second.digest;
  }
  auto d = digest_file(p);
  if (!d) return std::nullopt;
  fingerprints_[key] =
      Fingerprint{mtime_ns(st), static_cast<std::uint64_t>(st.st_size), st.st_ino, *d};
  return d;
}

FileContent Env::fingerprint_disk_file(ArtifactId a) {
  FileContent fc;
  auto p = disk_path(a);
  struct stat st;
  if (!p || ::lstat(p->c_str(), &st) != 0) return fc;
  fc.size = static_cast<std::uint64_t>(st.st_size);
  fc.mtime_ns = mtime_ns(st);
  fc.hash = disk_digest(*p).value_or(Digest{});
  fc.cached = fc.size == 0 || (cache_ && cache_->contains(fc.hash));
  return fc;
}

MetadataState Env::current_metadata(ArtifactId a) {
  Artifact& art = artifacts_[a];
  if (art.metadata.empty()) return MetadataState{uid_, gid_, art.kind, 0};
  MetadataVersion& v = art.metadata.back();
  if (!v.state) {
    auto p = disk_path(a);
    struct stat st;
    if (!p || ::lstat(p->c_str(), &st) != 0) return MetadataState{uid_, gid_, art.kind, 0};
    v.state = MetadataState{st.st_uid, st.st_gid, art.kind,
                            static_cast<std::uint16_t>(st.st_mode & 07777)};
  }
  return *v.state;
}

ContentState Env::current_content(ArtifactId a) {
  Artifact& art = artifacts_[a];
  switch (art.kind) {
    case ArtifactKind::kDir:
      return DirContent{list(a)};
    case ArtifactKind::kPipe:
      return PipeContent{PipeOp::kRead, static_cast<std::int64_t>(art.unread_writes.size())};
    case ArtifactKind::kSpecial:
      return SpecialContent{art.policy};
    default:
      break;
  }
  if (art.content.empty()) return FileContent{};
  if (art.content.back().state) return *art.content.back().state;
  ContentState loaded;
  if (art.kind == ArtifactKind::kSymlink) {
    std::error_code ec;
    auto p = disk_path(a);
    loaded = SymlinkContent{p ? fs::read_symlink(*p, ec).string() : std::string()};
  } else {
    loaded = fingerprint_disk_file(a);
  }
  artifacts_[a].content.back().state = loaded;
  return loaded;
}

StateId Env::content_state_id(ArtifactId a) {
  Artifact& art = artifacts_[a];
  if (art.kind == ArtifactKind::kDir) return art.dir_version;
  if (art.content.empty()) {
    art.content.push_back(ContentVersion{new_state(a, std::nullopt, true), std::nullopt, true, {}});
  }
  return artifacts_[a].content.back().id;
}

StateId Env::metadata_state_id(ArtifactId a) {
  Artifact& art = artifacts_[a];
  if (art.metadata.empty()) {
    art.metadata.push_back(
        MetadataVersion{new_state(a, std::nullopt, true), std::nullopt, true, {}});
  }
  return artifacts_[a].metadata.back().id;
}

bool Env::match_metadata(ArtifactId a, const MetadataState& expected) {
  return current_metadata(a) == expected;
}

bool Env::match_content(ArtifactId a, const ContentState& expected) {
  Artifact& art = artifacts_[a];
  switch (art.kind) {
    case ArtifactKind::kDir: {
      const auto* d = std::get_if<DirContent>(&expected);
      return d && list(a) == d->entries;
    }
    case ArtifactKind::kPipe: {
      // Emulated pipe traffic matches only when nothing real was written and
      // the number of pending writes is what the reader saw last time.
      const auto* p = std::get_if<PipeContent>(&expected);
      return p && p->op == PipeOp::kRead && !art.traced_write &&
             static_cast<std::int64_t>(art.unread_writes.size()) == p->writer_epoch;
    }
    case ArtifactKind::kSpecial:
      return art.policy == SpecialPolicy::kNeverChanged;
    case ArtifactKind::kSymlink:
      return current_content(a) == expected;
    case ArtifactKind::kFile:
      break;
  }
  const auto* want = std::get_if<FileContent>(&expected);
  if (!want) return false;
  if (art.content.empty()) return false;
  const ContentVersion& v = art.content.back();
  if (!v.committed || !art.on_disk) {
    return v.state && content_equivalent(*v.state, expected);
  }
  auto p = disk_path(a);
  struct stat st;
  if (!p || ::lstat(p->c_str(), &st) != 0 || !S_ISREG(st.st_mode)) return false;
  if (static_cast<std::uint64_t>(st.st_size) != want->size) return false;
  if (want->mtime_ns != 0 && mtime_ns(st) == want->mtime_ns) return true;
  auto d = disk_digest(*p);
  return d && *d == want->hash;
}

std::vector<StateId> Env::consume_pipe(ArtifactId pipe) {
  std::vector<StateId> out;
  out.swap(artifacts_[pipe].unread_writes);
  return out;
}

std::optional<StateId> Env::apply_content(ArtifactId a, const ContentState& state, CmdRef acting,
                                          bool committed) {
  Artifact& art = artifacts_[a];
  switch (art.kind) {
    case ArtifactKind::kSpecial:
      return content_state_id(a);
    case ArtifactKind::kPipe: {
      StateId id = new_state(a, acting, false);
      auto epoch = static_cast<std::int64_t>(artifacts_[a].unread_writes.size());
      Artifact& pa = artifacts_[a];
      pa.unread_writes.push_back(id);
      pa.content.push_back(
          ContentVersion{id, PipeContent{PipeOp::kWrite, epoch}, committed, acting});
      if (committed) pa.traced_write = true;
      return id;
    }
    case ArtifactKind::kDir:
      return std::nullopt;
    case ArtifactKind::kSymlink:
      if (!std::holds_alternative<SymlinkContent>(state)) return std::nullopt;
      break;
    case ArtifactKind::kFile:
      if (!std::holds_alternative<FileContent>(state)) return std::nullopt;
      break;
  }
  bool cached = true;
  if (const auto* f = std::get_if<FileContent>(&state)) {
    cached = f->size == 0 || (cache_ && cache_->contains(f->hash));
  }
  StateId id = new_state(a, acting, cached);
  artifacts_[a].content.push_back(ContentVersion{id, state, committed, acting});
  return id;
}

std::optional<StateId> Env::apply_metadata(ArtifactId a, const MetadataState& state,
                                           CmdRef acting, bool committed) {
  if (artifacts_[a].kind != state.kind) return std::nullopt;
  StateId id = new_state(a, acting, true);
  artifacts_[a].metadata.push_back(MetadataVersion{id, state, committed, acting});
  return id;
}

bool Env::add_entry(ArtifactId dir, const std::string& name, ArtifactId target, CmdRef acting,
                    bool committed) {
  if (!valid_entry_name(name) || artifacts_[dir].kind != ArtifactKind::kDir) return true;
  if (dir == root_ && hidden_.count(name)) return true;
  auto existing = lookup(dir, name);
  bool changed = existing.has_value() && *existing != target;
  artifacts_[dir].entries[name] = DirEntry{true, target, committed, acting};
  artifacts_[dir].dir_version = new_state(dir, acting, true);
  Artifact& t = artifacts_[target];
  t.parent = dir;
  t.name = name;
  if (committed) t.on_disk = true;
  return changed;
}

bool Env::remove_entry(ArtifactId dir, const std::string& name, ArtifactId target, CmdRef acting,
                       bool committed) {
  if (!valid_entry_name(name) || artifacts_[dir].kind != ArtifactKind::kDir) return true;
  if (dir == root_ && hidden_.count(name)) return true;
  auto existing = lookup(dir, name);
  bool changed = !existing || *existing != target;
  artifacts_[dir].entries[name] = DirEntry{false, std::nullopt, committed, acting};
  artifacts_[dir].dir_version = new_state(dir, acting, true);
  return changed;
}

}  // namespace tbld
