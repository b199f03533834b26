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

// Moving model state onto the real filesystem.

#include <sys/stat.h>
#include <unistd.h>

#include <fstream>

#include <fmt/format.h>

#include "tbld/fsmodel.hpp"

namespace tbld {

namespace fs = std::filesystem;

void Env::sync() {
  artifacts_.clear();
  refs_.clear();
  specials_.clear();
  named_specials_.clear();
  root_ = make_artifact(ArtifactKind::kDir);
  load_from_disk(root_, sandbox_);
}

void Env::remove_from_disk(const fs::path& p) {
  std::error_code ec;
  fs::remove_all(p, ec);
}

void Env::commit(ArtifactId a) {
  const ArtifactKind kind = artifacts_[a].kind;
  if (kind == ArtifactKind::kPipe || kind == ArtifactKind::kSpecial) return;
  if (!linked_at_location(a)) return;  // not reachable by path; nothing to write
  commit_location(a);
  commit_data(a);
}

void Env::commit_location(ArtifactId a) {
  if (a == root_) return;
  ArtifactId parent = *artifacts_[a].parent;
  commit_location(parent);
  commit_data(parent);
  commit_entry(parent, artifacts_[a].name);
}

void Env::commit_entry(ArtifactId dir, const std::string& name) {
  auto it = artifacts_[dir].entries.find(name);
  if (it == artifacts_[dir].entries.end() || it->second.committed) return;
  if (it->second.present && it->second.target) {
    commit_data(*it->second.target);
  } else if (!it->second.present) {
    auto p = disk_path(dir);
    struct stat st;
    if (p && ::lstat((*p / name).c_str(), &st) == 0) {
      remove_from_disk(*p / name);
      ++disk_writes_;
    }
  }
  artifacts_[dir].entries[name].committed = true;
}

void Env::commit_data(ArtifactId a) {
  Artifact& art = artifacts_[a];
  auto p = disk_path(a);
  if (!p) return;
  struct stat st;
  const bool exists = ::lstat(p->c_str(), &st) == 0;

  switch (art.kind) {
    case ArtifactKind::kDir: {
      if (!exists || !S_ISDIR(st.st_mode)) {
        if (exists) remove_from_disk(*p);
        if (::mkdir(p->c_str(), 0777) != 0) {
          throw ModelError(fmt::format("cannot create directory {}", p->string()));
        }
        ++disk_writes_;
      }
      art.on_disk = true;
      break;
    }
    case ArtifactKind::kFile: {
      if (art.content.empty() || art.content.back().committed) break;
      ContentVersion& v = art.content.back();
      const auto& want = std::get<FileContent>(*v.state);
      bool same = false;
      if (exists && S_ISREG(st.st_mode) && static_cast<std::uint64_t>(st.st_size) == want.size) {
        auto d = disk_digest(*p);
        same = d && *d == want.hash;
      }
      if (!same) {
        if (exists && !S_ISREG(st.st_mode)) remove_from_disk(*p);
        if (want.size == 0) {
          std::ofstream out(*p, std::ios::binary | std::ios::trunc);
          if (!out) throw ModelError(fmt::format("cannot write {}", p->string()));
        } else if (cache_ && cache_->contains(want.hash)) {
          cache_->restore(want.hash, *p);
          ++cache_restores_;
        } else {
          throw UncommittableError(
              fmt::format("cannot commit {}: content is not cached", p->string()), v.producer);
        }
        ++disk_writes_;
      }
      artifacts_[a].content.back().committed = true;
      artifacts_[a].on_disk = true;
      break;
    }
    case ArtifactKind::kSymlink: {
      if (art.content.empty() || art.content.back().committed) break;
      const auto& want = std::get<SymlinkContent>(*art.content.back().state);
      std::error_code ec;
      bool same = exists && S_ISLNK(st.st_mode) && fs::read_symlink(*p, ec).string() == want.dest;
      if (!same) {
        if (exists) remove_from_disk(*p);
        fs::create_symlink(want.dest, *p, ec);
        if (ec) throw ModelError(fmt::format("cannot create symlink {}", p->string()));
        ++disk_writes_;
      }
      artifacts_[a].content.back().committed = true;
      artifacts_[a].on_disk = true;
      break;
    }
    default:
      return;
  }

  Artifact& after = artifacts_[a];
  if (!after.metadata.empty() && !after.metadata.back().committed) {
    MetadataVersion& mv = after.metadata.back();
    if (mv.state && after.kind != ArtifactKind::kSymlink && ::lstat(p->c_str(), &st) == 0 &&
        (st.st_mode & 07777) != mv.state->perms) {
      ::chmod(p->c_str(), mv.state->perms);
      ++disk_writes_;
    }
    mv.committed = true;
  }
}

void Env::commit_all() {
  commit_data(root_);
  std::vector<ArtifactId> stack{root_};
  while (!stack.empty()) {
    ArtifactId dir = stack.back();
    stack.pop_back();
    std::vector<std::string> names;
    for (const auto& [name, e] : artifacts_[dir].entries) names.push_back(name);
    for (const auto& name : names) {
      commit_entry(dir, name);
      const DirEntry& e = artifacts_[dir].entries[name];
      if (!e.present || !e.target) continue;
      ArtifactId t = *e.target;
      if (artifacts_[t].parent != dir || artifacts_[t].name != name) continue;
      commit_data(t);
      if (artifacts_[t].kind == ArtifactKind::kDir) stack.push_back(t);
    }
  }
}

bool Env::committable(ArtifactId a) const {
  const Artifact& art = artifacts_.at(a);
  if (art.kind != ArtifactKind::kFile || art.content.empty()) return true;
  const ContentVersion& v = art.content.back();
  if (v.committed || !v.state) return true;
  const auto& f = std::get<FileContent>(*v.state);
  return f.size == 0 || (cache_ && cache_->contains(f.hash));
}

bool Env::is_committed(ArtifactId a) const {
  const Artifact& art = artifacts_.at(a);
  for (const auto& v : art.content) {
    if (!v.committed) return false;
  }
  for (const auto& v : art.metadata) {
    if (!v.committed) return false;
  }
  for (const auto& [name, e] : art.entries) {
    if (!e.committed) return false;
  }
  return true;
}

bool Env::has_uncommitted() const {
  for (const auto& art : artifacts_) {
    if (art.kind == ArtifactKind::kPipe || !linked_at_location(art.id)) continue;
    if (!is_committed(art.id)) return true;
  }
  return false;
}

bool Env::content_produced(ArtifactId a) const {
  const Artifact& art = artifacts_.at(a);
  if (art.kind == ArtifactKind::kDir) return !produced_entries(a).empty();
  return !art.content.empty() && art.content.back().producer.has_value();
}

bool Env::metadata_produced(ArtifactId a) const {
  const Artifact& art = artifacts_.at(a);
  return !art.metadata.empty() && art.metadata.back().producer.has_value();
}

std::set<std::string> Env::produced_entries(ArtifactId dir) const {
  std::set<std::string> out;
  for (const auto& [name, e] : artifacts_.at(dir).entries) {
    if (e.producer) out.insert(name);
  }
  return out;
}

bool Env::pipe_write_held(ArtifactId pipe, const std::set<std::uint32_t>& exited) const {
  for (const auto& [cmd, table] : refs_) {
    if (exited.count(cmd)) continue;
    for (const auto& e : table) {
      if (!e.closed && e.end == PipeEnd::kWrite && e.artifact == pipe) return true;
    }
  }
  return false;
}

std::set<StateId> Env::persistent_states() {
  std::set<StateId> out;
  out.insert(content_state_id(root_));
  out.insert(metadata_state_id(root_));
  std::vector<ArtifactId> stack{root_};
  while (!stack.empty()) {
    ArtifactId dir = stack.back();
    stack.pop_back();
    std::vector<ArtifactId> children;
    for (const auto& [name, e] : artifacts_[dir].entries) {
      if (e.present && e.target) children.push_back(*e.target);
    }
    for (ArtifactId t : children) {
      out.insert(content_state_id(t));
      out.insert(metadata_state_id(t));
      if (artifacts_[t].kind == ArtifactKind::kDir) stack.push_back(t);
    }
  }
  return out;
}

}  // namespace tbld
