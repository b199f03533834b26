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

// In-memory model of the sandboxed filesystem.
//
// Every artifact keeps an ordered list of metadata and content versions. A
// version is committed when the real filesystem reflects it, uncommitted
// when it exists only in the model (the output of an emulated command).
// State not yet touched by the build is loaded lazily from disk. Checks
// always prefer the newest version, so uncommitted state takes precedence
// over whatever the disk holds.

#pragma once

#include <sys/types.h>

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tbld/cache.hpp"
#include "tbld/traceir.hpp"

namespace tbld {

using ArtifactId = std::uint32_t;

/// Identity of one artifact version; unique for the lifetime of an Env.
struct StateId {
  std::uint64_t id = 0;
  auto operator<=>(const StateId&) const = default;
};

/// Raised when the trace and the model disagree in a way user edits cannot
/// explain (use of a closed ref, unresolved ref, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a version must reach the disk but its bytes are not
/// restorable. producer names the command that has to run instead.
class UncommittableError : public ModelError {
 public:
  UncommittableError(const std::string& what, std::optional<CmdRef> producer)
      : ModelError(what), producer_(producer) {}
  std::optional<CmdRef> producer() const { return producer_; }

 private:
  std::optional<CmdRef> producer_;
};

struct ContentVersion {
  StateId id;
  std::optional<ContentState> state;  // nullopt: whatever the disk holds
  bool committed = false;
  std::optional<CmdRef> producer;
};

struct MetadataVersion {
  StateId id;
  std::optional<MetadataState> state;  // nullopt: whatever the disk holds
  bool committed = false;
  std::optional<CmdRef> producer;
};

struct DirEntry {
  bool present = false;
  std::optional<ArtifactId> target;  // nullopt while present means "on disk, not loaded"
  bool committed = true;
  std::optional<CmdRef> producer;
};

struct Artifact {
  ArtifactId id = 0;
  ArtifactKind kind = ArtifactKind::kFile;
  std::vector<MetadataVersion> metadata;
  std::vector<ContentVersion> content;

  // Location of the artifact in the tree (none for anonymous artifacts).
  std::optional<ArtifactId> parent;
  std::string name;
  bool on_disk = false;  // its committed base exists at its location

  // Directories.
  std::map<std::string, DirEntry> entries;
  bool listing_loaded = false;
  StateId dir_version;  // changes with every entry mutation

  // Pipes.
  std::vector<StateId> unread_writes;
  std::set<CmdRef> readers;
  std::set<CmdRef> writers;
  bool traced_write = false;

  // Special files.
  SpecialPolicy policy = SpecialPolicy::kNeverChanged;
  std::string special_name;
};

enum class PipeEnd : std::uint8_t { kNone, kRead, kWrite };

struct RefEntry {
  std::optional<ArtifactId> artifact;
  ResultCode result = ResultCode::kSuccess;
  bool closed = false;
  PipeEnd end = PipeEnd::kNone;
  bool produced = false;  // resolution consulted state written during this pass
};

struct StateInfo {
  ArtifactId artifact = 0;
  ArtifactKind kind = ArtifactKind::kFile;
  std::optional<CmdRef> producer;
  bool cached = true;
};

struct Resolution {
  ResultCode code = ResultCode::kSuccess;
  std::optional<ArtifactId> artifact;
  std::vector<ArtifactId> traversed;  // directories and symlinks walked through
  bool produced = false;               // consulted state written during this pass
};

class Env {
 public:
  Env(std::filesystem::path sandbox_root, const ContentCache* cache,
      std::set<std::string> hidden_root_names = {});

  ArtifactId root_dir() const { return root_; }
  const std::filesystem::path& sandbox_root() const { return sandbox_; }

  const Artifact& artifact(ArtifactId id) const { return artifacts_.at(id); }
  std::size_t artifact_count() const { return artifacts_.size(); }

  // --- references -------------------------------------------------------

  /// Binds ref of acting to an entry; refs are dense per command.
  void bind_ref(CmdRef acting, RefId ref, RefEntry entry);
  /// Returns the entry or throws ModelError (unknown or closed ref).
  const RefEntry& ref(CmdRef acting, RefId ref) const;
  bool has_ref(CmdRef acting, RefId ref) const;
  void close_ref(CmdRef acting, RefId ref);
  /// Resolved artifact behind a successfully resolved, open ref.
  ArtifactId ref_artifact(CmdRef acting, RefId ref) const;

  // --- resolution ---------------------------------------------------------

  /// Walks path from base applying open(2)-style flags. Failures are data.
  /// committed says whether any artifact created by the walk is already on
  /// disk (a traced command) or exists only in the model.
  Resolution resolve(ArtifactId base, std::string_view path, const AccessFlags& flags,
                     CmdRef acting, bool committed);

  /// resolve() from a ref of acting; binds out to the result.
  ResultCode resolve_path(CmdRef acting, RefId base, std::string_view path,
                          const AccessFlags& flags, RefId out, bool committed);

  /// Side-effect free lookup used for template checks.
  std::optional<ArtifactId> peek(ArtifactId base, std::string_view path);

  // --- anonymous artifacts -------------------------------------------------

  ArtifactId new_file(CmdRef acting, bool committed);
  ArtifactId new_dir(CmdRef acting, bool committed);
  ArtifactId new_symlink(std::string dest, CmdRef acting, bool committed);
  ArtifactId new_pipe();
  ArtifactId special(SpecialWhich which, const std::string& name = {});

  // --- checks ---------------------------------------------------------------

  bool match_content(ArtifactId a, const ContentState& expected);
  bool match_metadata(ArtifactId a, const MetadataState& expected);

  ContentState current_content(ArtifactId a);
  MetadataState current_metadata(ArtifactId a);
  /// Newest version ids (used for dependence edges).
  StateId content_state_id(ArtifactId a);
  StateId metadata_state_id(ArtifactId a);
  const StateInfo& state_info(StateId id) const { return states_.at(id.id); }

  /// Takes all pipe writes not yet read, returning their state ids.
  std::vector<StateId> consume_pipe(ArtifactId pipe);

  // --- updates ---------------------------------------------------------------

  /// Appends a content version. Returns nullopt if the update cannot apply
  /// (kind mismatch); special files ignore updates and return their
  /// current id.
  std::optional<StateId> apply_content(ArtifactId a, const ContentState& state, CmdRef acting,
                                       bool committed);
  std::optional<StateId> apply_metadata(ArtifactId a, const MetadataState& state, CmdRef acting,
                                        bool committed);

  /// Returns true if the outcome differs from a plain successful add/remove
  /// (the name already existed / was already absent) or the name is invalid.
  bool add_entry(ArtifactId dir, const std::string& name, ArtifactId target, CmdRef acting,
                 bool committed);
  bool remove_entry(ArtifactId dir, const std::string& name, ArtifactId target, CmdRef acting,
                    bool committed);

  /// Present entry names of a directory (sorted).
  std::vector<std::string> list(ArtifactId dir);
  std::optional<ArtifactId> lookup(ArtifactId dir, const std::string& name);

  // --- sync and commit ----------------------------------------------------------

  /// Drops every uncommitted version. The model is re-derived from disk
  /// lazily on next access.
  void sync();

  /// Makes the disk reflect a's newest state and its location.
  void commit(ArtifactId a);
  /// Commits everything reachable from the root, parents before children.
  void commit_all();

  /// True if a's newest content could be written to disk right now.
  bool committable(ArtifactId a) const;

  bool has_uncommitted() const;
  std::size_t disk_writes() const { return disk_writes_; }
  std::size_t cache_restores() const { return cache_restores_; }

  /// Real path of an artifact linked into the tree.
  std::optional<std::filesystem::path> disk_path(ArtifactId a) const;
  std::optional<std::string> sandbox_path(ArtifactId a) const;

  /// Ids of artifacts whose newest content is visible by path from the root.
  std::set<StateId> persistent_states();

  /// Reads the on-disk state of a file artifact (after a traced write).
  FileContent fingerprint_disk_file(ArtifactId a);

  mode_t umask() const { return umask_; }

  bool is_committed(ArtifactId a) const;

  /// Whether the newest state was written during the current pass (as
  /// opposed to loaded from disk).
  bool content_produced(ArtifactId a) const;
  bool metadata_produced(ArtifactId a) const;
  std::set<std::string> produced_entries(ArtifactId dir) const;

  /// Whether some command other than those in exited still holds an open
  /// write end of pipe.
  bool pipe_write_held(ArtifactId pipe, const std::set<std::uint32_t>& exited) const;

 private:
  ArtifactId make_artifact(ArtifactKind kind);
  StateId new_state(ArtifactId a, std::optional<CmdRef> producer, bool cached);
  void load_from_disk(ArtifactId a, const std::filesystem::path& p);
  void load_listing(ArtifactId dir);
  bool permitted(const MetadataState& meta, bool read, bool write, bool exec) const;
  void commit_location(ArtifactId a);
  void commit_entry(ArtifactId dir, const std::string& name);
  void commit_data(ArtifactId a);
  bool linked_at_location(ArtifactId a) const;
  void remove_from_disk(const std::filesystem::path& p);
  std::optional<Digest> disk_digest(const std::filesystem::path& p);

  std::filesystem::path sandbox_;
  const ContentCache* cache_;
  std::set<std::string> hidden_;
  std::deque<Artifact> artifacts_;  // stable references across growth
  std::vector<StateInfo> states_;
  std::map<std::uint32_t, std::vector<RefEntry>> refs_;
  ArtifactId root_ = 0;
  std::map<SpecialWhich, ArtifactId> specials_;
  std::map<std::string, ArtifactId> named_specials_;
  std::size_t disk_writes_ = 0;
  std::size_t cache_restores_ = 0;
  std::uint32_t uid_ = 0;
  std::uint32_t gid_ = 0;
  mode_t umask_ = 022;

  struct Fingerprint {
    std::int64_t mtime_ns;
    std::uint64_t size;
    ino_t ino;
    Digest digest;
  };
  std::unordered_map<std::string, Fingerprint> fingerprints_;
};

/// Lexically normalized sandbox path joining (no symlink resolution).
std::string join_sandbox_path(const std::string& dir, const std::string& name);

}  // namespace tbld
