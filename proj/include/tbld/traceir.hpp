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

// The trace statement language: every record of a build transcript is an
// artifact access, a state check, or a state update, owned by one command.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tbld/digest.hpp"

namespace tbld {

/// Dense command identity within one trace. Id 0 is the build tool itself.
struct CmdRef {
  std::uint32_t id = 0;
  auto operator<=>(const CmdRef&) const = default;
};

inline constexpr CmdRef kToolCmd{0};

/// Command-local reference to an artifact; the trace analogue of a file
/// descriptor.
struct RefId {
  std::uint32_t id = 0;
  auto operator<=>(const RefId&) const = default;
};

struct AccessFlags {
  bool read = false;
  bool write = false;
  bool execute = false;
  bool create = false;
  bool exclusive = false;
  bool truncate = false;
  bool nofollow = false;
  std::uint16_t create_mode = 0644;  // rwxrwxrwx bits, used only with create

  bool operator==(const AccessFlags&) const = default;
};

/// Outcome of resolving a reference. Values are the Linux errno numbers.
enum class ResultCode : std::int32_t {
  kSuccess = 0,
  kNoEnt = 2,
  kAccess = 13,
  kExist = 17,
  kNotDir = 20,
  kIsDir = 21,
};

const char* result_name(ResultCode code);

enum class ArtifactKind : std::uint8_t { kFile, kDir, kSymlink, kPipe, kSpecial };

const char* kind_name(ArtifactKind kind);

struct MetadataState {
  std::uint32_t uid = 0;
  std::uint32_t gid = 0;
  ArtifactKind kind = ArtifactKind::kFile;
  std::uint16_t perms = 0;

  bool operator==(const MetadataState&) const = default;
};

struct FileContent {
  Digest hash;
  std::uint64_t size = 0;
  std::int64_t mtime_ns = 0;
  bool cached = false;

  bool operator==(const FileContent&) const = default;
};

struct DirContent {
  std::vector<std::string> entries;  // sorted, unique

  bool operator==(const DirContent&) const = default;
};

struct SymlinkContent {
  std::string dest;
  bool operator==(const SymlinkContent&) const = default;
};

enum class PipeOp : std::uint8_t { kRead, kWrite };

struct PipeContent {
  PipeOp op = PipeOp::kWrite;
  std::int64_t writer_epoch = 0;

  bool operator==(const PipeContent&) const = default;
};

enum class SpecialPolicy : std::uint8_t { kAlwaysChanged, kNeverChanged };

struct SpecialContent {
  SpecialPolicy policy = SpecialPolicy::kNeverChanged;
  bool operator==(const SpecialContent&) const = default;
};

using ContentState =
    std::variant<FileContent, DirContent, SymlinkContent, PipeContent, SpecialContent>;

/// Content equivalence used by checks: for files the digest decides, mtime
/// and the cached flag are bookkeeping only.
bool content_equivalent(const ContentState& a, const ContentState& b);

struct Command {
  std::string exe;
  std::vector<std::string> argv;
  std::map<std::string, std::string> env;
  RefId cwd;
  RefId root;
  std::map<std::int32_t, RefId> initial_fds;

  bool operator==(const Command&) const = default;

  /// Identity used by weak equivalence: exe, argv, env, cwd and root.
  bool same_invocation(const Command& other) const;
  std::string command_line() const;
};

enum class SpecialWhich : std::uint8_t { kStdin, kStdout, kStderr, kRoot, kNamed };

enum class RefComparison : std::uint8_t { kSameInstance, kDifferentInstance };

namespace stmt {

struct PathRef {
  RefId base;
  std::string path;
  AccessFlags flags;
  RefId out;
  bool operator==(const PathRef&) const = default;
};
struct FileRef {
  RefId out;
  bool operator==(const FileRef&) const = default;
};
struct DirRef {
  RefId out;
  bool operator==(const DirRef&) const = default;
};
struct PipeRef {
  RefId read_out;
  RefId write_out;
  bool operator==(const PipeRef&) const = default;
};
struct SymlinkRef {
  std::string dest;
  RefId out;
  bool operator==(const SymlinkRef&) const = default;
};
struct SpecialRef {
  SpecialWhich which = SpecialWhich::kStdin;
  std::string name;  // only for kNamed
  RefId out;
  bool operator==(const SpecialRef&) const = default;
};
struct CompareRefs {
  RefId a;
  RefId b;
  RefComparison type = RefComparison::kSameInstance;
  bool operator==(const CompareRefs&) const = default;
};
struct ExpectResult {
  RefId ref;
  ResultCode expected = ResultCode::kSuccess;
  bool operator==(const ExpectResult&) const = default;
};
struct MatchMetadata {
  RefId ref;
  MetadataState state;
  bool operator==(const MatchMetadata&) const = default;
};
struct MatchContent {
  RefId ref;
  ContentState state;
  bool operator==(const MatchContent&) const = default;
};
struct ExitResult {
  CmdRef child;
  std::int32_t expected = 0;
  bool operator==(const ExitResult&) const = default;
};
struct UpdateMetadata {
  RefId ref;
  MetadataState state;
  bool operator==(const UpdateMetadata&) const = default;
};
struct UpdateContent {
  RefId ref;
  ContentState state;
  bool operator==(const UpdateContent&) const = default;
};
struct AddEntry {
  RefId dir;
  std::string name;
  RefId target;
  bool operator==(const AddEntry&) const = default;
};
struct RemoveEntry {
  RefId dir;
  std::string name;
  RefId target;
  bool operator==(const RemoveEntry&) const = default;
};
struct Launch {
  CmdRef child;
  Command command;
  bool operator==(const Launch&) const = default;
};
struct Join {
  CmdRef child;
  bool operator==(const Join&) const = default;
};
struct UsingRef {
  RefId ref;
  bool operator==(const UsingRef&) const = default;
};
struct DoneWithRef {
  RefId ref;
  bool operator==(const DoneWithRef&) const = default;
};
struct Exit {
  std::int32_t code = 0;
  bool operator==(const Exit&) const = default;
};

}  // namespace stmt

using StatementBody =
    std::variant<stmt::PathRef, stmt::FileRef, stmt::DirRef, stmt::PipeRef, stmt::SymlinkRef,
                 stmt::SpecialRef, stmt::CompareRefs, stmt::ExpectResult, stmt::MatchMetadata,
                 stmt::MatchContent, stmt::ExitResult, stmt::UpdateMetadata, stmt::UpdateContent,
                 stmt::AddEntry, stmt::RemoveEntry, stmt::Launch, stmt::Join, stmt::UsingRef,
                 stmt::DoneWithRef, stmt::Exit>;

enum class Phase : std::uint8_t { kPreBuild, kPostBuild };

struct Statement {
  CmdRef owner;
  Phase phase = Phase::kPreBuild;
  StatementBody body;

  bool operator==(const Statement&) const = default;

  /// Checks compare recorded state against the model and can observe changes.
  bool is_check() const;
};

template <typename T>
Statement make_stmt(CmdRef owner, T body, Phase phase = Phase::kPreBuild) {
  return Statement{owner, phase, StatementBody{std::move(body)}};
}

/// Codec failures. kind() tells corrupt input from an unsupported format.
class CodecError : public std::runtime_error {
 public:
  enum class Kind { kCorrupt, kUnsupportedVersion, kUnencodable };
  CodecError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr char kTraceMagic[4] = {'T', 'B', 'L', 'D'};
inline constexpr std::uint32_t kTraceFormatVersion = 1;

/// Writes one self-delimiting record: tag byte, flag byte, u32 LE payload
/// length, payload. Returns the number of bytes written.
std::size_t encode_statement(const Statement& s, std::ostream& sink);

/// Reads records from a byte stream. The record buffer is reused, so memory
/// is bounded by the largest single record.
class StatementDecoder {
 public:
  explicit StatementDecoder(std::istream& source, std::uint64_t start_offset = 0)
      : source_(source), offset_(start_offset) {}

  /// Returns the next statement, or nullopt at a clean end of stream.
  std::optional<Statement> next();

  std::uint64_t offset() const { return offset_; }
  std::size_t peak_buffer_bytes() const { return peak_; }

 private:
  std::istream& source_;
  std::uint64_t offset_;
  std::vector<std::uint8_t> buffer_;
  std::size_t peak_ = 0;
};

}  // namespace tbld
