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

#include "tbld/traceir.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <span>

namespace tbld {

const char* result_name(ResultCode code) {
  switch (code) {
    case ResultCode::kSuccess: return "SUCCESS";
    case ResultCode::kNoEnt: return "ENOENT";
    case ResultCode::kAccess: return "EACCES";
    case ResultCode::kExist: return "EEXIST";
    case ResultCode::kNotDir: return "ENOTDIR";
    case ResultCode::kIsDir: return "EISDIR";
  }
  return "E?";
}

const char* kind_name(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::kFile: return "file";
    case ArtifactKind::kDir: return "dir";
    case ArtifactKind::kSymlink: return "symlink";
    case ArtifactKind::kPipe: return "pipe";
    case ArtifactKind::kSpecial: return "special";
  }
  return "?";
}

bool content_equivalent(const ContentState& a, const ContentState& b) {
  if (a.index() != b.index()) return false;
  if (auto* fa = std::get_if<FileContent>(&a)) {
    const auto& fb = std::get<FileContent>(b);
    return fa->hash == fb.hash && fa->size == fb.size;
  }
  return a == b;
}

bool Command::same_invocation(const Command& other) const {
  return exe == other.exe && argv == other.argv && env == other.env && cwd == other.cwd &&
         root == other.root;
}

std::string Command::command_line() const {
  std::string out;
  for (const auto& a : argv) {
    if (!out.empty()) out.push_back(' ');
    out += a;
  }
  return out;
}

bool Statement::is_check() const {
  return std::holds_alternative<stmt::CompareRefs>(body) ||
         std::holds_alternative<stmt::ExpectResult>(body) ||
         std::holds_alternative<stmt::MatchMetadata>(body) ||
         std::holds_alternative<stmt::MatchContent>(body) ||
         std::holds_alternative<stmt::ExitResult>(body);
}

namespace {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put_le(v, 2); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void i32(std::int32_t v) { put_le(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v), 8); }
  void boolean(bool b) { u8(b ? 1 : 0); }
  void str(const std::string& s, const char* field) {
    if (s.find('\0') != std::string::npos) {
      throw CodecError(CodecError::Kind::kUnencodable,
                       fmt::format("field '{}' contains a NUL byte", field));
    }
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void ref(RefId r) { u32(r.id); }
  void cmd(CmdRef c) { u32(c.id); }

  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  void put_le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::uint64_t base_offset)
      : data_(data), base_(base_offset) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() { return get_le(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  bool boolean() { return u8() != 0; }
  std::string str() {
    auto n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  RefId ref() { return RefId{u32()}; }
  CmdRef cmd() { return CmdRef{u32()}; }

  template <typename E>
  E enumeration(std::uint8_t max) {
    auto v = u8();
    if (v > max) corrupt("enum value out of range");
    return static_cast<E>(v);
  }

  bool done() const { return pos_ == data_.size(); }

  [[noreturn]] void corrupt(const char* what) const {
    throw CodecError(CodecError::Kind::kCorrupt,
                     fmt::format("corrupt trace at byte offset {}: {}", base_ + pos_, what));
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) corrupt("field runs past end of record");
  }
  std::uint64_t get_le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

void put_flags(ByteWriter& w, const AccessFlags& f) {
  std::uint8_t bits = (f.read ? 1 : 0) | (f.write ? 2 : 0) | (f.execute ? 4 : 0) |
                      (f.create ? 8 : 0) | (f.exclusive ? 16 : 0) | (f.truncate ? 32 : 0) |
                      (f.nofollow ? 64 : 0);
  w.u8(bits);
  w.u16(f.create_mode);
}

AccessFlags get_flags(ByteReader& r) {
  auto bits = r.u8();
  AccessFlags f;
  f.read = bits & 1;
  f.write = bits & 2;
  f.execute = bits & 4;
  f.create = bits & 8;
  f.exclusive = bits & 16;
  f.truncate = bits & 32;
  f.nofollow = bits & 64;
  f.create_mode = r.u16();
  return f;
}

void put_meta(ByteWriter& w, const MetadataState& m) {
  w.u32(m.uid);
  w.u32(m.gid);
  w.u8(static_cast<std::uint8_t>(m.kind));
  w.u16(m.perms);
}

MetadataState get_meta(ByteReader& r) {
  MetadataState m;
  m.uid = r.u32();
  m.gid = r.u32();
  m.kind = r.enumeration<ArtifactKind>(4);
  m.perms = r.u16();
  return m;
}

void put_content(ByteWriter& w, const ContentState& c) {
  w.u8(static_cast<std::uint8_t>(c.index()));
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FileContent>) {
          for (auto b : v.hash.bytes) w.u8(b);
          w.u64(v.size);
          w.i64(v.mtime_ns);
          w.boolean(v.cached);
        } else if constexpr (std::is_same_v<T, DirContent>) {
          w.u32(static_cast<std::uint32_t>(v.entries.size()));
          for (const auto& e : v.entries) w.str(e, "dir entry");
        } else if constexpr (std::is_same_v<T, SymlinkContent>) {
          w.str(v.dest, "symlink dest");
        } else if constexpr (std::is_same_v<T, PipeContent>) {
          w.u8(static_cast<std::uint8_t>(v.op));
          w.i64(v.writer_epoch);
        } else {
          w.u8(static_cast<std::uint8_t>(v.policy));
        }
      },
      c);
}

ContentState get_content(ByteReader& r) {
  switch (r.u8()) {
    case 0: {
      FileContent f;
      for (auto& b : f.hash.bytes) b = r.u8();
      f.size = r.u64();
      f.mtime_ns = r.i64();
      f.cached = r.boolean();
      return f;
    }
    case 1: {
      DirContent d;
      auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) d.entries.push_back(r.str());
      return d;
    }
    case 2: return SymlinkContent{r.str()};
    case 3: {
      PipeContent p;
      p.op = r.enumeration<PipeOp>(1);
      p.writer_epoch = r.i64();
      return p;
    }
    case 4: return SpecialContent{r.enumeration<SpecialPolicy>(1)};
    default: r.corrupt("unknown content kind");
  }
}

void put_command(ByteWriter& w, const Command& c) {
  w.str(c.exe, "exe");
  w.u32(static_cast<std::uint32_t>(c.argv.size()));
  for (const auto& a : c.argv) w.str(a, "argv");
  w.u32(static_cast<std::uint32_t>(c.env.size()));
  for (const auto& [k, v] : c.env) {
    w.str(k, "env key");
    w.str(v, "env value");
  }
  w.ref(c.cwd);
  w.ref(c.root);
  w.u32(static_cast<std::uint32_t>(c.initial_fds.size()));
  for (const auto& [fd, ref] : c.initial_fds) {
    w.i32(fd);
    w.ref(ref);
  }
}

Command get_command(ByteReader& r) {
  Command c;
  c.exe = r.str();
  auto argc = r.u32();
  for (std::uint32_t i = 0; i < argc; ++i) c.argv.push_back(r.str());
  auto envc = r.u32();
  for (std::uint32_t i = 0; i < envc; ++i) {
    auto k = r.str();
    c.env[k] = r.str();
  }
  c.cwd = r.ref();
  c.root = r.ref();
  auto fdc = r.u32();
  for (std::uint32_t i = 0; i < fdc; ++i) {
    auto fd = r.i32();
    c.initial_fds[fd] = r.ref();
  }
  return c;
}

void put_body(ByteWriter& w, const StatementBody& body) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, stmt::PathRef>) {
          w.ref(s.base);
          w.str(s.path, "path");
          put_flags(w, s.flags);
          w.ref(s.out);
        } else if constexpr (std::is_same_v<T, stmt::FileRef> || std::is_same_v<T, stmt::DirRef>) {
          w.ref(s.out);
        } else if constexpr (std::is_same_v<T, stmt::PipeRef>) {
          w.ref(s.read_out);
          w.ref(s.write_out);
        } else if constexpr (std::is_same_v<T, stmt::SymlinkRef>) {
          w.str(s.dest, "dest");
          w.ref(s.out);
        } else if constexpr (std::is_same_v<T, stmt::SpecialRef>) {
          w.u8(static_cast<std::uint8_t>(s.which));
          w.str(s.name, "special name");
          w.ref(s.out);
        } else if constexpr (std::is_same_v<T, stmt::CompareRefs>) {
          w.ref(s.a);
          w.ref(s.b);
          w.u8(static_cast<std::uint8_t>(s.type));
        } else if constexpr (std::is_same_v<T, stmt::ExpectResult>) {
          w.ref(s.ref);
          w.i32(static_cast<std::int32_t>(s.expected));
        } else if constexpr (std::is_same_v<T, stmt::MatchMetadata> ||
                             std::is_same_v<T, stmt::UpdateMetadata>) {
          w.ref(s.ref);
          put_meta(w, s.state);
        } else if constexpr (std::is_same_v<T, stmt::MatchContent> ||
                             std::is_same_v<T, stmt::UpdateContent>) {
          w.ref(s.ref);
          put_content(w, s.state);
        } else if constexpr (std::is_same_v<T, stmt::ExitResult>) {
          w.cmd(s.child);
          w.i32(s.expected);
        } else if constexpr (std::is_same_v<T, stmt::AddEntry> ||
                             std::is_same_v<T, stmt::RemoveEntry>) {
          w.ref(s.dir);
          w.str(s.name, "entry name");
          w.ref(s.target);
        } else if constexpr (std::is_same_v<T, stmt::Launch>) {
          w.cmd(s.child);
          put_command(w, s.command);
        } else if constexpr (std::is_same_v<T, stmt::Join>) {
          w.cmd(s.child);
        } else if constexpr (std::is_same_v<T, stmt::UsingRef> ||
                             std::is_same_v<T, stmt::DoneWithRef>) {
          w.ref(s.ref);
        } else {
          static_assert(std::is_same_v<T, stmt::Exit>);
          w.i32(s.code);
        }
      },
      body);
}

ResultCode get_result(ByteReader& r) {
  auto v = r.i32();
  switch (v) {
    case 0: case 2: case 13: case 17: case 20: case 21: return static_cast<ResultCode>(v);
    default: r.corrupt("unknown result code");
  }
}

StatementBody get_body(std::uint8_t tag, ByteReader& r) {
  switch (tag) {
    case 1: {
      stmt::PathRef s;
      s.base = r.ref();
      s.path = r.str();
      s.flags = get_flags(r);
      s.out = r.ref();
      return s;
    }
    case 2: return stmt::FileRef{r.ref()};
    case 3: return stmt::DirRef{r.ref()};
    case 4: {
      auto a = r.ref();
      return stmt::PipeRef{a, r.ref()};
    }
    case 5: {
      auto dest = r.str();
      return stmt::SymlinkRef{dest, r.ref()};
    }
    case 6: {
      stmt::SpecialRef s;
      s.which = r.enumeration<SpecialWhich>(4);
      s.name = r.str();
      s.out = r.ref();
      return s;
    }
    case 7: {
      stmt::CompareRefs s;
      s.a = r.ref();
      s.b = r.ref();
      s.type = r.enumeration<RefComparison>(1);
      return s;
    }
    case 8: {
      auto ref = r.ref();
      return stmt::ExpectResult{ref, get_result(r)};
    }
    case 9: {
      auto ref = r.ref();
      return stmt::MatchMetadata{ref, get_meta(r)};
    }
    case 10: {
      auto ref = r.ref();
      return stmt::MatchContent{ref, get_content(r)};
    }
    case 11: {
      auto c = r.cmd();
      return stmt::ExitResult{c, r.i32()};
    }
    case 12: {
      auto ref = r.ref();
      return stmt::UpdateMetadata{ref, get_meta(r)};
    }
    case 13: {
      auto ref = r.ref();
      return stmt::UpdateContent{ref, get_content(r)};
    }
    case 14:
    case 15: {
      auto dir = r.ref();
      auto name = r.str();
      auto target = r.ref();
      if (tag == 14) return stmt::AddEntry{dir, name, target};
      return stmt::RemoveEntry{dir, name, target};
    }
    case 16: {
      auto c = r.cmd();
      return stmt::Launch{c, get_command(r)};
    }
    case 17: return stmt::Join{r.cmd()};
    case 18: return stmt::UsingRef{r.ref()};
    case 19: return stmt::DoneWithRef{r.ref()};
    case 20: return stmt::Exit{r.i32()};
    default:
      throw CodecError(CodecError::Kind::kUnsupportedVersion,
                       fmt::format("unknown statement tag {}", tag));
  }
}

}  // namespace

std::size_t encode_statement(const Statement& s, std::ostream& sink) {
  ByteWriter payload;
  payload.cmd(s.owner);
  put_body(payload, s.body);
  auto& bytes = payload.bytes();

  std::uint8_t header[6];
  header[0] = static_cast<std::uint8_t>(s.body.index() + 1);
  header[1] = s.phase == Phase::kPostBuild ? 1 : 0;
  auto len = static_cast<std::uint32_t>(bytes.size());
  for (int i = 0; i < 4; ++i) header[2 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  sink.write(reinterpret_cast<const char*>(header), sizeof header);
  sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(len));
  return sizeof header + bytes.size();
}

std::optional<Statement> StatementDecoder::next() {
  std::uint8_t header[6];
  source_.read(reinterpret_cast<char*>(header), sizeof header);
  auto got = static_cast<std::size_t>(source_.gcount());
  if (got == 0) return std::nullopt;
  if (got < sizeof header) {
    throw CodecError(CodecError::Kind::kCorrupt,
                     fmt::format("corrupt trace at byte offset {}: truncated record header",
                                 offset_ + got));
  }
  std::uint8_t tag = header[0];
  if (tag == 0 || tag > std::variant_size_v<StatementBody>) {
    throw CodecError(CodecError::Kind::kUnsupportedVersion,
                     fmt::format("unknown statement tag {} at byte offset {}", tag, offset_));
  }
  if (header[1] > 1) {
    throw CodecError(CodecError::Kind::kCorrupt,
                     fmt::format("corrupt trace at byte offset {}: bad flags", offset_ + 1));
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(header[2 + i]) << (8 * i);

  buffer_.resize(len);
  peak_ = std::max(peak_, buffer_.capacity());
  source_.read(reinterpret_cast<char*>(buffer_.data()), len);
  if (static_cast<std::size_t>(source_.gcount()) < len) {
    throw CodecError(CodecError::Kind::kCorrupt,
                     fmt::format("corrupt trace at byte offset {}: truncated record",
                                 offset_ + sizeof header + source_.gcount()));
  }

  ByteReader r(buffer_, offset_ + sizeof header);
  Statement s;
  s.owner = r.cmd();
  s.phase = header[1] ? Phase::kPostBuild : Phase::kPreBuild;
  s.body = get_body(tag, r);
  if (!r.done()) r.corrupt("trailing bytes in record");
  offset_ += sizeof header + len;
  return s;
}

}  // namespace tbld
