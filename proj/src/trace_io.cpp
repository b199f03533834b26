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

#include "tbld/trace_io.hpp"

#include <fmt/format.h>
#include <unistd.h>

namespace tbld {

TraceReader::TraceReader(const std::filesystem::path& path) {
  auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*in) return;
  char magic[4];
  std::uint8_t ver[4];
  in->read(magic, 4);
  if (in->gcount() != 4 || !std::equal(magic, magic + 4, kTraceMagic)) {
    throw CodecError(CodecError::Kind::kCorrupt,
                     fmt::format("{}: bad trace magic", path.string()));
  }
  in->read(reinterpret_cast<char*>(ver), 4);
  if (in->gcount() != 4) {
    throw CodecError(CodecError::Kind::kCorrupt,
                     fmt::format("{}: truncated trace header", path.string()));
  }
  std::uint32_t version = ver[0] | ver[1] << 8 | ver[2] << 16 | static_cast<std::uint32_t>(ver[3]) << 24;
  if (version != kTraceFormatVersion) {
    throw CodecError(CodecError::Kind::kUnsupportedVersion,
                     fmt::format("{}: unsupported trace format version {}", path.string(), version));
  }
  stream_ = std::move(in);
  decoder_ = std::make_unique<StatementDecoder>(*stream_, 8);
}

std::optional<Statement> TraceReader::next() {
  if (!decoder_) return std::nullopt;
  return decoder_->next();
}

TraceWriter::TraceWriter(std::filesystem::path path) : path_(std::move(path)) {
  temp_ = path_;
  temp_ += fmt::format(".tmp.{}", ::getpid());
  out_.open(temp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error(fmt::format("cannot write {}", temp_.string()));
  out_.write(kTraceMagic, 4);
  std::uint8_t ver[4];
  for (int i = 0; i < 4; ++i) ver[i] = static_cast<std::uint8_t>(kTraceFormatVersion >> (8 * i));
  out_.write(reinterpret_cast<const char*>(ver), 4);
}

TraceWriter::~TraceWriter() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(temp_, ec);
  }
}

void TraceWriter::write(const Statement& s) {
  encode_statement(s, out_);
  ++count_;
}

void TraceWriter::commit() {
  out_.flush();
  if (!out_) throw std::runtime_error(fmt::format("write failed: {}", temp_.string()));
  out_.close();
  std::filesystem::rename(temp_, path_);
  committed_ = true;
}

std::vector<Statement> load_trace(const std::filesystem::path& path) {
  std::vector<Statement> out;
  TraceReader reader(path);
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

void write_trace(const std::filesystem::path& path, const std::vector<Statement>& statements) {
  TraceWriter w(path);
  for (const auto& s : statements) w.write(s);
  w.commit();
}

}  // namespace tbld
