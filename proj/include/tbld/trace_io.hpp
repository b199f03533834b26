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

#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <vector>

#include "tbld/traceir.hpp"

namespace tbld {

/// Streams statements from a trace file. A missing file reads as an empty
/// trace; a file with the wrong magic or version is a CodecError.
class TraceReader {
 public:
  explicit TraceReader(const std::filesystem::path& path);

  std::optional<Statement> next();
  bool empty_source() const { return !stream_; }
  const StatementDecoder* decoder() const { return decoder_.get(); }

 private:
  std::unique_ptr<std::ifstream> stream_;
  std::unique_ptr<StatementDecoder> decoder_;
};

/// Writes header then records to a temp file; commit() renames it into
/// place. Destroying an uncommitted writer removes the temp file.
class TraceWriter {
 public:
  explicit TraceWriter(std::filesystem::path path);
  ~TraceWriter();
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void write(const Statement& s);
  void commit();
  std::size_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::filesystem::path temp_;
  std::ofstream out_;
  std::size_t count_ = 0;
  bool committed_ = false;
};

std::vector<Statement> load_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, const std::vector<Statement>& statements);

}  // namespace tbld
