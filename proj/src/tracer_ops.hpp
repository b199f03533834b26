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

// Process state and instruction implementations for the tracer.

#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tbld/tracer.hpp"

namespace tbld {

struct Frame {
  const std::vector<Instr>* body = nullptr;
  std::size_t pc = 0;
  bool loop = false;
  std::string loop_var;
  std::vector<std::string> loop_values;
  std::size_t loop_next = 0;
};

struct PipeHandle {
  RefId read;
  RefId write;
  bool read_open = true;
  bool write_open = true;
};

struct Process {
  CmdRef id;
  Command cmd;
  std::shared_ptr<Program> program;
  Scope scope;
  std::vector<Frame> frames;
  std::uint32_t next_ref = 0;
  std::map<std::string, PipeHandle> pipes;
  std::set<std::pair<ArtifactId, std::uint64_t>> reads;  // (artifact, version) already matched
  enum class State { kStarting, kRunning, kDone } state = State::kStarting;
  std::optional<CmdRef> pending_run;  // RUN blocked on this child
  bool blocked_on_pipe = false;
  bool force_eof = false;
  std::int32_t exit_code = 0;
};

/// An instruction failed; the process exits with code.
struct InstrExit {
  std::int32_t code;
};

enum class Exec { kNext, kBlock };

class ProcessOps {
 public:
  ProcessOps(Tracer& tracer, Process& p) : t_(tracer), h_(tracer.host_), p_(p) {}

  /// Reads and parses the script. Returns an exit code on failure.
  std::optional<std::int32_t> load_script();
  /// Runs one instruction. Control flow pushes frames onto the process.
  Exec exec(const Instr& in);

 private:
  Env& env() { return h_.env(); }
  RefId new_ref() { return RefId{p_.next_ref++}; }
  RefId fd_ref(int fd) const;
  void emit(StatementBody body);
  ResultCode open(const std::string& path, const AccessFlags& flags, RefId& out);
  void commit(ArtifactId a);
  std::string read_file(ArtifactId a, RefId ref);
  void write_file(ArtifactId a, RefId ref, const std::string& bytes, bool append);
  void write_fd(int fd, const std::string& bytes);
  void write_pipe(ArtifactId a, RefId ref, const std::string& bytes);
  std::string read_path(const std::string& path);
  void write_path(const std::string& path, const std::string& bytes, bool append);
  PipeHandle& pipe(const std::string& token);

  Exec op_read(const std::vector<std::string>& a, const std::optional<std::string>& var);
  // Blocks while a writer may still add bytes.
  Exec read_pipe(ArtifactId pipe, RefId ref, std::string& text);
  void op_stat(const std::vector<std::string>& a, const std::optional<std::string>& var);
  std::vector<std::string> list_dir(const std::string& dir, bool must_exist);
  void op_glob(const std::string& pattern, const std::optional<std::string>& var);
  void op_mkdir(const std::string& path);
  void op_rm(const std::string& path);
  void op_symlink(const std::string& dest, const std::string& link);
  std::optional<CmdRef> op_spawn(const std::vector<std::string>& a);
  Exec finish_wait(CmdRef child, const std::optional<std::string>& var, bool must_succeed);
  bool condition(const std::vector<std::string>& a);
  std::string hashcopy_text(const std::string& path, int depth);

  Tracer& t_;
  TraceHost& h_;
  Process& p_;
};

}  // namespace tbld
