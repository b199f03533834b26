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

// Instruction dispatch, control flow and process management.

#include <algorithm>
#include <sstream>

#include "tracer_ops.hpp"

namespace tbld {

namespace {

using Words = std::vector<std::string>;

// Splits a trailing "-> var".
std::optional<std::string> take_arrow(Words& w) {
  if (w.size() >= 2 && w[w.size() - 2] == "->") {
    std::string v = w.back();
    w.resize(w.size() - 2);
    return v;
  }
  return std::nullopt;
}

std::string join(const Words& w, std::size_t from = 0) {
  std::string s;
  for (std::size_t i = from; i < w.size(); ++i) {
    if (i > from) s += ' ';
    s += w[i];
  }
  return s;
}

void need(bool ok) {
  if (!ok) throw InstrExit{1};
}

}  // namespace

std::optional<std::int32_t> ProcessOps::load_script() {
  RefId ref;
  if (open(p_.cmd.exe, AccessFlags{.read = true}, ref) != ResultCode::kSuccess) return 127;
  ArtifactId a = env().ref_artifact(p_.id, ref);
  if (env().artifact(a).kind != ArtifactKind::kFile || !is_buildscript_name(p_.cmd.exe)) {
    return 127;
  }
  std::string text = read_file(a, ref);
  try {
    p_.program = std::make_shared<Program>(parse_buildscript(text));
  } catch (const ParseError& e) {
    h_.console(p_.cmd.exe + ": " + e.what() + "\n");
    return 127;
  }
  return std::nullopt;
}

bool ProcessOps::condition(const Words& a) {
  need(!a.empty());
  if (a[0] == "NOT") return !condition(Words(a.begin() + 1, a.end()));
  if (a[0] == "EQ") {
    need(a.size() <= 3);
    return (a.size() > 1 ? a[1] : "") == (a.size() > 2 ? a[2] : "");
  }
  if (a[0] == "EXISTS") {
    need(a.size() == 2);
    RefId ref;
    return open(a[1], AccessFlags{}, ref) == ResultCode::kSuccess;
  }
  if (a[0] == "CONTAINS") {
    need(a.size() >= 3);
    return read_path(a[1]).find(join(a, 2)) != std::string::npos;
  }
  need(false);
  return false;
}

std::optional<CmdRef> ProcessOps::op_spawn(const Words& args) {
  Command cmd;
  cmd.cwd = RefId{1};
  cmd.root = RefId{0};
  cmd.initial_fds = {{0, fd_ref(0)}, {1, fd_ref(1)}, {2, fd_ref(2)}};
  std::optional<std::string> handle;
  std::size_t i = 0;
  for (; i < args.size(); ++i) {
    const std::string& w = args[i];
    if (w.rfind("<@", 0) == 0) {
      PipeHandle& ph = pipe(w.substr(1));
      need(ph.read_open);
      cmd.initial_fds[0] = ph.read;
    } else if (w.rfind(">@", 0) == 0) {
      PipeHandle& ph = pipe(w.substr(1));
      need(ph.write_open);
      cmd.initial_fds[1] = ph.write;
    } else if (w.rfind(">", 0) == 0 && w.size() > 1) {
      const bool append = w.rfind(">>", 0) == 0;
      std::string path = w.substr(append ? 2 : 1);
      need(!path.empty());
      RefId ref;
      AccessFlags f{.write = true, .create = true, .truncate = !append, .create_mode = 0666};
      need(open(path, f, ref) == ResultCode::kSuccess);
      ArtifactId a = env().ref_artifact(p_.id, ref);
      need(env().artifact(a).kind == ArtifactKind::kFile);
      if (!append) write_file(a, ref, "", false);
      cmd.initial_fds[1] = ref;
    } else if (w == "->" && i + 1 < args.size()) {
      handle = args[++i];
    } else {
      break;
    }
  }
  need(i < args.size());
  cmd.exe = args[i];
  cmd.argv.assign(args.begin() + static_cast<std::ptrdiff_t>(i), args.end());

  SpawnOutcome out = h_.spawn(p_.id, cmd);
  if (!out.skipped_exit) t_.start(out.child, cmd);
  if (handle) p_.scope.vars[*handle] = {"%" + std::to_string(out.child.id)};
  return out.child;
}

Exec ProcessOps::finish_wait(CmdRef child, const std::optional<std::string>& var,
                             bool must_succeed) {
  auto code = h_.exit_code(child);
  if (!code) return Exec::kBlock;
  emit(stmt::Join{child});
  emit(stmt::ExitResult{child, *code});
  if (var) p_.scope.vars[*var] = {std::to_string(*code)};
  if (must_succeed && *code != 0) throw InstrExit{1};
  return Exec::kNext;
}

Exec ProcessOps::exec(const Instr& in) {
  Scope& sc = p_.scope;
  const std::string& op = in.op;
  auto raw = [&](std::size_t k) -> const std::string& {
    need(k < in.args.size());
    return in.args[k].text;
  };

  if (op == "IF") {
    Frame f;
    f.body = condition(expand_words(in.args, sc)) ? &in.body : &in.else_body;
    p_.frames.push_back(f);
    return Exec::kNext;
  }
  if (op == "FOR") {
    Frame f;
    f.body = &in.body;
    f.loop = true;
    f.loop_var = raw(0);
    f.loop_values = expand_words({in.args.begin() + 2, in.args.end()}, sc);
    f.pc = in.body.size();  // the first visit binds the first value
    p_.frames.push_back(f);
    return Exec::kNext;
  }
  if (op == "SET") {
    sc.vars[raw(0)] = expand_words({in.args.begin() + 1, in.args.end()}, sc);
    return Exec::kNext;
  }
  if (op == "SHIFT") {
    if (sc.args.size() > 1) sc.args.erase(sc.args.begin() + 1);
    return Exec::kNext;
  }
  if (op == "EXIT") {
    Words w = expand_words(in.args, sc);
    std::int32_t code = 0;
    if (!w.empty()) {
      try {
        code = std::stoi(w[0]);
      } catch (const std::exception&) {
        code = 1;
      }
    }
    throw InstrExit{code};
  }
  if (op == "TMPNAME") {
    static const char kAlnum[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    std::string name = "tmp/cc";
    std::uniform_int_distribution<int> pick(0, 61);
    for (int k = 0; k < 6; ++k) name += kAlnum[pick(h_.rng())];
    Words rest = expand_words({in.args.begin() + 1, in.args.end()}, sc);
    name += join(rest);
    sc.vars[raw(0)] = {name};
    return Exec::kNext;
  }

  Words w = expand_words(in.args, sc);
  if (op == "READ") {
    auto var = take_arrow(w);
    return op_read(w, var);
  }
  if (op == "WRITE" || op == "APPEND") {
    need(!w.empty());
    std::string text = join(w, 1) + "\n";
    if (w[0].rfind('@', 0) == 0) {
      PipeHandle& ph = pipe(w[0]);
      need(ph.write_open);
      write_pipe(env().ref_artifact(p_.id, ph.write), ph.write, text);
    } else if (w[0] == "-") {
      write_fd(1, text);
    } else {
      write_path(w[0], text, op == "APPEND");
    }
    return Exec::kNext;
  }
  if (op == "ECHO") {
    write_fd(1, join(w) + "\n");
    return Exec::kNext;
  }
  if (op == "STAT") {
    auto var = take_arrow(w);
    op_stat(w, var);
    return Exec::kNext;
  }
  if (op == "LIST") {
    auto var = take_arrow(w);
    need(w.size() == 1);
    Words names = list_dir(w[0], true);
    if (var) sc.vars[*var] = names;
    return Exec::kNext;
  }
  if (op == "GLOB") {
    auto var = take_arrow(w);
    need(w.size() == 1);
    op_glob(w[0], var);
    return Exec::kNext;
  }
  if (op == "MKDIR") {
    for (const auto& d : w) op_mkdir(d);
    return Exec::kNext;
  }
  if (op == "RM") {
    for (const auto& f : w) op_rm(f);
    return Exec::kNext;
  }
  if (op == "SYMLINK") {
    need(w.size() == 2);
    op_symlink(w[0], w[1]);
    return Exec::kNext;
  }
  if (op == "PIPE") {
    need(w.size() == 1);
    PipeHandle ph{new_ref(), new_ref()};
    emit(stmt::PipeRef{ph.read, ph.write});
    p_.pipes["@" + w[0]] = ph;
    return Exec::kNext;
  }
  if (op == "CLOSE" || op == "CLOSEW") {
    need(w.size() == 1);
    PipeHandle& ph = pipe(w[0].rfind('@', 0) == 0 ? w[0] : "@" + w[0]);
    if (ph.write_open) {
      emit(stmt::DoneWithRef{ph.write});
      ph.write_open = false;
    }
    if (op == "CLOSE" && ph.read_open) {
      emit(stmt::DoneWithRef{ph.read});
      ph.read_open = false;
    }
    return Exec::kNext;
  }
  if (op == "SPAWN") {
    if (auto var = take_arrow(w)) w.insert(w.begin(), {"->", *var});
    op_spawn(w);
    return Exec::kNext;
  }
  if (op == "RUN") {
    if (!p_.pending_run) p_.pending_run = op_spawn(w);
    if (finish_wait(*p_.pending_run, std::nullopt, false) == Exec::kBlock) return Exec::kBlock;
    auto code = h_.exit_code(*p_.pending_run);
    p_.pending_run.reset();
    need(code == 0);
    return Exec::kNext;
  }
  if (op == "WAIT") {
    auto var = take_arrow(w);
    need(w.size() == 1 && w[0].size() > 1 && w[0][0] == '%');
    CmdRef child{static_cast<std::uint32_t>(std::stoul(w[0].substr(1)))};
    return finish_wait(child, var, false);
  }
  if (op == "HASHCOPY") {
    need(w.size() == 2);
    std::string text = hashcopy_text(w[0], 0);
    write_path(w[1], "hc1 " + digest_string(text).hex() + "\n", false);
    return Exec::kNext;
  }
  if (op == "CAT") {
    need(!w.empty());
    std::string text;
    for (std::size_t k = 1; k < w.size(); ++k) text += read_path(w[k]);
    if (w[0] == "-") {
      write_fd(1, text);
    } else {
      write_path(w[0], text, false);
    }
    return Exec::kNext;
  }
  need(false);
  return Exec::kNext;
}

std::string ProcessOps::hashcopy_text(const std::string& path, int depth) {
  need(depth < 16);
  std::string src = read_path(path);
  auto slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "" : path.substr(0, slash + 1);
  std::string out;
  std::istringstream in(src);
  for (std::string line; std::getline(in, line);) {
    if (auto c = line.find("//"); c != std::string::npos) line.erase(c);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.rfind("#error", 0) == 0) throw InstrExit{1};
    if (line.rfind("#include \"", 0) == 0) {
      auto end = line.find('"', 10);
      need(end != std::string::npos);
      out += hashcopy_text(dir + line.substr(10, end - 10), depth + 1);
      continue;
    }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace tbld
