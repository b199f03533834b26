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

// BuildScript: the small command language the tracer interprets.
// See docs/buildscript.md for the grammar.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tbld {

struct Word {
  std::string text;
  bool quoted = false;
  bool operator==(const Word&) const = default;
};

struct Instr {
  std::string op;  // upper-case keyword
  std::vector<Word> args;
  std::vector<Instr> body;       // IF/FOR block
  std::vector<Instr> else_body;  // IF ... ELSE block
  int line = 0;
};

struct Program {
  std::vector<Instr> instrs;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

Program parse_buildscript(std::string_view source);

/// True for files the tracer interprets: extension .bsh or name Buildfile.
bool is_buildscript_name(std::string_view path);

/// Variable scope of one process. Values are word lists.
struct Scope {
  std::map<std::string, std::vector<std::string>> vars;
  std::vector<std::string> args;  // $0 is args[0]
};

/// Expands $name, ${name}, $0..$9, $* and $# in one word. An unquoted word
/// that is exactly one variable reference expands to that many words.
std::vector<std::string> expand_word(const Word& w, const Scope& scope);
std::vector<std::string> expand_words(const std::vector<Word>& ws, const Scope& scope);

}  // namespace tbld
