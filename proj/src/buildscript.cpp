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

#include "tbld/buildscript.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace tbld {

namespace {

const std::set<std::string>& known_ops() {
  static const std::set<std::string> ops = {
      "READ",  "WRITE", "APPEND", "STAT",  "LIST",   "GLOB",     "MKDIR", "RM",
      "SYMLINK", "PIPE", "CLOSE", "CLOSEW", "SPAWN", "WAIT",    "RUN",   "EXIT",
      "SET",   "IF",    "FOR",    "HASHCOPY", "CAT", "ECHO",    "TMPNAME", "SHIFT",
  };
  return ops;
}

struct Token {
  enum Kind { kWord, kOpen, kClose, kNewline, kEnd } kind;
  Word word;
  int line;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      out.push_back({Token::kNewline, {}, line});
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (c == '"') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < src.size()) {
        char d = src[i++];
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\n') throw ParseError(line, "unterminated string");
        if (d == '\\' && i < src.size()) {
          char e = src[i++];
          if (e == 'n') {
            text += '\n';
          } else if (e == 't') {
            text += '\t';
          } else {
            text += e;  // \" \\ \$
            if (e == '$') text.insert(text.size() - 1, 1, '\\');
          }
        } else {
          text += d;
        }
      }
      if (!closed) throw ParseError(line, "unterminated string");
      out.push_back({Token::kWord, {text, true}, line});
    } else {
      std::size_t j = i;
      while (j < src.size() && !std::isspace(static_cast<unsigned char>(src[j])) &&
             src[j] != '"') {
        ++j;
      }
      std::string text(src.substr(i, j - i));
      i = j;
      if (text == "{") {
        out.push_back({Token::kOpen, {}, line});
      } else if (text == "}") {
        out.push_back({Token::kClose, {}, line});
      } else {
        out.push_back({Token::kWord, {text, false}, line});
      }
    }
  }
  out.push_back({Token::kEnd, {}, line});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Instr> block(bool nested) {
    std::vector<Instr> out;
    for (;;) {
      const Token& t = toks_[pos_];
      if (t.kind == Token::kNewline) {
        ++pos_;
        continue;
      }
      if (t.kind == Token::kEnd) {
        if (nested) throw ParseError(t.line, "missing }");
        return out;
      }
      if (t.kind == Token::kClose) {
        if (!nested) throw ParseError(t.line, "unexpected }");
        ++pos_;
        return out;
      }
      if (t.kind == Token::kOpen) throw ParseError(t.line, "unexpected {");
      out.push_back(instruction());
    }
  }

 private:
  Instr instruction() {
    const Token& head = toks_[pos_++];
    Instr in;
    in.line = head.line;
    in.op = head.word.text;
    if (head.word.quoted || !known_ops().count(in.op)) {
      throw ParseError(head.line, "unknown instruction '" + in.op + "'");
    }
    while (toks_[pos_].kind == Token::kWord) in.args.push_back(toks_[pos_++].word);
    const bool wants_block = in.op == "IF" || in.op == "FOR";
    if (toks_[pos_].kind == Token::kOpen) {
      if (!wants_block) throw ParseError(in.line, in.op + " takes no block");
      ++pos_;
      in.body = block(true);
      if (in.op == "IF" && toks_[pos_].kind == Token::kWord && !toks_[pos_].word.quoted &&
          toks_[pos_].word.text == "ELSE") {
        ++pos_;
        if (toks_[pos_].kind != Token::kOpen) throw ParseError(in.line, "ELSE needs {");
        ++pos_;
        in.else_body = block(true);
      }
    } else if (wants_block) {
      throw ParseError(in.line, in.op + " needs a { block");
    }
    if (in.op == "FOR" && (in.args.size() < 2 || in.args[1].text != "IN")) {
      throw ParseError(in.line, "FOR needs: FOR var IN words { ... }");
    }
    return in;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<std::string> lookup(const std::string& name, const Scope& scope) {
  if (name == "*") {
    if (scope.args.size() <= 1) return {};
    return {scope.args.begin() + 1, scope.args.end()};
  }
  if (name == "#") return {std::to_string(scope.args.empty() ? 0 : scope.args.size() - 1)};
  if (!name.empty() && std::isdigit(static_cast<unsigned char>(name[0]))) {
    std::size_t n = std::stoul(name);
    if (n < scope.args.size()) return {scope.args[n]};
    return {};
  }
  auto it = scope.vars.find(name);
  if (it == scope.vars.end()) return {};
  return it->second;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += v[i];
  }
  return s;
}

}  // namespace

Program parse_buildscript(std::string_view source) {
  Parser p(tokenize(source));
  return Program{p.block(false)};
}

bool is_buildscript_name(std::string_view path) {
  auto slash = path.rfind('/');
  std::string_view base = slash == std::string_view::npos ? path : path.substr(slash + 1);
  if (base == "Buildfile") return true;
  return base.size() > 4 && base.substr(base.size() - 4) == ".bsh";
}

std::vector<std::string> expand_word(const Word& w, const Scope& scope) {
  const std::string& t = w.text;
  // Whole-word reference: list expansion.
  if (!w.quoted && t.size() >= 2 && t[0] == '$') {
    std::string name;
    if (t[1] == '{' && t.back() == '}') {
      name = t.substr(2, t.size() - 3);
    } else {
      name = t.substr(1);
    }
    bool simple = name == "*" || name == "#" || (!name.empty() && std::all_of(name.begin(), name.end(), ident_char));
    if (simple) return lookup(name, scope);
  }
  std::string out;
  for (std::size_t i = 0; i < t.size();) {
    if (t[i] == '\\' && i + 1 < t.size() && t[i + 1] == '$') {
      out += '$';
      i += 2;
      continue;
    }
    if (t[i] != '$' || i + 1 >= t.size()) {
      out += t[i++];
      continue;
    }
    std::string name;
    std::size_t j = i + 1;
    if (t[j] == '{') {
      auto close = t.find('}', j);
      if (close == std::string::npos) {
        out += t[i++];
        continue;
      }
      name = t.substr(j + 1, close - j - 1);
      j = close + 1;
    } else if (t[j] == '*' || t[j] == '#') {
      name = t.substr(j, 1);
      ++j;
    } else if (std::isdigit(static_cast<unsigned char>(t[j]))) {
      name = t.substr(j, 1);
      ++j;
    } else {
      while (j < t.size() && ident_char(t[j])) name += t[j++];
      if (name.empty()) {
        out += t[i++];
        continue;
      }
    }
    out += join(lookup(name, scope));
    i = j;
  }
  return {out};
}

std::vector<std::string> expand_words(const std::vector<Word>& ws, const Scope& scope) {
  std::vector<std::string> out;
  for (const auto& w : ws) {
    auto e = expand_word(w, scope);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

}  // namespace tbld
