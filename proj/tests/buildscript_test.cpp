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

#include <gtest/gtest.h>

#include "tbld/buildscript.hpp"

namespace tbld {
namespace {

TEST(Parse, FlatScript) {
  auto p = parse_buildscript("MKDIR out   # make it\n\nWRITE out/a \"x y\"\n");
  ASSERT_EQ(p.instrs.size(), 2u);
  EXPECT_EQ(p.instrs[0].op, "MKDIR");
  EXPECT_EQ(p.instrs[0].line, 1);
  EXPECT_EQ(p.instrs[1].line, 3);
  ASSERT_EQ(p.instrs[1].args.size(), 2u);
  EXPECT_EQ(p.instrs[1].args[1], (Word{"x y", true}));
}

TEST(Parse, Blocks) {
  auto p = parse_buildscript(
      "FOR f IN a b {\n"
      "  IF EQ $f a {\n"
      "    ECHO yes\n"
      "  } ELSE {\n"
      "    ECHO no\n"
      "  }\n"
      "}\n");
  ASSERT_EQ(p.instrs.size(), 1u);
  const Instr& loop = p.instrs[0];
  EXPECT_EQ(loop.op, "FOR");
  ASSERT_EQ(loop.body.size(), 1u);
  const Instr& cond = loop.body[0];
  EXPECT_EQ(cond.op, "IF");
  ASSERT_EQ(cond.body.size(), 1u);
  ASSERT_EQ(cond.else_body.size(), 1u);
  EXPECT_EQ(cond.else_body[0].args[0].text, "no");
}

TEST(Parse, Escapes) {
  auto p = parse_buildscript("ECHO \"a\\tb\\n\\\"q\\\" \\\\ \\$x\"\n");
  const Word& w = p.instrs[0].args[0];
  EXPECT_TRUE(w.quoted);
  Scope sc;
  sc.vars["x"] = {"NO"};
  EXPECT_EQ(expand_word(w, sc), (std::vector<std::string>{"a\tb\n\"q\" \\ $x"}));
}

TEST(Parse, ErrorsCarryLines) {
  auto line_of = [](const char* src) {
    try {
      parse_buildscript(src);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("ECHO a\nBOGUS x\n"), 2);
  EXPECT_EQ(line_of("IF EQ a a\nECHO\n"), 1);
  EXPECT_EQ(line_of("FOR x a b {\n}\n"), 1);
  EXPECT_EQ(line_of("ECHO \"open\n"), 1);
  EXPECT_EQ(line_of("IF EQ a a {\nECHO\n"), 3);
  EXPECT_EQ(line_of("ECHO a\n}\n"), 2);
}

TEST(Names, ScriptDetection) {
  EXPECT_TRUE(is_buildscript_name("Buildfile"));
  EXPECT_TRUE(is_buildscript_name("sub/Buildfile"));
  EXPECT_TRUE(is_buildscript_name("tools/cc.bsh"));
  EXPECT_FALSE(is_buildscript_name("cc"));
  EXPECT_FALSE(is_buildscript_name("x.bsh.txt"));
}

TEST(Expand, WholeVariableSplitsIntoWords) {
  Scope sc;
  sc.vars["srcs"] = {"a.c", "b.c"};
  sc.args = {"prog", "one", "two"};
  using V = std::vector<std::string>;
  EXPECT_EQ(expand_word({"$srcs", false}, sc), (V{"a.c", "b.c"}));
  EXPECT_EQ(expand_word({"${srcs}", false}, sc), (V{"a.c", "b.c"}));
  EXPECT_EQ(expand_word({"$srcs", true}, sc), (V{"a.c b.c"}));
  EXPECT_EQ(expand_word({"x-$srcs", false}, sc), (V{"x-a.c b.c"}));
  EXPECT_EQ(expand_word({"$*", false}, sc), (V{"one", "two"}));
  EXPECT_EQ(expand_word({"$#", false}, sc), (V{"2"}));
  EXPECT_EQ(expand_word({"$0", false}, sc), (V{"prog"}));
  EXPECT_EQ(expand_word({"$2.o", false}, sc), (V{"two.o"}));
  EXPECT_EQ(expand_word({"$missing", false}, sc), V{});
  EXPECT_EQ(expand_word({"lit", false}, sc), (V{"lit"}));
}

}  // namespace
}  // namespace tbld
