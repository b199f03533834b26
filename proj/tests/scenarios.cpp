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

#include "scenarios.hpp"

#include <fmt/format.h>

namespace tbld::testing {

void write_compile_project(Project& p) {
  p.write("Buildfile",
          "MKDIR tmp\n"
          "GLOB *.c -> srcs\n"
          "RUN cc.bsh program $srcs\n");
  p.write("cc.bsh",
          "# cc OUT SRC...: compile, assemble and link through temporaries\n"
          "SET out $1\n"
          "SHIFT\n"
          "SET objs\n"
          "SET tmps\n"
          "FOR f IN $* {\n"
          "  TMPNAME s .s\n"
          "  TMPNAME o .o\n"
          "  RUN cc1.bsh $f $s\n"
          "  RUN as.bsh $s $o\n"
          "  SET objs $objs $o\n"
          "  SET tmps $tmps $s $o\n"
          "}\n"
          "RUN ld.bsh $out $objs\n"
          "RM $tmps\n");
  p.write("cc1.bsh", "HASHCOPY $1 $2\n");
  p.write("as.bsh", "HASHCOPY $1 $2\n");
  p.write("ld.bsh", "SET out $1\nSHIFT\nCAT $out $*\n");
  p.write("x.h", "int x_h;\n");
  p.write("y.h", "int y_h;\n");
  p.write("x.c", "#include \"x.h\"\nint x(void) { return x_h; }\n");
  p.write("y.c", "#include \"y.h\"\nint y(void) { return y_h; }\n");
  p.write("main.c", "#include \"x.h\"\n#include \"y.h\"\nint main(void) { return x() + y(); }\n");
}

void write_pipe_cycle(Project& p) {
  p.write("Buildfile",
          "PIPE p\n"
          "PIPE q\n"
          "SPAWN <@q >@p a.bsh -> ha\n"
          "SPAWN <@p >@q b.bsh -> hb\n"
          "CLOSE p\n"
          "CLOSE q\n"
          "WAIT $ha\n"
          "WAIT $hb\n");
  p.write("a.bsh", "ECHO ping\nREAD - -> r\nWRITE out_a got $r\n");
  p.write("b.bsh", "READ - -> r\nECHO pong $r\nWRITE out_b got $r\n");
}

void write_exit_chain(Project& p, int depth) {
  p.write("Buildfile", "SPAWN level1.bsh -> h\nWAIT $h -> code\nWRITE result $code\n");
  for (int k = 1; k < depth; ++k) {
    p.write(fmt::format("level{}.bsh", k),
            fmt::format("SPAWN level{}.bsh -> h\nWAIT $h -> code\nEXIT $code\n", k + 1));
  }
  p.write(fmt::format("level{}.bsh", depth), "IF CONTAINS flag 1 {\n  EXIT 1\n}\n");
  p.write("flag", "0\n");
}

void write_generated_header(Project& p) {
  // The root reads two metadata commands through pipes and writes the
  // header that main.c includes.
  p.write("Buildfile",
          "MKDIR gen\n"
          "PIPE v\n"
          "PIPE m\n"
          "SPAWN >@v version.bsh -> hv\n"
          "SPAWN >@m mode.bsh -> hm\n"
          "CLOSEW v\n"
          "CLOSEW m\n"
          "READ @v -> ver\n"
          "READ @m -> mode\n"
          "WAIT $hv\n"
          "WAIT $hm\n"
          "WRITE gen/config.h \"#define VERSION\" $ver $mode\n"
          "RUN cc1.bsh src/main.c main.o\n"
          "RUN cc1.bsh src/util.c util.o\n");
  // Both scan every source, like a tool that stamps a tree.
  p.write("version.bsh",
          "LIST src -> srcs\nFOR f IN $srcs {\n  READ src/$f\n}\nREAD VERSION -> v\nECHO $v\n");
  p.write("mode.bsh",
          "SET m release\nLIST src -> srcs\nFOR f IN $srcs {\n"
          "  IF CONTAINS src/$f DEBUG {\n    SET m debug\n  }\n}\nECHO $m\n");
  p.write("cc1.bsh", "HASHCOPY $1 $2\n");
  p.write("VERSION", "1 2\n");
  p.write("src/main.c", "#include \"../gen/config.h\"\nint main(void) { return util(); }\n");
  p.write("src/util.c", "int util(void) { return 0; }\n");
}

namespace {

const char* const kWords[] = {"alpha", "beta", "gamma", "delta", "key"};

std::string words(std::mt19937_64& rng) {
  std::string s;
  for (int n = 1 + static_cast<int>(rng() % 4); n > 0; --n) {
    s += kWords[rng() % 5];
    s += n > 1 ? ' ' : '\n';
  }
  return s;
}

void write_tools(Project& p) {
  p.write("hash.bsh", "HASHCOPY $1 $2\n");
  p.write("cat.bsh", "SET o $1\nSHIFT\nCAT $o $*\n");
  p.write("cond.bsh", "IF CONTAINS $1 $3 {\n  WRITE $2 yes\n} ELSE {\n  WRITE $2 no\n}\n");
  p.write("emit.bsh", "CAT - $1\n");
  p.write("sink.bsh", "READ - -> v\nWRITE $1 $v\n");
  p.write("tmp.bsh",
          "TMPNAME t .t\nRUN hash.bsh $1 $t\nRUN cat.bsh $2 $t $1\nRM $t\n");
  p.write("list.bsh", "LIST $1 -> names\nWRITE $2 $names\n");
  p.write("stat.bsh", "STAT $1 -> k\nWRITE $2 $k\n");
  p.write("fail.bsh", "IF CONTAINS $1 key {\n  EXIT 3\n}\n");
}

}  // namespace

void write_random_project(std::mt19937_64& rng, Project& p) {
  write_tools(p);
  // 9 tools, the Buildfile, 4 sources, a link, 8 outputs and 2 files the
  // edits may add: 25 at most.
  const int sources = 2 + static_cast<int>(rng() % 3);
  std::vector<std::string> inputs;
  for (int i = 0; i < sources; ++i) {
    p.write(fmt::format("in/s{}", i), words(rng));
    inputs.push_back(fmt::format("in/s{}", i));
  }
  if (rng() % 2) {
    std::filesystem::create_symlink("s0", p.root() / "in/link");
    inputs.push_back("in/link");
  }
  auto any_input = [&] { return inputs[rng() % inputs.size()]; };

  std::string script = "MKDIR tmp out\n";
  int commands = 1;  // the Buildfile
  int outputs = 0;
  while (commands < 12 && outputs < 8) {
    const std::string out = fmt::format("out/o{}", outputs);
    const auto kind = rng() % 9;
    int cost = 1;
    std::string step;
    switch (kind) {
      case 0:
        step = fmt::format("RUN hash.bsh {} {}\n", any_input(), out);
        break;
      case 1:
        step = fmt::format("RUN cat.bsh {} {} {}\n", out, any_input(), any_input());
        break;
      case 2:
        step = fmt::format("RUN cond.bsh {} {} {}\n", any_input(), out, kWords[rng() % 5]);
        break;
      case 3:
        cost = 2;
        step = fmt::format(
            "PIPE p{0}\nSPAWN >@p{0} emit.bsh {1} -> w{0}\nSPAWN <@p{0} sink.bsh {2} -> r{0}\n"
            "CLOSE p{0}\nWAIT $w{0}\nWAIT $r{0}\n",
            outputs, any_input(), out);
        break;
      case 4:
        cost = 3;
        step = fmt::format("RUN tmp.bsh {} {}\n", any_input(), out);
        break;
      case 5:
        step = fmt::format("RUN list.bsh in {}\n", out);
        break;
      case 6:
        cost = 0;
        step = fmt::format("SYMLINK ../{} {}\n", any_input(), out);
        break;
      case 7:
        step = fmt::format("RUN stat.bsh {} {}\n", any_input(), out);
        break;
      default:
        step = fmt::format("SPAWN fail.bsh {} -> f{}\nWAIT $f{} -> c{}\nWRITE {} $c{}\n",
                           any_input(), outputs, outputs, outputs, out, outputs);
    }
    if (commands + cost > 12) break;
    commands += cost;
    script += step;
    inputs.push_back(out);
    ++outputs;
  }
  p.write("Buildfile", script);
}

std::string apply_random_edits(std::mt19937_64& rng, Project& p, int count) {
  std::string log;
  const int edits = count > 0 ? count : 1 + static_cast<int>(rng() % 5);
  for (int e = 0; e < edits; ++e) {
    std::vector<std::string> sources;
    for (int i = 0; i < 8; ++i) {
      if (p.exists(fmt::format("in/s{}", i))) sources.push_back(fmt::format("in/s{}", i));
    }
    const std::string victim =
        sources.empty() ? "in/s0" : sources[rng() % sources.size()];
    switch (rng() % 7) {
      case 0:
      case 1:
        p.write(victim, words(rng));
        log += "rewrite " + victim + "; ";
        break;
      case 2:
        p.write(victim, p.read(victim) + kWords[rng() % 5] + "\n");
        log += "append " + victim + "; ";
        break;
      case 3:
        p.write(victim, p.read(victim));
        log += "touch " + victim + "; ";
        break;
      case 4: {
        // Only files no command names directly; a missing input fails the build.
        const std::string gone = fmt::format("in/s{}", 6 + rng() % 2);
        if (p.exists(gone)) {
          p.remove(gone);
          log += "delete " + gone + "; ";
        }
        break;
      }
      case 5: {
        const std::string fresh = fmt::format("in/s{}", 6 + rng() % 2);
        p.write(fresh, words(rng));
        log += "create " + fresh + "; ";
        break;
      }
      default:
        if (p.exists("in/link")) {
          p.remove("in/link");
          std::filesystem::create_symlink(fmt::format("s{}", rng() % 2), p.root() / "in/link");
          log += "retarget in/link; ";
        }
    }
  }
  return log;
}

}  // namespace tbld::testing
