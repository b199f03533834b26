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

// The compile project and the small single-purpose projects.

#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "acceptance.hpp"
#include "scenarios.hpp"

namespace tbld::acceptance {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> w;
  for (std::string s; in >> s;) w.push_back(s);
  return w;
}

std::string stem(const std::string& src) { return src.substr(0, src.find('.')); }

// Names each command of the compile project by its role: root, driver,
// link, compile(x), assemble(x). Temporaries are traced back to sources.
class Roles {
 public:
  explicit Roles(const std::vector<std::string>& commands) {
    for (const auto& c : commands) {
      auto w = split(c);
      if (w.size() == 3 && w[0] == "cc1.bsh") source_of_[w[2]] = stem(w[1]);
    }
  }

  std::string operator()(const std::string& command) const {
    auto w = split(command);
    if (w.empty()) return "?";
    if (w[0] == "Buildfile") return "root";
    if (w[0] == "cc.bsh") return "driver";
    if (w[0] == "ld.bsh") return "link";
    if (w[0] == "cc1.bsh" && w.size() == 3) return "compile(" + stem(w[1]) + ")";
    if (w[0] == "as.bsh" && w.size() == 3) {
      auto it = source_of_.find(w[1]);
      return "assemble(" + (it == source_of_.end() ? "?" : it->second) + ")";
    }
    return command;
  }

  std::set<std::string> all(const std::vector<std::string>& commands) const {
    std::set<std::string> out;
    for (const auto& c : commands) out.insert((*this)(c));
    return out;
  }

 private:
  std::map<std::string, std::string> source_of_;
};

std::set<std::string> minus(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::set<std::string> out;
  for (const auto& x : a) {
    if (!b.count(x)) out.insert(x);
  }
  return out;
}

}  // namespace

Outcome compile_add_source() {
  testing::Project p;
  testing::write_compile_project(p);
  if (p.build().exit_code != 0) return {false, "first build failed"};
  p.write("z.h", "int z_h;\n");
  p.write("z.c", "#include \"z.h\"\nint z(void) { return z_h; }\n");
  p.write("main.c",
          "#include \"x.h\"\n#include \"y.h\"\n#include \"z.h\"\n"
          "int main(void) { return x() + y() + z(); }\n");
  BuildResult r = p.build(2);
  Roles roles(r.commands);
  const auto traced = roles.all(r.traced);
  const auto skipped = minus(roles.all(r.commands), traced);
  const std::set<std::string> want_traced{"root",           "driver",         "compile(main)",
                                          "compile(z)",     "assemble(main)", "assemble(z)",
                                          "link"};
  const std::set<std::string> want_skipped{"compile(x)", "compile(y)", "assemble(x)",
                                           "assemble(y)"};
  Outcome o;
  o.pass = r.exit_code == 0 && traced == want_traced && skipped == want_skipped &&
           r.traced.size() == want_traced.size();
  o.detail = fmt::format("traced {{{}}}, skipped {{{}}}", fmt::join(traced, ", "),
                         fmt::join(skipped, ", "));
  return o;
}

Outcome compile_comment_edit() {
  testing::Project p;
  testing::write_compile_project(p);
  if (p.build().exit_code != 0) return {false, "first build failed"};
  const std::string before = p.read("program");
  p.write("x.c", "// x returns its header value\n" + p.read("x.c") + "// end\n");
  BuildResult r = p.build(2);
  Roles roles(r.commands);
  const auto traced = roles.all(r.traced);
  // The root only reruns when the source listing or its own script changes.
  const bool ok_set = traced == std::set<std::string>{"compile(x)"};
  Outcome o;
  o.pass = r.exit_code == 0 && ok_set && r.traced.size() == 1 && p.read("program") == before;
  o.detail = fmt::format("traced {{{}}}, program {}", fmt::join(traced, ", "),
                         p.read("program") == before ? "unchanged" : "changed");
  return o;
}

Outcome restore_deleted_object() {
  testing::Project p;
  p.write("Buildfile", "RUN hash.bsh x.c x.o\nRUN join.bsh prog x.o\n");
  p.write("hash.bsh", "HASHCOPY $1 $2\n");
  p.write("join.bsh", "SET o $1\nSHIFT\nCAT $o $*\n");
  p.write("x.c", "int x;\n");
  if (p.build().exit_code != 0) return {false, "first build failed"};
  const std::string object = p.read("x.o");
  const std::string prog = p.read("prog");
  p.remove("x.o");
  BuildResult r = p.build(2);
  Outcome o;
  o.pass = r.exit_code == 0 && r.stats.traced == 0 && p.exists("x.o") && p.read("x.o") == object &&
           p.read("prog") == prog;
  o.detail = fmt::format("traced {}, x.o {}", r.stats.traced,
                         !p.exists("x.o")           ? "missing"
                         : p.read("x.o") == object ? "restored"
                                                   : "differs");
  return o;
}

Outcome redirect_short_circuit() {
  testing::Project p;
  // The root truncates b and hands it to cat as stdout.
  p.write("Buildfile", "SPAWN >b cat.bsh a -> h\nWAIT $h\n");
  p.write("cat.bsh", "CAT - $1\n");
  p.write("a", "payload\n");
  if (p.build().exit_code != 0) return {false, "first build failed"};
  const BuildResult again = p.build(2);
  // Put b back by hand with the same bytes and a new mtime.
  const std::string b = p.read("b");
  p.remove("b");
  p.write("b", b);
  const BuildResult r = p.build(3);
  Outcome o;
  o.pass = again.stats.traced == 0 && r.exit_code == 0 && r.stats.traced == 0 && p.read("b") == b;
  o.detail = fmt::format("rebuild traced {}, after rewriting b traced {}", again.stats.traced,
                         r.stats.traced);
  return o;
}

}  // namespace tbld::acceptance
