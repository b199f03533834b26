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

#include "testutil.hpp"

#include <stdlib.h>

#include <chrono>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace tbld::testing {

namespace fs = std::filesystem;

Project::Project() {
  std::string tmpl = (fs::temp_directory_path() / "tbld-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  root_ = tmpl;
}

Project::~Project() {
  std::error_code ec;
  fs::remove_all(root_, ec);
}

void Project::write(const std::string& rel, const std::string& bytes) {
  auto p = root_ / rel;
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
  // Rewrites can land within one clock tick; keep every write's mtime
  // distinct so a same-size edit is never mistaken for the old file.
  static std::int64_t bump = 0;
  fs::last_write_time(p, fs::file_time_type::clock::now() + std::chrono::milliseconds(++bump));
}

std::string Project::read(const std::string& rel) const {
  std::ifstream in(root_ / rel, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool Project::exists(const std::string& rel) const {
  std::error_code ec;
  return fs::exists(fs::symlink_status(root_ / rel, ec));
}

void Project::remove(const std::string& rel) {
  std::error_code ec;
  fs::remove_all(root_ / rel, ec);
}

BuildOptions Project::options() const {
  BuildOptions o;
  o.root = root_;
  return o;
}

BuildResult Project::build(std::uint64_t seed) {
  BuildOptions o = options();
  o.seed = seed;
  return do_build(o);
}

std::map<std::string, std::string> Project::snapshot() const {
  std::map<std::string, std::string> out;
  for (auto it = fs::recursive_directory_iterator(root_); it != fs::recursive_directory_iterator();
       ++it) {
    auto rel = it->path().lexically_relative(root_).string();
    if (rel == ".tbld" || rel.rfind(".tbld/", 0) == 0) {
      if (it->is_directory()) it.disable_recursion_pending();
      continue;
    }
    auto st = it->symlink_status();
    if (fs::is_symlink(st)) {
      out[rel] = "symlink:" + fs::read_symlink(it->path()).string();
    } else if (fs::is_directory(st)) {
      out[rel] = "dir";
    } else {
      out[rel] = "file:" + read(rel);
    }
  }
  return out;
}

void copy_tree(const Project& from, Project& to) {
  for (const auto& [rel, v] : from.snapshot()) {
    auto p = to.root() / rel;
    if (v == "dir") {
      fs::create_directories(p);
    } else if (v.rfind("symlink:", 0) == 0) {
      fs::create_directories(p.parent_path());
      fs::create_symlink(v.substr(8), p);
    } else {
      to.write(rel, v.substr(5));
    }
  }
}

}  // namespace tbld::testing
