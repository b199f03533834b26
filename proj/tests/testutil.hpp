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

// Scratch projects for tests.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tbld/engine.hpp"

namespace tbld::testing {

// A temporary project directory, removed on destruction.
class Project {
 public:
  Project();
  ~Project();
  Project(const Project&) = delete;
  Project& operator=(const Project&) = delete;

  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& rel, const std::string& bytes);
  std::string read(const std::string& rel) const;
  bool exists(const std::string& rel) const;
  void remove(const std::string& rel);

  BuildOptions options() const;
  BuildResult build(std::uint64_t seed = 1);

  // Every file, dir and symlink under root except the state dir, with
  // contents. Used to compare two builds byte for byte.
  std::map<std::string, std::string> snapshot() const;

 private:
  std::filesystem::path root_;
};

// Copies a whole tree (without state) into another project.
void copy_tree(const Project& from, Project& to);

}  // namespace tbld::testing
