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

// Compares Env::resolve with the kernel's open(2) and stat(2) on twin
// random trees: the model walks one copy, the real calls run on the other.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tbld::testing {

struct ResolveReport {
  int cases = 0;
  int symlink_cases = 0;    // paths that crossed at least one symlink
  int exclusive_cases = 0;  // O_CREAT|O_EXCL
  std::vector<std::string> mismatches;
};

ResolveReport run_resolve_oracle(std::uint64_t seed, int cases);

}  // namespace tbld::testing
