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

// Helpers shared by the planner tests and the acceptance binary: random
// dependence graphs and a brute-force planner to check plan() against.

#pragma once

#include <random>

#include "tbld/planner.hpp"

namespace tbld::testing {

struct RandomGraph {
  DepGraph graph;
  RunSet initial;
  std::size_t nodes = 0;
};

RandomGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes);

/// Repeated full scans of the marking rules until nothing changes.
std::set<CmdRef> naive_plan(const DepGraph& d, const RunSet& r);

/// Members of each cycle over uncached edges, found by transitive closure.
std::vector<std::set<CmdRef>> naive_clusters(const DepGraph& d);

}  // namespace tbld::testing
