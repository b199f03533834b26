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

// Command dependence graph and build planning.

#pragma once

#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "tbld/fsmodel.hpp"
#include "tbld/traceir.hpp"

namespace tbld {

enum class MarkReason : std::uint8_t {
  kChanged,
  kUncachedOutput,
  kUncachedProducer,
  kUncachedConsumer,
  kCluster,
};

const char* reason_name(MarkReason r);

struct DepEdge {
  CmdRef producer;
  CmdRef consumer;
  StateId state;
  bool cached = true;
};

struct OutputState {
  StateId state;
  bool persists = false;
  bool cached = true;
};

/// Producer to consumer edges through artifact versions, plus each
/// command's outputs.
class DepGraph {
 public:
  /// Idempotent; self edges are dropped.
  void add_edge(CmdRef producer, CmdRef consumer, StateId state, bool cached);
  void add_output(CmdRef c, StateId state, bool cached);
  void set_persists(const std::set<StateId>& persistent);

  const std::vector<DepEdge>& edges() const { return edges_; }
  const std::map<CmdRef, std::vector<OutputState>>& outputs() const { return outputs_; }
  std::set<StateId> inputs(CmdRef c) const;
  std::set<CmdRef> nodes() const;

 private:
  std::vector<DepEdge> edges_;
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint64_t>> seen_;
  std::map<CmdRef, std::vector<OutputState>> outputs_;
};

using RunSet = std::map<CmdRef, MarkReason>;

/// Strongly connected components of the graph restricted to uncached edges,
/// each sorted, in ascending order of their smallest member.
std::vector<std::vector<CmdRef>> find_clusters(const DepGraph& d);

/// Least fixpoint of the marking rules starting from r.
RunSet plan(const DepGraph& d, const RunSet& r);

}  // namespace tbld
