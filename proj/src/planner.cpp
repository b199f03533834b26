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

#include "tbld/planner.hpp"

#include <algorithm>
#include <deque>

namespace tbld {

const char* reason_name(MarkReason r) {
  switch (r) {
    case MarkReason::kChanged:
      return "changed";
    case MarkReason::kUncachedOutput:
      return "uncached-persistent-output";
    case MarkReason::kUncachedProducer:
      return "uncached-producer";
    case MarkReason::kUncachedConsumer:
      return "uncached-consumer";
    case MarkReason::kCluster:
      return "cluster-member";
  }
  return "?";
}

void DepGraph::add_edge(CmdRef producer, CmdRef consumer, StateId state, bool cached) {
  if (producer == consumer) return;
  if (!seen_.emplace(producer.id, consumer.id, state.id).second) return;
  edges_.push_back(DepEdge{producer, consumer, state, cached});
}

void DepGraph::add_output(CmdRef c, StateId state, bool cached) {
  auto& outs = outputs_[c];
  for (auto& o : outs) {
    if (o.state == state) return;
  }
  outs.push_back(OutputState{state, false, cached});
}

void DepGraph::set_persists(const std::set<StateId>& persistent) {
  for (auto& [c, outs] : outputs_) {
    for (auto& o : outs) o.persists = persistent.count(o.state) > 0;
  }
}

std::set<StateId> DepGraph::inputs(CmdRef c) const {
  std::set<StateId> in;
  for (const auto& e : edges_) {
    if (e.consumer == c) in.insert(e.state);
  }
  return in;
}

std::set<CmdRef> DepGraph::nodes() const {
  std::set<CmdRef> n;
  for (const auto& e : edges_) {
    n.insert(e.producer);
    n.insert(e.consumer);
  }
  for (const auto& [c, outs] : outputs_) n.insert(c);
  return n;
}

namespace {

using Adjacency = std::map<CmdRef, std::vector<CmdRef>>;

Adjacency uncached_successors(const DepGraph& d) {
  Adjacency adj;
  for (const auto& e : d.edges()) {
    if (!e.cached) adj[e.producer].push_back(e.consumer);
  }
  for (auto& [c, v] : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return adj;
}

}  // namespace

std::vector<std::vector<CmdRef>> find_clusters(const DepGraph& d) {
  // Iterative Tarjan.
  Adjacency adj = uncached_successors(d);
  std::set<CmdRef> nodes = d.nodes();
  std::map<CmdRef, int> index, low;
  std::set<CmdRef> on_stack;
  std::vector<CmdRef> stack;
  std::vector<std::vector<CmdRef>> out;
  int next = 0;

  struct Frame {
    CmdRef node;
    std::size_t child;
  };
  for (CmdRef start : nodes) {
    if (index.count(start)) continue;
    std::vector<Frame> frames{{start, 0}};
    index[start] = low[start] = next++;
    stack.push_back(start);
    on_stack.insert(start);
    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto& succ = adj[f.node];
      if (f.child < succ.size()) {
        CmdRef w = succ[f.child++];
        if (!index.count(w)) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack.insert(w);
          frames.push_back({w, 0});
        } else if (on_stack.count(w)) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      CmdRef v = f.node;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[v]);
      if (low[v] == index[v]) {
        std::vector<CmdRef> comp;
        CmdRef w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack.erase(w);
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunSet plan(const DepGraph& d, const RunSet& r) {
  RunSet marked = r;
  std::deque<CmdRef> work;
  for (const auto& [c, why] : r) work.push_back(c);
  auto mark = [&](CmdRef c, MarkReason why) {
    if (marked.emplace(c, why).second) work.push_back(c);
  };

  for (const auto& [c, outs] : d.outputs()) {
    for (const auto& o : outs) {
      if (o.persists && !o.cached) mark(c, MarkReason::kUncachedOutput);
    }
  }

  Adjacency succ = uncached_successors(d);
  Adjacency pred;
  for (const auto& [p, cs] : succ) {
    for (CmdRef c : cs) pred[c].push_back(p);
  }
  std::map<CmdRef, const std::vector<CmdRef>*> cluster_of;
  auto clusters = find_clusters(d);
  for (const auto& k : clusters) {
    if (k.size() < 2) continue;
    for (CmdRef c : k) cluster_of[c] = &k;
  }

  while (!work.empty()) {
    CmdRef c = work.front();
    work.pop_front();
    if (auto it = succ.find(c); it != succ.end()) {
      for (CmdRef consumer : it->second) mark(consumer, MarkReason::kUncachedConsumer);
    }
    if (auto it = pred.find(c); it != pred.end()) {
      for (CmdRef producer : it->second) mark(producer, MarkReason::kUncachedProducer);
    }
    if (auto it = cluster_of.find(c); it != cluster_of.end()) {
      for (CmdRef m : *it->second) mark(m, MarkReason::kCluster);
    }
  }
  return marked;
}

}  // namespace tbld
