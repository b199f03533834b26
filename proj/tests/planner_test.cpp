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

#include "graphs.hpp"
#include "tbld/planner.hpp"

namespace tbld {
namespace {

std::set<CmdRef> keys(const RunSet& r) {
  std::set<CmdRef> out;
  for (const auto& [c, why] : r) out.insert(c);
  return out;
}

DepGraph chain(bool cached) {
  DepGraph d;
  d.add_output(CmdRef{1}, StateId{10}, cached);
  d.add_edge(CmdRef{1}, CmdRef{2}, StateId{10}, cached);
  return d;
}

TEST(Plan, UncachedTempPullsInConsumer) {
  RunSet r{{CmdRef{1}, MarkReason::kChanged}};
  auto out = plan(chain(false), r);
  EXPECT_EQ(keys(out), (std::set<CmdRef>{CmdRef{1}, CmdRef{2}}));
  EXPECT_EQ(out.at(CmdRef{2}), MarkReason::kUncachedConsumer);
  EXPECT_EQ(keys(plan(chain(true), r)), (std::set<CmdRef>{CmdRef{1}}));
}

TEST(Plan, UncachedInputPullsInProducer) {
  RunSet r{{CmdRef{2}, MarkReason::kChanged}};
  auto out = plan(chain(false), r);
  EXPECT_EQ(out.at(CmdRef{1}), MarkReason::kUncachedProducer);
  EXPECT_EQ(keys(plan(chain(true), r)), (std::set<CmdRef>{CmdRef{2}}));
}

TEST(Plan, PersistentUncachedOutputRuns) {
  DepGraph d;
  d.add_output(CmdRef{4}, StateId{1}, false);
  d.add_output(CmdRef{5}, StateId{2}, false);
  d.add_output(CmdRef{6}, StateId{3}, true);
  d.set_persists({StateId{1}, StateId{3}});
  auto out = plan(d, {});
  EXPECT_EQ(keys(out), (std::set<CmdRef>{CmdRef{4}}));
  EXPECT_EQ(out.at(CmdRef{4}), MarkReason::kUncachedOutput);
}

TEST(Plan, EmptyStaysEmpty) {
  EXPECT_TRUE(plan(chain(true), {}).empty());
  EXPECT_TRUE(plan(chain(false), {}).empty());
}

TEST(Clusters, AcyclicGraphIsSingletons) {
  DepGraph d;
  for (std::uint32_t i = 1; i < 6; ++i) d.add_edge(CmdRef{i}, CmdRef{i + 1}, StateId{i}, false);
  for (const auto& k : find_clusters(d)) EXPECT_EQ(k.size(), 1u);
}

TEST(Clusters, PipeCycleIsOneCluster) {
  DepGraph d;
  d.add_edge(CmdRef{1}, CmdRef{2}, StateId{1}, false);
  d.add_edge(CmdRef{2}, CmdRef{1}, StateId{2}, false);
  d.add_edge(CmdRef{2}, CmdRef{3}, StateId{3}, true);
  d.add_edge(CmdRef{3}, CmdRef{2}, StateId{4}, true);
  auto ks = find_clusters(d);
  ASSERT_EQ(ks.size(), 2u);
  EXPECT_EQ(ks[0], (std::vector<CmdRef>{CmdRef{1}, CmdRef{2}}));
  EXPECT_EQ(ks[1], (std::vector<CmdRef>{CmdRef{3}}));
}

TEST(Clusters, MatchTransitiveClosure) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 500; ++t) {
    auto g = testing::random_graph(rng, 12);
    std::set<std::set<CmdRef>> want, got;
    for (const auto& k : testing::naive_clusters(g.graph)) want.insert(k);
    for (const auto& k : find_clusters(g.graph)) got.insert(std::set<CmdRef>(k.begin(), k.end()));
    ASSERT_EQ(got, want) << "trial " << t;
  }
}

TEST(Plan, MatchesNaiveFixpoint) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    auto g = testing::random_graph(rng, 12);
    ASSERT_EQ(keys(plan(g.graph, g.initial)), testing::naive_plan(g.graph, g.initial))
        << "trial " << t;
  }
}

TEST(Plan, ClustersAreAtomic) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 500; ++t) {
    auto g = testing::random_graph(rng, 12);
    auto r = keys(plan(g.graph, g.initial));
    for (const auto& k : find_clusters(g.graph)) {
      std::size_t in = 0;
      for (CmdRef c : k) in += r.count(c);
      ASSERT_TRUE(in == 0 || in == k.size()) << "trial " << t;
    }
  }
}

TEST(Plan, Monotone) {
  std::mt19937_64 rng(78);
  for (int t = 0; t < 300; ++t) {
    auto g = testing::random_graph(rng, 12);
    auto base = keys(plan(g.graph, g.initial));
    RunSet more = g.initial;
    more.emplace(CmdRef{static_cast<std::uint32_t>(1 + rng() % g.nodes)}, MarkReason::kChanged);
    auto bigger = keys(plan(g.graph, more));
    for (CmdRef c : base) ASSERT_TRUE(bigger.count(c)) << "trial " << t;
    // Planning a plan changes nothing.
    ASSERT_EQ(keys(plan(g.graph, plan(g.graph, g.initial))), base);
  }
}

}  // namespace
}  // namespace tbld
