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

// Planner, codec and path resolution checks that need no build.

#include <malloc.h>

#include <chrono>
#include <cstdlib>
#include <new>
#include <random>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/format.h>

#include "acceptance.hpp"
#include "corpus.hpp"
#include "graphs.hpp"
#include "resolve_oracle.hpp"
#include "tbld/trace_io.hpp"
#include "testutil.hpp"

// Heap accounting for the reader memory check. Every allocation in the
// binary goes through here.
namespace {
std::size_t g_live = 0;
std::size_t g_peak = 0;
}  // namespace

void* operator new(std::size_t n) {
  void* p = std::malloc(n == 0 ? 1 : n);
  if (!p) throw std::bad_alloc();
  g_live += malloc_usable_size(p);
  if (g_live > g_peak) g_peak = g_live;
  return p;
}

void operator delete(void* p) noexcept {
  if (!p) return;
  g_live -= malloc_usable_size(p);
  std::free(p);
}

void operator delete(void* p, std::size_t) noexcept { operator delete(p); }

namespace tbld::acceptance {

namespace {

std::set<CmdRef> keys(const RunSet& r) {
  std::set<CmdRef> out;
  for (const auto& [c, why] : r) out.insert(c);
  return out;
}

// Bytes of heap the reader holds at its worst while streaming a trace of n
// statements.
std::size_t reader_peak(const testing::Project& dir, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto path = dir.root() / fmt::format("trace{}", n);
  {
    TraceWriter w(path);
    for (std::size_t i = 0; i < n; ++i) {
      w.write(testing::random_statement(rng, i % std::variant_size_v<StatementBody>));
    }
    w.commit();
  }
  const std::size_t base = g_live;
  g_peak = g_live;
  std::size_t read = 0;
  {
    TraceReader r(path);
    while (r.next()) ++read;
  }
  if (read != n) throw std::runtime_error("reader returned the wrong number of statements");
  return g_peak - base;
}

}  // namespace

Outcome planner_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(8);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    auto g = testing::random_graph(rng, 12);
    if (keys(plan(g.graph, g.initial)) != testing::naive_plan(g.graph, g.initial)) ++bad;
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {bad == 0 && s < 10, fmt::format("1000 graphs, {} differ, {:.2f} s", bad, s)};
}

Outcome codec() {
  std::mt19937_64 rng(12);
  const auto corpus = testing::statement_corpus(rng, 50 * std::variant_size_v<StatementBody>);
  std::set<std::size_t> kinds;
  for (const auto& s : corpus) kinds.insert(s.body.index());
  std::stringstream bytes;
  for (const auto& s : corpus) encode_statement(s, bytes);
  StatementDecoder d(bytes);
  std::size_t same = 0, total = 0;
  while (auto s = d.next()) {
    if (total < corpus.size() && *s == corpus[total]) ++same;
    ++total;
  }
  const bool round_trip = kinds.size() == std::variant_size_v<StatementBody> &&
                          same == corpus.size() && total == corpus.size();

  testing::Project dir;
  const std::size_t small = reader_peak(dir, 10, 1);
  const std::size_t large = reader_peak(dir, 10000, 1);
  const double ratio = static_cast<double>(std::max(small, large)) /
                       static_cast<double>(std::max<std::size_t>(1, std::min(small, large)));
  return {round_trip && ratio <= 2.0,
          fmt::format("{} of {} statements over {} kinds round-trip; reader peak {} B for 10, {} B "
                      "for 10000 ({:.2f}x)",
                      same, corpus.size(), kinds.size(), small, large, ratio)};
}

Outcome resolve_oracle() {
  int cases = 0, symlinks = 0, exclusive = 0;
  std::vector<std::string> mismatches;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto r = testing::run_resolve_oracle(seed, 200);
    cases += r.cases;
    symlinks += r.symlink_cases;
    exclusive += r.exclusive_cases;
    mismatches.insert(mismatches.end(), r.mismatches.begin(), r.mismatches.end());
  }
  Outcome o;
  o.pass = cases >= 500 && symlinks > 0 && exclusive > 0 && mismatches.empty();
  o.detail = fmt::format("{} cases, {} through symlinks, {} exclusive creates, {} mismatches",
                         cases, symlinks, exclusive, mismatches.size());
  if (!mismatches.empty()) o.detail += "; first " + mismatches.front();
  return o;
}

}  // namespace tbld::acceptance
