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

#include "tbld/engine.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <deque>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "tbld/trace_io.hpp"

namespace tbld {

namespace fs = std::filesystem;

namespace {

class StateLock {
 public:
  explicit StateLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      if (fd_ >= 0) ::close(fd_);
      throw BuildError(fmt::format("another build holds {}", path.string()));
    }
  }
  ~StateLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  StateLock(const StateLock&) = delete;
  StateLock& operator=(const StateLock&) = delete;

 private:
  int fd_ = -1;
};

std::set<std::string> hidden_names(const BuildOptions& opts) {
  std::set<std::string> hidden;
  std::error_code ec;
  auto rel = fs::relative(opts.state(), opts.root, ec);
  if (!ec && !rel.empty() && rel.begin()->string() != "..") hidden.insert(rel.begin()->string());
  return hidden;
}

std::vector<Statement> load_previous(const BuildOptions& opts) {
  if (opts.fresh) return {};
  try {
    return load_trace(opts.trace_path());
  } catch (const CodecError& e) {
    if (opts.log) *opts.log << "ignoring unreadable trace: " << e.what() << "\n";
    return {};
  }
}

std::string name_of(const PassResult& r, CmdRef c) {
  auto it = r.names.find(c);
  return it == r.names.end() ? fmt::format("c{}", c.id) : it->second;
}

void explain(const BuildOptions& opts, int phase, const PassResult& r, const RunSet& next) {
  if (!opts.explain || !opts.log) return;
  *opts.log << fmt::format("phase {}: traced {}, emulated {}\n", phase, r.traced.size(),
                           r.skipped.size());
  for (const auto& [c, why] : next) {
    *opts.log << fmt::format("  run {} ({})\n", name_of(r, c), reason_name(why));
  }
}

// Dry run: the first run set will run; whatever depends on it may.
void report_dry_run(const PassResult& r, const RunSet& run, BuildResult& out) {
  std::set<CmdRef> will, may;
  for (const auto& [c, why] : run) will.insert(c);
  std::map<CmdRef, std::vector<CmdRef>> next;
  for (const auto& e : r.graph.edges()) next[e.producer].push_back(e.consumer);
  for (const auto& s : r.trace) {
    if (const auto* l = std::get_if<stmt::Launch>(&s.body)) next[s.owner].push_back(l->child);
  }
  std::deque<CmdRef> work(will.begin(), will.end());
  while (!work.empty()) {
    CmdRef c = work.front();
    work.pop_front();
    for (CmdRef d : next[c]) {
      if (!will.count(d) && may.insert(d).second) work.push_back(d);
    }
  }
  for (CmdRef c : will) out.will_run.push_back(name_of(r, c));
  for (CmdRef c : may) out.may_run.push_back(name_of(r, c));
}

}  // namespace

std::set<Digest> live_digests(const std::vector<Statement>& trace) {
  std::set<Digest> live;
  for (const auto& s : trace) {
    const ContentState* c = nullptr;
    if (const auto* m = std::get_if<stmt::MatchContent>(&s.body)) c = &m->state;
    if (const auto* u = std::get_if<stmt::UpdateContent>(&s.body)) c = &u->state;
    if (c) {
      if (const auto* f = std::get_if<FileContent>(c)) live.insert(f->hash);
    }
  }
  return live;
}

BuildResult do_build(const BuildOptions& opts) {
  fs::create_directories(opts.state());
  StateLock lock(opts.state() / "lock");
  ContentCache cache(opts.cache_dir());
  const auto hidden = hidden_names(opts);

  BuildResult out;
  std::vector<Statement> trace = load_previous(opts);
  RunSet run;
  if (trace.empty()) {
    trace = seed_trace(opts.buildfile);
    run.emplace(CmdRef{1}, MarkReason::kChanged);
    if (opts.dry_run) {
      out.will_run.push_back(opts.buildfile);
      return out;
    }
  }

  Env env(opts.root, &cache, hidden);
  std::mt19937_64 rng(opts.seed ? *opts.seed : std::random_device{}());
  std::set<CmdRef> fresh;
  std::map<std::string, int> remarks;
  int phase = 0;
  std::int32_t root_exit = 0;

  for (;;) {
    while (true) {
      if (phase >= opts.max_phases) throw BuildError("the build does not reach a fixed point");
      env.sync();
      PassInput in;
      in.trace = &trace;
      in.run = run;
      in.fresh = fresh;
      in.rng = &rng;
      in.remarks = &remarks;
      in.console = opts.console;
      PassResult r = run_pass(env, cache, in);
      ++phase;
      out.stats.backtracked += r.backtracked;
      out.stats.cache_misses += r.cache_misses;
      out.stats.traced += r.traced.size();
      out.stats.skipped += r.skipped.size();
      for (CmdRef c : r.traced) out.traced.push_back(name_of(r, c));
      root_exit = r.root_exit;
      run = plan(r.graph, r.marked);
      if (opts.observer) opts.observer(phase, r, run);
      explain(opts, phase, r, run);
      if (opts.dry_run) {
        report_dry_run(r, run, out);
        out.stats.phases = static_cast<std::size_t>(phase);
        return out;
      }
      trace = std::move(r.trace);
      fresh = std::move(r.fresh);
      if (run.empty()) break;
    }
    try {
      env.commit_all();
      break;
    } catch (const UncommittableError& e) {
      // An emulated output has to exist but its bytes are gone.
      ++out.stats.cache_misses;
      if (!e.producer()) throw;
      run.emplace(*e.producer(), MarkReason::kUncachedOutput);
    }
  }

  if (out.stats.traced > 0) {
    env.sync();
    Env final_env(opts.root, &cache, hidden);
    PassInput in;
    in.trace = &trace;
    in.post = true;
    in.final_env = &final_env;
    in.rng = &rng;
    in.console = nullptr;
    PassResult r = run_pass(env, cache, in);
    ++phase;
    out.stats.post_anomaly = r.post_anomaly;
    if (opts.observer) opts.observer(phase, r, {});
    trace = std::move(r.trace);
  }

  out.stats.phases = static_cast<std::size_t>(phase);
  out.stats.versions_committed = env.disk_writes();
  out.stats.cache_hits = env.cache_restores();
  for (const auto& s : trace) {
    if (const auto* l = std::get_if<stmt::Launch>(&s.body)) {
      out.commands.push_back(l->command.command_line());
    }
  }
  write_trace(opts.trace_path(), trace);
  cache.gc(live_digests(trace));
  out.exit_code = root_exit == 0 ? 0 : 1;
  return out;
}

std::size_t collect_garbage(const BuildOptions& opts) {
  fs::create_directories(opts.state());
  StateLock lock(opts.state() / "lock");
  ContentCache cache(opts.cache_dir());
  return cache.gc(live_digests(load_previous(opts)));
}

}  // namespace tbld
