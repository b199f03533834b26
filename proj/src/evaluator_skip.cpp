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

// Children of traced commands: matching a spawn against the previous trace
// and emulating the recorded subtree when nothing it depends on changed.

#include <algorithm>

#include "pass.hpp"

namespace tbld {

namespace {

bool temp_token(const std::string& t) {
  return t.rfind("tmp/", 0) == 0 || t.rfind("/tmp/", 0) == 0 ||
         t.find("/tmp/") != std::string::npos;
}

}  // namespace

std::vector<std::string> normalize_argv(const std::vector<std::string>& argv,
                                        std::vector<std::string>* temps) {
  std::vector<std::string> seen;
  std::vector<std::string> out;
  out.reserve(argv.size());
  for (const auto& a : argv) {
    if (!temp_token(a)) {
      out.push_back(a);
      continue;
    }
    auto it = std::find(seen.begin(), seen.end(), a);
    std::size_t k = static_cast<std::size_t>(it - seen.begin());
    if (it == seen.end()) seen.push_back(a);
    out.push_back("TMP" + std::to_string(k));
  }
  if (temps) *temps = std::move(seen);
  return out;
}

std::optional<std::uint32_t> Pass::find_candidate(const Command& cmd, TempMap& temps) {
  std::vector<std::string> new_temps;
  const auto norm = normalize_argv(cmd.argv, &new_temps);
  // A temp name already paired with another must keep that pairing.
  auto consistent = [&](const std::vector<std::string>& old_temps) {
    for (std::size_t k = 0; k < old_temps.size(); ++k) {
      auto a = st_.temp_new_to_old.find(new_temps[k]);
      if (a != st_.temp_new_to_old.end() && a->second != old_temps[k]) return false;
      auto b = st_.temp_old_to_new.find(old_temps[k]);
      if (b != st_.temp_old_to_new.end() && b->second != new_temps[k]) return false;
    }
    return true;
  };
  std::optional<std::uint32_t> best;
  std::vector<std::string> best_temps;
  for (std::uint32_t old : deferred_) {
    if (st_.claimed.count(old) || !has_exit_.count(old)) continue;
    const Command& oc = *commands_.at(old);
    if (oc.exe != cmd.exe || oc.env != cmd.env || oc.cwd != cmd.cwd || oc.root != cmd.root) {
      continue;
    }
    std::vector<std::string> old_temps;
    if (normalize_argv(oc.argv, &old_temps) != norm || !consistent(old_temps)) continue;
    if (!best || launch_pos_.at(old) < launch_pos_.at(*best)) {
      best = old;
      best_temps = std::move(old_temps);
    }
  }
  if (!best) return std::nullopt;
  temps.clear();
  for (std::size_t k = 0; k < best_temps.size(); ++k) {
    st_.temp_old_to_new[best_temps[k]] = new_temps[k];
    st_.temp_new_to_old[new_temps[k]] = best_temps[k];
    if (best_temps[k] != new_temps[k]) temps[best_temps[k]] = new_temps[k];
  }
  return best;
}

bool Pass::can_skip(std::uint32_t old, const Command& cmd, CmdRef parent) {
  for (const auto& [fd, ref] : cmd.initial_fds) {
    if (!env_->has_ref(parent, ref)) return false;
    const RefEntry& e = env_->ref(parent, ref);
    if (e.artifact && env_->artifact(*e.artifact).kind == ArtifactKind::kPipe) return false;
  }
  for (std::uint32_t m : subtree(old)) {
    if (in_.run.count(CmdRef{m}) || !has_exit_.count(m)) return false;
    for (std::size_t i : stmts_of_[m]) {
      const auto* u = std::get_if<stmt::UpdateContent>(&old_[i].body);
      if (!u) continue;
      const auto* f = std::get_if<FileContent>(&u->state);
      if (f && f->size > 0 && !cache_.contains(f->hash)) return false;
    }
  }
  return true;
}

bool Pass::echo_subtree(std::uint32_t old, const TempMap& temps) {
  const auto members = subtree(old);
  std::vector<std::size_t> idx;
  for (std::uint32_t m : members) {
    const auto& v = stmts_of_[m];
    idx.insert(idx.end(), v.begin(), v.end());
  }
  std::sort(idx.begin(), idx.end());
  for (std::size_t i : idx) echo(i, &temps);
  for (std::uint32_t m : members) {
    CmdRef c{map_id(m)};
    if ((st_.pre.count(c) && st_.post.count(c)) || st_.marks.count(c)) return false;
  }
  return true;
}

SpawnOutcome Pass::spawn(CmdRef parent, const Command& cmd) {
  CmdRef child{st_.next_id++};
  Statement ls = make_stmt(parent, stmt::Launch{child, cmd});
  st_.names[child] = cmd.command_line();
  eval(ls, true, std::nullopt);
  out_.push_back(ls);

  TempMap temps;
  if (auto cand = find_candidate(cmd, temps)) {
    st_.claimed.insert(*cand);
    st_.ids[*cand] = child.id;
    if (can_skip(*cand, cmd, parent)) {
      Env env_before = *env_;
      PassState st_before = st_;
      std::set<CmdRef> fresh_before = prior_fresh_;
      const std::size_t out_before = out_.size();
      if (in_.fresh.count(CmdRef{*cand})) {
        prior_fresh_.insert(child);
        st_.fresh.insert(child);
      }
      if (echo_subtree(*cand, temps)) {
        st_.skipped.push_back(child);
        return SpawnOutcome{child, st_.exit_codes.at(child.id)};
      }
      // Something the recorded run depended on differs: run it for real.
      *env_ = std::move(env_before);
      st_ = std::move(st_before);
      prior_fresh_ = std::move(fresh_before);
      out_.resize(out_before);
    }
  }
  st_.fresh.insert(child);
  traced_.push_back(child);
  return SpawnOutcome{child, std::nullopt};
}

}  // namespace tbld
