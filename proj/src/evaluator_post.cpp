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

// End-of-build partners for checks. A partner records what the same check
// would see once the whole build has finished.

#include "pass.hpp"

namespace tbld {

namespace {

std::string parent_of(const std::string& path) {
  auto slash = path.find_last_of('/');
  if (slash == std::string::npos) return ".";
  if (slash == 0) return "/";
  return path.substr(0, slash);
}

}  // namespace

void Pass::add_partner(const Statement& s) {
  if (!in_.final_env) return;
  Env& fin = *in_.final_env;
  const CmdRef o = s.owner;
  AccessFlags lookup;
  lookup.nofollow = true;

  // The artifact behind a ref, found by its location at the end of the build.
  auto at_end = [&](RefId ref) -> std::optional<ArtifactId> {
    auto a = usable(o, ref);
    if (!a) return std::nullopt;
    const ArtifactKind kind = env_->artifact(*a).kind;
    if (kind == ArtifactKind::kPipe || kind == ArtifactKind::kSpecial) return std::nullopt;
    auto path = env_->sandbox_path(*a);
    if (!path) return std::nullopt;
    Resolution r = fin.resolve(fin.root_dir(), *path, lookup, kToolCmd, true);
    if (r.code != ResultCode::kSuccess || fin.artifact(*r.artifact).kind != kind) {
      return std::nullopt;
    }
    return r.artifact;
  };

  std::optional<StatementBody> body;
  if (const auto* m = std::get_if<stmt::MatchContent>(&s.body)) {
    if (auto fa = at_end(m->ref)) body = stmt::MatchContent{m->ref, fin.current_content(*fa)};
  } else if (const auto* m = std::get_if<stmt::MatchMetadata>(&s.body)) {
    if (auto fa = at_end(m->ref)) body = stmt::MatchMetadata{m->ref, fin.current_metadata(*fa)};
  } else if (const auto* x = std::get_if<stmt::ExpectResult>(&s.body)) {
    auto rec = path_records_.find({o.id, x->ref.id});
    if (rec == path_records_.end()) return;
    const auto& [base_path, path, flags] = rec->second;
    Resolution base = fin.resolve(fin.root_dir(), base_path, AccessFlags{}, kToolCmd, true);
    if (base.code != ResultCode::kSuccess) return;
    AccessFlags f = flags;
    f.create = f.exclusive = f.truncate = false;
    Resolution r = fin.resolve(*base.artifact, path, f, kToolCmd, true);
    ResultCode code = r.code;
    if (code == ResultCode::kNoEnt && flags.create) {
      Resolution dir = fin.resolve(*base.artifact, parent_of(path), AccessFlags{}, kToolCmd, true);
      if (dir.code == ResultCode::kSuccess &&
          fin.artifact(*dir.artifact).kind == ArtifactKind::kDir) {
        code = ResultCode::kSuccess;
      }
    } else if (code == ResultCode::kSuccess && flags.create && flags.exclusive) {
      code = ResultCode::kExist;
    }
    body = stmt::ExpectResult{x->ref, code};
  }
  if (body) out_.push_back(Statement{o, Phase::kPostBuild, std::move(*body)});
}

}  // namespace tbld
