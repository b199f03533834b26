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

#include <sys/stat.h>

#include <gtest/gtest.h>

#include "resolve_oracle.hpp"
#include "tbld/fsmodel.hpp"
#include "testutil.hpp"

namespace tbld {
namespace {

const CmdRef kActor{1};

TEST(Resolve, AgreesWithTheKernel) {
  for (std::uint64_t seed : {1234u, 99u, 7u, 31337u, 2u, 1000003u}) {
    auto rep = testing::run_resolve_oracle(seed, 1500);
    EXPECT_EQ(rep.cases, 1500);
    EXPECT_GT(rep.symlink_cases, 50);
    EXPECT_GT(rep.exclusive_cases, 50);
    for (const auto& m : rep.mismatches) ADD_FAILURE() << m;
  }
}

TEST(Resolve, ReportsTraversedDirectories) {
  testing::Project p;
  p.write("a/b/f", "x");
  Env env(p.root(), nullptr);
  auto r = env.resolve(env.root_dir(), "a/b/f", AccessFlags{.read = true}, kActor, true);
  ASSERT_EQ(r.code, ResultCode::kSuccess);
  EXPECT_EQ(r.traversed.size(), 3u);
  EXPECT_EQ(env.sandbox_path(*r.artifact), "a/b/f");
}

TEST(Resolve, HiddenStateDirCannotBeCreated) {
  testing::Project p;
  Env env(p.root(), nullptr, {".tbld"});
  auto r = env.resolve(env.root_dir(), ".tbld", AccessFlags{.write = true, .create = true},
                       kActor, false);
  EXPECT_EQ(r.code, ResultCode::kAccess);
}

TEST(Model, UncommittedStateWinsOverDisk) {
  testing::Project p;
  p.write("f", "disk");
  ContentCache cache(p.root() / ".cache");
  Env env(p.root(), &cache);
  auto r = env.resolve(env.root_dir(), "f", AccessFlags{.write = true}, kActor, false);
  ASSERT_EQ(r.code, ResultCode::kSuccess);
  auto key = cache.store(std::string_view("model"));
  FileContent fc{key.digest, 5, 0, true};
  ASSERT_TRUE(env.apply_content(*r.artifact, fc, kActor, false));
  EXPECT_TRUE(env.match_content(*r.artifact, fc));
  EXPECT_EQ(p.read("f"), "disk");
  EXPECT_TRUE(env.has_uncommitted());
  env.commit_all();
  EXPECT_EQ(p.read("f"), "model");
  EXPECT_FALSE(env.has_uncommitted());
}

TEST(Model, CommitCreatesNestedDirectories) {
  testing::Project p;
  ContentCache cache(p.root() / ".cache");
  Env env(p.root(), &cache, {".cache"});
  // mkdir a; mkdir a/b; echo hi > a/b/f, all emulated.
  ArtifactId a = env.new_dir(kActor, false);
  ASSERT_FALSE(env.add_entry(env.root_dir(), "a", a, kActor, false));
  ArtifactId b = env.new_dir(kActor, false);
  ASSERT_FALSE(env.add_entry(a, "b", b, kActor, false));
  auto r = env.resolve(env.root_dir(), "a/b/f", AccessFlags{.write = true, .create = true},
                       kActor, false);
  ASSERT_EQ(r.code, ResultCode::kSuccess);
  auto key = cache.store(std::string_view("hi\n"));
  env.apply_content(*r.artifact, FileContent{key.digest, 3, 0, true}, kActor, false);
  EXPECT_FALSE(p.exists("a"));

  // Committing the deepest artifact has to bring its parents along.
  env.commit(*r.artifact);
  EXPECT_EQ(p.read("a/b/f"), "hi\n");
  EXPECT_EQ(env.disk_writes() > 0, true);
}

TEST(Model, CommitRestoresRemovedEntries) {
  testing::Project p;
  p.write("gone", "x");
  p.write("kept", "y");
  Env env(p.root(), nullptr);
  auto r = env.resolve(env.root_dir(), "gone", AccessFlags{.nofollow = true}, kActor, true);
  ASSERT_EQ(r.code, ResultCode::kSuccess);
  EXPECT_FALSE(env.remove_entry(env.root_dir(), "gone", *r.artifact, kActor, false));
  EXPECT_EQ(env.list(env.root_dir()), (std::vector<std::string>{"kept"}));
  EXPECT_TRUE(p.exists("gone"));
  env.commit_all();
  EXPECT_FALSE(p.exists("gone"));
  EXPECT_TRUE(p.exists("kept"));
}

TEST(Model, UncachedContentIsUncommittable) {
  testing::Project p;
  ContentCache cache(p.root() / ".cache");
  Env env(p.root(), &cache, {".cache"});
  auto r = env.resolve(env.root_dir(), "out", AccessFlags{.write = true, .create = true},
                       CmdRef{7}, false);
  ASSERT_EQ(r.code, ResultCode::kSuccess);
  env.apply_content(*r.artifact, FileContent{digest_string("never stored"), 12, 0, false},
                    CmdRef{7}, false);
  EXPECT_FALSE(env.committable(*r.artifact));
  try {
    env.commit_all();
    FAIL() << "expected UncommittableError";
  } catch (const UncommittableError& e) {
    ASSERT_TRUE(e.producer().has_value());
    EXPECT_EQ(*e.producer(), CmdRef{7});
  }
}

TEST(Model, SyncDropsUncommittedVersions) {
  testing::Project p;
  p.write("f", "disk");
  ContentCache cache(p.root() / ".cache");
  Env env(p.root(), &cache, {".cache"});
  auto r = env.resolve(env.root_dir(), "f", AccessFlags{.write = true}, kActor, false);
  auto key = cache.store(std::string_view("model"));
  env.apply_content(*r.artifact, FileContent{key.digest, 5, 0, true}, kActor, false);
  env.sync();
  auto again = env.resolve(env.root_dir(), "f", AccessFlags{.read = true}, kActor, true);
  ASSERT_EQ(again.code, ResultCode::kSuccess);
  auto c = env.current_content(*again.artifact);
  EXPECT_EQ(std::get<FileContent>(c).hash, digest_string("disk"));
}

TEST(Model, PipeWritesAreConsumedOnce) {
  testing::Project p;
  Env env(p.root(), nullptr);
  ArtifactId pipe = env.new_pipe();
  env.apply_content(pipe, PipeContent{PipeOp::kWrite, 0}, CmdRef{2}, true);
  env.apply_content(pipe, PipeContent{PipeOp::kWrite, 1}, CmdRef{2}, true);
  EXPECT_EQ(env.consume_pipe(pipe).size(), 2u);
  EXPECT_TRUE(env.consume_pipe(pipe).empty());
}

}  // namespace
}  // namespace tbld
