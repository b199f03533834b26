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

#include "tbld/cache.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <vector>

namespace tbld {

namespace fs = std::filesystem;

namespace {

std::atomic<std::uint64_t> temp_counter{0};

fs::path temp_beside(const fs::path& p) {
  auto t = p;
  t += fmt::format(".tmp.{}.{}", ::getpid(), temp_counter.fetch_add(1));
  return t;
}

void write_atomically(const fs::path& dest, std::span<const std::uint8_t> bytes) {
  auto tmp = temp_beside(dest);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw CacheError(CacheError::Kind::kIo, fmt::format("cannot write {}", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, dest, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw CacheError(CacheError::Kind::kIo, fmt::format("cannot rename into {}", dest.string()));
  }
}

}  // namespace

fs::path ContentCache::path_for(const Digest& digest) const {
  auto hex = digest.hex();
  return dir_ / hex.substr(0, 2) / hex.substr(2, 2) / hex.substr(4, 2) / hex;
}

CacheKey ContentCache::store(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return CacheKey{empty_digest(), true};
  CacheKey key{digest_bytes(bytes), false};
  auto dest = path_for(key.digest);
  std::error_code ec;
  if (fs::exists(dest, ec)) return key;
  fs::create_directories(dest.parent_path(), ec);
  if (ec) throw CacheError(CacheError::Kind::kIo, fmt::format("cannot create {}", dest.parent_path().string()));
  write_atomically(dest, bytes);
  return key;
}

CacheKey ContentCache::store(std::string_view bytes) {
  return store(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

CacheKey ContentCache::store_file(const fs::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw CacheError(CacheError::Kind::kIo, fmt::format("cannot read {}", source.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return store(bytes);
}

bool ContentCache::contains(const Digest& digest) const {
  if (digest == empty_digest()) return true;
  std::error_code ec;
  return fs::is_regular_file(path_for(digest), ec);
}

void ContentCache::restore(const Digest& digest, const fs::path& dest) const {
  std::vector<std::uint8_t> bytes;
  if (digest != empty_digest()) {
    std::ifstream in(path_for(digest), std::ios::binary);
    if (!in) throw CacheError(CacheError::Kind::kMiss, fmt::format("cache miss for {}", digest.hex()));
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  write_atomically(dest, bytes);
}

std::size_t ContentCache::gc(const std::set<Digest>& live) {
  std::size_t removed = 0;
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) return 0;
  std::vector<fs::path> doomed;
  for (auto it = fs::recursive_directory_iterator(dir_, ec); it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (ec) break;
    if (!it->is_regular_file(ec)) continue;
    auto d = Digest::from_hex(it->path().filename().string());
    if (!d || !live.contains(*d)) doomed.push_back(it->path());
  }
  for (const auto& p : doomed) {
    if (fs::remove(p, ec)) ++removed;
  }
  // Prune empty prefix directories, deepest first.
  std::vector<fs::path> dirs;
  for (auto it = fs::recursive_directory_iterator(dir_, ec); it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (ec) break;
    if (it->is_directory(ec)) dirs.push_back(it->path());
  }
  std::sort(dirs.begin(), dirs.end(), [](const auto& a, const auto& b) {
    return a.native().size() > b.native().size();
  });
  for (const auto& d : dirs) {
    if (fs::is_empty(d, ec)) fs::remove(d, ec);
  }
  return removed;
}

}  // namespace tbld
