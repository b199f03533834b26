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

#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <stdexcept>
#include <string>

#include "tbld/digest.hpp"

namespace tbld {

/// Key of a cached byte sequence. Empty content is never stored; its key is
/// marked recreatable.
struct CacheKey {
  Digest digest;
  bool recreatable = false;

  std::string hex() const { return digest.hex(); }
  auto operator<=>(const CacheKey&) const = default;
};

class CacheError : public std::runtime_error {
 public:
  enum class Kind { kMiss, kIo };
  CacheError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Content-addressed file store laid out as cache/<h0h1>/<h2h3>/<h4h5>/<hex>.
/// store/restore may run concurrently; gc needs exclusive access.
class ContentCache {
 public:
  explicit ContentCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  CacheKey store(std::span<const std::uint8_t> bytes);
  CacheKey store(std::string_view bytes);
  CacheKey store_file(const std::filesystem::path& source);

  /// True if restore(digest) would succeed.
  bool contains(const Digest& digest) const;

  /// Writes exactly the cached bytes to dest (atomically). Throws kMiss if
  /// the key is unknown.
  void restore(const Digest& digest, const std::filesystem::path& dest) const;

  /// Removes every cached file whose key is not live, then prunes empty
  /// prefix directories. Returns the number of files removed.
  std::size_t gc(const std::set<Digest>& live);

  std::filesystem::path path_for(const Digest& digest) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace tbld
