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

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace tbld {

/// 256-bit content digest. Equal digests mean identical content.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  static std::optional<Digest> from_hex(std::string_view hex);

  auto operator<=>(const Digest&) const = default;
};

Digest digest_bytes(std::span<const std::uint8_t> data);
Digest digest_string(std::string_view data);

/// Hashes a file on disk. Returns nullopt if it cannot be read.
std::optional<Digest> digest_file(const std::filesystem::path& path);

/// Digest of the empty byte sequence.
const Digest& empty_digest();

}  // namespace tbld
