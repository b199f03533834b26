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

// Random trace statements for codec tests.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tbld/traceir.hpp"

namespace tbld::testing {

/// One random statement of the given variant index.
Statement random_statement(std::mt19937_64& rng, std::size_t kind);

/// n statements cycling through every kind, so any n >= the number of
/// kinds covers them all.
std::vector<Statement> statement_corpus(std::mt19937_64& rng, std::size_t n);

}  // namespace tbld::testing
