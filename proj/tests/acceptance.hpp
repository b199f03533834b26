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

#include <string>

namespace tbld::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Random projects: consistency against clean builds, no-op rebuilds and
// the pipe rule, all from one set of trials.
struct RandomOutcomes {
  Outcome consistency;
  Outcome noop;
  Outcome pipes;
};
RandomOutcomes random_trials(int trials);

Outcome compile_add_source();
Outcome compile_comment_edit();
Outcome restore_deleted_object();
Outcome redirect_short_circuit();
Outcome pipe_cycle();
Outcome planner_oracle();
Outcome exit_backtracking();
Outcome generated_header();
Outcome codec();
Outcome resolve_oracle();

}  // namespace tbld::acceptance
