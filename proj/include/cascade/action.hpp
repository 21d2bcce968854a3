// Copyright 2026 The Privacy Cascade Authors.
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

namespace cascade {

/// The deferral agent's three actions, in fixed sampling order.
enum class Action : int {
  keep_local = 0,  // a1: return the local answer
  defer = 1,       // a2: send the raw query to the server
  mask_defer = 2,  // a3: mask private tokens, then send to the server
};

constexpr int kNumActions = 3;

/// Short code used in logs and episode CSVs ("a1" / "a2" / "a3").
std::string action_code(Action a);

/// Wire name used by the gateway ("local" / "defer" / "mask_defer").
std::string action_wire_name(Action a);

}  // namespace cascade
