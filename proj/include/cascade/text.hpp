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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cascade::text {

/// A whitespace-delimited token together with the character range of its
/// "core": the token with surrounding punctuation stripped. For "Alice,"
/// the core is "Alice" and core_begin/core_end bracket just those letters.
struct TokenSpan {
  std::size_t begin = 0;       // first char of the raw token
  std::size_t end = 0;         // one past the raw token
  std::size_t core_begin = 0;  // first char of the stripped core
  std::size_t core_end = 0;    // one past the stripped core
  std::string core_lower;      // stripped core, lowercased; may be empty
};

std::string lower(std::string_view s);
std::string trim(std::string_view s);

/// Splits on ASCII whitespace and strips leading/trailing punctuation from
/// each token. Pure-punctuation tokens are kept with an empty core so
/// positions stay aligned with the original text.
std::vector<TokenSpan> tokenize(std::string_view s);

/// Lowercased cores of tokenize(s), skipping empty cores.
std::vector<std::string> core_tokens(std::string_view s);

/// True iff `phrase` (one or more whitespace-separated words) occurs in `s`
/// as a contiguous run of whole core tokens, case-insensitively.
bool contains_phrase(std::string_view s, std::string_view phrase);

}  // namespace cascade::text
