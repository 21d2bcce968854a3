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
#include <optional>
#include <string>
#include <vector>

#include "cascade/corpus.hpp"

namespace cascade {

enum class PiiCategory { name, identifier, medical, other };

std::string to_string(PiiCategory c);
PiiCategory pii_category_from_string(const std::string& s);

struct MemoryEntry {
  std::string token;  // stored lowercase; may be a multi-word phrase
  PiiCategory category = PiiCategory::other;

  bool operator==(const MemoryEntry&) const = default;
};

/// Growing store of known private tokens. Detection compares query tokens
/// (and token n-grams up to length 3, for multi-word entries) against every
/// entry by normalized Levenshtein distance; anything at distance <=
/// match_threshold counts as private.
struct PrivateMemory {
  std::vector<MemoryEntry> entries;
  double match_threshold = 0.2;
};

/// One detected private span inside a query.
struct PrivacyMatch {
  std::size_t begin = 0;        // char offset of the matched span's start
  std::size_t end = 0;          // one past the span's end
  std::string query_token;      // lowercased core text of the span
  std::size_t token_index = 0;  // index of the first covered query token
  std::size_t token_count = 1;  // covered query tokens (1..3)
  std::size_t entry_index = 0;  // winning memory entry
  double distance = 0.0;        // normalized Levenshtein to that entry
};

struct Replacement {
  std::string original;     // exact original span text
  std::string replacement;  // placeholder it became
  std::size_t position;     // char offset of the placeholder in masked text
};

struct MaskedQuery {
  std::string text;
  std::vector<Replacement> replacements;
  // Gold private tokens still present after masking; only populated when a
  // Record with annotations was supplied.
  std::vector<std::string> residual_private;
};

/// lev(a, b) / max(|a|, |b|); 0 when both empty. Symmetric, 0 iff a == b,
/// always in [0, 1].
double normalized_levenshtein(const std::string& a, const std::string& b);

/// Raw edit distance (insert/delete/substitute, unit costs).
std::size_t levenshtein(const std::string& a, const std::string& b);

/// Scans the query left to right, preferring longer n-grams (3, 2, 1) at
/// each position; a span matches when its best entry distance is within
/// memory.match_threshold, ties broken by memory order. Matches are
/// reported in query position order and never overlap.
std::vector<PrivacyMatch> detect_private_tokens(const std::string& query,
                                                const PrivateMemory& memory);

/// Replaces every detected span with a typed placeholder ([NAME_1], [ID_1],
/// [MED_1], [PII_1]); identical original spans share one placeholder.
/// Non-matched text, ordering, and punctuation are untouched. Splicing each
/// replacement's original back over its placeholder (in reverse order)
/// reconstructs the query exactly.
MaskedQuery mask_query(const std::string& query, const PrivateMemory& memory,
                       const Record* record = nullptr);

/// Appends new tokens (lowercased); entries already present are ignored.
PrivateMemory extend_memory(
    PrivateMemory memory,
    const std::vector<std::pair<std::string, PiiCategory>>& tokens);

/// Memory file I/O: JSONL of {"token": ..., "category": ...}.
PrivateMemory load_memory(const std::string& path, double match_threshold);
void save_memory(const PrivateMemory& memory, const std::string& path);

}  // namespace cascade
