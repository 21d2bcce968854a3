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

#include "cascade/privacy_memory.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "json.hpp"

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

using nlohmann::ordered_json;

std::string to_string(PiiCategory c) {
  switch (c) {
    case PiiCategory::name: return "name";
    case PiiCategory::identifier: return "identifier";
    case PiiCategory::medical: return "medical";
    case PiiCategory::other: return "other";
  }
  return "other";
}

PiiCategory pii_category_from_string(const std::string& s) {
  if (s == "name") return PiiCategory::name;
  if (s == "identifier") return PiiCategory::identifier;
  if (s == "medical") return PiiCategory::medical;
  if (s == "other") return PiiCategory::other;
  throw ParseError("unknown PII category: '" + s + "'");
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (m == 0) return n;
  if (n == 0) return m;
  std::vector<std::size_t> prev(n + 1);
  std::vector<std::size_t> curr(n + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= m; ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
    }
    std::swap(prev, curr);
  }
  return prev[n];
}

double normalized_levenshtein(const std::string& a, const std::string& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) /
         static_cast<double>(longest);
}

namespace {

constexpr std::size_t kMaxNGram = 3;

void check_memory(const PrivateMemory& memory) {
  if (memory.match_threshold < 0.0 || memory.match_threshold >= 1.0) {
    throw ValidationError("match_threshold must lie in [0,1)");
  }
}

struct BestEntry {
  std::size_t index = 0;
  double distance = 2.0;  // above any valid normalized distance
};

BestEntry best_match(const std::string& phrase, const PrivateMemory& memory) {
  BestEntry best;
  for (std::size_t k = 0; k < memory.entries.size(); ++k) {
    const double d = normalized_levenshtein(phrase, memory.entries[k].token);
    if (d < best.distance) {
      best.distance = d;
      best.index = k;
    }
  }
  return best;
}

const char* placeholder_prefix(PiiCategory c) {
  switch (c) {
    case PiiCategory::name: return "NAME";
    case PiiCategory::identifier: return "ID";
    case PiiCategory::medical: return "MED";
    case PiiCategory::other: return "PII";
  }
  return "PII";
}

}  // namespace

std::vector<PrivacyMatch> detect_private_tokens(const std::string& query,
                                                const PrivateMemory& memory) {
  check_memory(memory);
  std::vector<PrivacyMatch> matches;
  if (memory.entries.empty()) return matches;

  const auto tokens = text::tokenize(query);
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (tokens[i].core_lower.empty()) {
      ++i;
      continue;
    }
    bool matched = false;
    const std::size_t max_n = std::min(kMaxNGram, tokens.size() - i);
    for (std::size_t n = max_n; n >= 1 && !matched; --n) {
      std::string phrase;
      bool usable = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (tokens[i + j].core_lower.empty()) {
          usable = false;
          break;
        }
        if (j > 0) phrase += ' ';
        phrase += tokens[i + j].core_lower;
      }
      if (!usable) continue;
      const BestEntry best = best_match(phrase, memory);
      if (best.distance <= memory.match_threshold) {
        PrivacyMatch m;
        m.begin = tokens[i].core_begin;
        m.end = tokens[i + n - 1].core_end;
        m.query_token = phrase;
        m.token_index = i;
        m.token_count = n;
        m.entry_index = best.index;
        m.distance = best.distance;
        matches.push_back(std::move(m));
        i += n;
        matched = true;
      }
    }
    if (!matched) ++i;
  }
  return matches;
}

MaskedQuery mask_query(const std::string& query, const PrivateMemory& memory,
                       const Record* record) {
  check_memory(memory);
  if (memory.entries.empty()) {
    throw ValidationError("mask_query requires a nonempty private memory");
  }

  const auto matches = detect_private_tokens(query, memory);
  MaskedQuery out;
  out.text.reserve(query.size());

  std::map<std::string, std::string> span_placeholder;
  std::map<PiiCategory, int> counters;

  std::size_t cursor = 0;
  for (const auto& m : matches) {
    out.text.append(query, cursor, m.begin - cursor);
    const std::string original = query.substr(m.begin, m.end - m.begin);
    auto it = span_placeholder.find(original);
    if (it == span_placeholder.end()) {
      const PiiCategory cat = memory.entries[m.entry_index].category;
      const int idx = ++counters[cat];
      std::string ph = std::string("[") + placeholder_prefix(cat) + "_" +
                       std::to_string(idx) + "]";
      it = span_placeholder.emplace(original, std::move(ph)).first;
    }
    Replacement rep;
    rep.original = original;
    rep.replacement = it->second;
    rep.position = out.text.size();
    out.text += it->second;
    out.replacements.push_back(std::move(rep));
    cursor = m.end;
  }
  out.text.append(query, cursor, std::string::npos);

  if (record != nullptr) {
    for (const auto& gold : record->private_tokens) {
      if (text::contains_phrase(out.text, gold)) {
        out.residual_private.push_back(gold);
      }
    }
  }
  return out;
}

PrivateMemory extend_memory(
    PrivateMemory memory,
    const std::vector<std::pair<std::string, PiiCategory>>& tokens) {
  for (const auto& [raw, category] : tokens) {
    const std::string token = text::lower(text::trim(raw));
    if (token.empty()) continue;
    const bool present =
        std::any_of(memory.entries.begin(), memory.entries.end(),
                    [&](const MemoryEntry& e) { return e.token == token; });
    if (!present) memory.entries.push_back({token, category});
  }
  return memory;
}

PrivateMemory load_memory(const std::string& path, double match_threshold) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open memory file: " + path);
  PrivateMemory memory;
  memory.match_threshold = match_threshold;
  check_memory(memory);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::string, PiiCategory>> staged;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      ordered_json j = ordered_json::parse(line);
      staged.emplace_back(
          j.at("token").get<std::string>(),
          pii_category_from_string(j.value("category", std::string("other"))));
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return extend_memory(std::move(memory), staged);
}

void save_memory(const PrivateMemory& memory, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write memory file: " + path);
  for (const auto& e : memory.entries) {
    ordered_json j;
    j["token"] = e.token;
    j["category"] = to_string(e.category);
    out << j.dump() << "\n";
  }
}

}  // namespace cascade
