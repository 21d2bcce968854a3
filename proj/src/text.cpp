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

#include "cascade/text.hpp"

#include <cctype>

namespace cascade::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }

}  // namespace

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<TokenSpan> tokenize(std::string_view s) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    if (i >= s.size()) break;
    std::size_t begin = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    TokenSpan tok;
    tok.begin = begin;
    tok.end = i;
    std::size_t cb = begin;
    std::size_t ce = i;
    while (cb < ce && is_punct(s[cb])) ++cb;
    while (ce > cb && is_punct(s[ce - 1])) --ce;
    tok.core_begin = cb;
    tok.core_end = ce;
    tok.core_lower = lower(s.substr(cb, ce - cb));
    out.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> core_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(s)) {
    if (!tok.core_lower.empty()) out.push_back(tok.core_lower);
  }
  return out;
}

bool contains_phrase(std::string_view s, std::string_view phrase) {
  const std::vector<std::string> want = core_tokens(phrase);
  if (want.empty()) return false;
  const std::vector<std::string> have = core_tokens(s);
  if (have.size() < want.size()) return false;
  for (std::size_t i = 0; i + want.size() <= have.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < want.size(); ++j) {
      if (have[i + j] != want[j]) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace cascade::text
