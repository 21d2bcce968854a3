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

#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "cascade/corpus.hpp"
#include "cascade/errors.hpp"
#include "test_support.hpp"

using namespace cascade;

namespace {

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << "\n";
}

SynthConfig small_config(int n, double privacy_fraction) {
  SynthConfig cfg;
  cfg.name = "unit";
  cfg.n_records = n;
  cfg.privacy_fraction = privacy_fraction;
  cfg.lexicon = {"Alice", "Bob", "Carol", "Deshawn", "Mara", "Yusuf"};
  return cfg;
}

// Independent re-implementation of the documented generator recipe, used
// to cross-check the privacy draw. Deliberately not the library's SplitMix64.
std::uint64_t ref_splitmix_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double ref_first_double(std::uint64_t seed) {
  std::uint64_t state = seed;
  return static_cast<double>(ref_splitmix_next(state) >> 11) *
         std::pow(2.0, -53);
}

}  // namespace

TEST_CASE("empty corpus file loads as empty corpus") {
  const std::string path = testsupport::temp_path("empty.jsonl");
  write_lines(path, {});
  const Corpus c = load_corpus(path);
  CHECK(c.records.empty());
}

TEST_CASE("single record line parses with derived privacy flag") {
  const std::string path = testsupport::temp_path("one.jsonl");
  write_lines(path,
              {R"({"id":"q1","query":"Alice owes $5","gold_answer":"5",)"
               R"("task":"qa","private_tokens":["Alice"],"gold_private":true})"});
  const Corpus c = load_corpus(path);
  REQUIRE(c.records.size() == 1);
  const Record& r = c.records[0];
  CHECK(r.id == "q1");
  CHECK(r.query == "Alice owes $5");
  CHECK(r.gold_answer == "5");
  CHECK(r.task == TaskKind::qa);
  CHECK(r.gold_private);
  CHECK_FALSE(r.difficulty.has_value());
}

TEST_CASE("private token missing from query is a validation error naming the id") {
  const std::string path = testsupport::temp_path("bad_token.jsonl");
  write_lines(path,
              {R"({"id":"q9","query":"Alice owes $5","gold_answer":"5",)"
               R"("task":"qa","private_tokens":["Bob"],"gold_private":true})"});
  CHECK_THROWS_WITH_AS(load_corpus(path),
                       doctest::Contains("q9"), ValidationError);
}

TEST_CASE("malformed line reports its line number") {
  const std::string path = testsupport::temp_path("malformed.jsonl");
  write_lines(path,
              {R"({"id":"a","query":"x","gold_answer":"1","task":"qa",)"
               R"("private_tokens":[],"gold_private":false})",
               "{not json"});
  CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains(":2:"),
                       ParseError);
}

TEST_CASE("gold_private must agree with private_tokens") {
  const std::string path = testsupport::temp_path("flag.jsonl");
  write_lines(path,
              {R"({"id":"a","query":"x","gold_answer":"1","task":"qa",)"
               R"("private_tokens":[],"gold_private":true})"});
  CHECK_THROWS_AS(load_corpus(path), ValidationError);
}

TEST_CASE("duplicate ids are rejected") {
  const std::string line =
      R"({"id":"a","query":"x","gold_answer":"1","task":"qa",)"
      R"("private_tokens":[],"gold_private":false})";
  const std::string path = testsupport::temp_path("dup.jsonl");
  write_lines(path, {line, line});
  CHECK_THROWS_AS(load_corpus(path), ValidationError);
}

TEST_CASE("corpus round-trips through save and load") {
  const Corpus c = generate_synthetic_corpus(small_config(50, 0.4), 11);
  const std::string path = testsupport::temp_path("roundtrip.jsonl");
  save_corpus(c, path);
  Corpus back = load_corpus(path);
  back.name = c.name;  // load uses the path as the name
  CHECK(back == c);
}

TEST_CASE("privacy_fraction zero yields no private records") {
  const Corpus c = generate_synthetic_corpus(small_config(100, 0.0), 5);
  REQUIRE(c.records.size() == 100);
  for (const auto& r : c.records) {
    CHECK_FALSE(r.gold_private);
    CHECK(r.private_tokens.empty());
  }
}

TEST_CASE("generation is a pure function of (config, seed)") {
  const SynthConfig cfg = small_config(64, 0.5);
  const Corpus a = generate_synthetic_corpus(cfg, 123);
  const Corpus b = generate_synthetic_corpus(cfg, 123);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(record_to_json_line(a.records[i]) ==
          record_to_json_line(b.records[i]));
  }
  const Corpus c = generate_synthetic_corpus(cfg, 124);
  CHECK(a.records != c.records);
}

TEST_CASE("privacy draw matches an independent re-run of the documented recipe") {
  const int n = 1000;
  const std::uint64_t seed = 7;
  const Corpus c = generate_synthetic_corpus(small_config(n, 0.5), seed);

  int expected = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t sub =
        seed + (static_cast<std::uint64_t>(i) + 1) * 0x9E3779B97F4A7C15ULL;
    if (ref_first_double(sub) < 0.5) ++expected;
  }
  int got = 0;
  for (const auto& r : c.records) {
    if (r.gold_private) ++got;
  }
  CHECK(got == expected);
  // 2/sqrt(n) band around the configured fraction.
  CHECK(std::abs(got / static_cast<double>(n) - 0.5) <=
        2.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("synthetic records validate and private names appear verbatim") {
  const Corpus c = generate_synthetic_corpus(small_config(200, 0.6), 99);
  for (const auto& r : c.records) {
    CHECK_NOTHROW(validate_record(r));
    if (r.gold_private) {
      CHECK(r.private_tokens.size() == 2);
      CHECK(r.query.find(r.private_tokens[0]) != std::string::npos);
    }
  }
}

TEST_CASE("empty lexicon with positive privacy fraction is a config error") {
  SynthConfig cfg = small_config(10, 0.5);
  cfg.lexicon.clear();
  CHECK_THROWS_AS(generate_synthetic_corpus(cfg, 1), ConfigError);
}

TEST_CASE("n_records below one is a config error") {
  CHECK_THROWS_AS(generate_synthetic_corpus(small_config(0, 0.0), 1),
                  ConfigError);
}
