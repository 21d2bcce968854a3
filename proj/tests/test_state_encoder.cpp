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

#include <limits>

#include "cascade/corpus.hpp"
#include "cascade/errors.hpp"
#include "cascade/state_encoder.hpp"

using namespace cascade;

namespace {

PrivateMemory memory_of(std::initializer_list<const char*> tokens,
                        double threshold = 0.2) {
  PrivateMemory m;
  m.match_threshold = threshold;
  for (const char* t : tokens) m.entries.push_back({t, PiiCategory::name});
  return m;
}

Generation gen_with(std::vector<double> logprobs) {
  Generation g;
  g.text = "x";
  g.token_logprobs = std::move(logprobs);
  return g;
}

}  // namespace

TEST_CASE("privacy features are all zero without matches") {
  const auto memory = memory_of({"zelda"});
  const Vector4 e = privacy_features("totally ordinary question", memory);
  CHECK(e.isZero());
}

TEST_CASE("privacy features on a ten-token query with two exact matches") {
  const auto memory = memory_of({"alice", "bob"}, 0.0);
  const std::string query =
      "alice asked bob for one more cup of coffee today";  // 10 tokens
  const Vector4 e = privacy_features(query, memory);
  CHECK(e[0] == doctest::Approx(0.2));
  CHECK(e[1] == doctest::Approx(1.0));
  CHECK(e[2] == doctest::Approx(0.2));
  CHECK(e[3] == doctest::Approx(1.0));
}

TEST_CASE("max similarity is one minus the best distance") {
  // lev("alicx","alice") = 1, normalized 1/5 = 0.2.
  const auto memory = memory_of({"alice"}, 0.2);
  const Vector4 e = privacy_features("alicx pays rent", memory);
  CHECK(e[1] == doctest::Approx(0.8));
  CHECK(e[3] == doctest::Approx(1.0));
}

TEST_CASE("quality features of a constant sequence") {
  EncoderConfig cfg;
  cfg.quantile_q = 0.1;
  const Vector4 e = quality_features(gen_with({-0.5, -0.5, -0.5, -0.5}), cfg);
  CHECK(e[0] == doctest::Approx(-0.5));
  CHECK(e[1] == doctest::Approx(-0.5));
  CHECK(e[3] == doctest::Approx(0.0));
}

TEST_CASE("nearest-rank quantile picks the documented element") {
  EncoderConfig cfg;
  cfg.quantile_q = 1.0 / 3.0;
  const Vector4 e = quality_features(gen_with({-0.1, -0.1, -3.0}), cfg);
  CHECK(e[1] == doctest::Approx(-3.0));
  CHECK(nearest_rank_quantile({-0.1, -0.1, -3.0}, 1.0 / 3.0) ==
        doctest::Approx(-3.0));
}

TEST_CASE("length feature saturates at the cap") {
  EncoderConfig cfg;
  cfg.length_cap = 20;
  const Vector4 e = quality_features(gen_with(std::vector<double>(40, -0.2)),
                                     cfg);
  CHECK(e[2] == doctest::Approx(1.0));
}

TEST_CASE("floor fraction counts tokens strictly below the floor") {
  EncoderConfig cfg;
  cfg.logprob_floor = -2.0;
  const Vector4 e = quality_features(gen_with({-0.5, -2.5, -3.0, -2.0}), cfg);
  CHECK(e[3] == doctest::Approx(0.5));
}

TEST_CASE("empty generation is rejected") {
  EncoderConfig cfg;
  CHECK_THROWS_AS(quality_features(gen_with({}), cfg), ValidationError);
}

TEST_CASE("encode_state concatenates in order") {
  const Vector4 zeros = Vector4::Zero();
  const Vector4 ones = Vector4::Ones();
  const State z = encode_state(zeros, zeros);
  CHECK(z.isZero());
  const State s = encode_state(ones, zeros);
  for (int i = 0; i < 4; ++i) CHECK(s[i] == doctest::Approx(1.0));
  for (int i = 4; i < 8; ++i) CHECK(s[i] == doctest::Approx(0.0));
}

TEST_CASE("encode_state rejects non-finite inputs") {
  Vector4 bad = Vector4::Zero();
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(encode_state(bad, Vector4::Zero()), ValidationError);
}

TEST_CASE("encoding a fixed record twice is deterministic") {
  const auto memory = memory_of({"alice"});
  const Generation g = gen_with({-0.4, -1.2, -0.8});
  EncoderConfig cfg;
  const State a = encode_state(privacy_features("alice pays", memory),
                               quality_features(g, cfg));
  const State b = encode_state(privacy_features("alice pays", memory),
                               quality_features(g, cfg));
  CHECK(a == b);
}

TEST_CASE("match count feature is monotone in matched tokens") {
  const auto memory = memory_of({"alice", "bob"}, 0.0);
  const Vector4 one = privacy_features("alice met carol today ok", memory);
  const Vector4 two = privacy_features("alice met bob today ok", memory);
  CHECK(two[0] >= one[0]);
}

TEST_CASE("any-match flag equals gold_private under full coverage at threshold zero") {
  SynthConfig cfg;
  cfg.n_records = 120;
  cfg.privacy_fraction = 0.5;
  cfg.lexicon = {"Alice", "Bob", "Carol", "Deshawn"};
  const Corpus corpus = generate_synthetic_corpus(cfg, 17);

  PrivateMemory memory;
  memory.match_threshold = 0.0;
  for (const auto& name : cfg.lexicon) {
    memory = extend_memory(std::move(memory), {{name, PiiCategory::name}});
  }
  for (const auto& rec : corpus.records) {
    const Vector4 e = privacy_features(rec.query, memory);
    CHECK(e[3] == doctest::Approx(rec.gold_private ? 1.0 : 0.0));
  }
}
