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

#include <string>

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/scoring.hpp"

using namespace cascade;

namespace {

EpisodeOutcome outcome_of(const std::string& id, Action action, bool sent,
                          int leaked, int total, double quality,
                          double reward) {
  EpisodeOutcome o;
  o.record_id = id;
  o.action = action;
  o.sent_to_server = sent;
  o.leaked_tokens = leaked;
  o.total_private_tokens = total;
  o.quality = quality;
  o.reward = reward;
  return o;
}

Record record_of(const std::string& id, bool gold_private) {
  Record r;
  r.id = id;
  r.query = gold_private ? "Alice asks" : "someone asks";
  r.gold_answer = "1";
  if (gold_private) {
    r.private_tokens = {"Alice"};
    r.gold_private = true;
  }
  return r;
}

}  // namespace

TEST_CASE("exact match fixtures") {
  CHECK(exact_match_quality("5", "5") == doctest::Approx(1.0));
  CHECK(exact_match_quality("The answer is 5.", "5") == doctest::Approx(1.0));
  CHECK(exact_match_quality("6", "5") == doctest::Approx(0.0));
  CHECK(exact_match_quality("  Yes. ", "yes") == doctest::Approx(1.0));
  CHECK(exact_match_quality("15", "5") == doctest::Approx(0.0));
}

TEST_CASE("rouge_sum frozen fixtures") {
  CHECK(rouge_sum("the cat", "the cat sat") ==
        doctest::Approx(34.0 / 45.0).epsilon(1e-12));
  CHECK(rouge_sum("a quick brown fox", "a quick brown fox") ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rouge_sum("abc", "xyz") == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rouge_sum("the dog ran fast", "the dog sprinted quickly") ==
        doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(rouge_sum("5", "5") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rouge_sum("cat", "the cat") ==
        doctest::Approx(4.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("rouge_sum of any nonempty string with itself is one") {
  SplitMix64 rng(42);
  const std::vector<std::string> words = {"red", "fish", "blue", "tree",
                                          "sky"};
  for (int i = 0; i < 50; ++i) {
    std::string s;
    const std::size_t len = 1 + rng.next_below(6);
    for (std::size_t k = 0; k < len; ++k) {
      if (k) s += ' ';
      s += words[rng.next_below(words.size())];
    }
    CHECK(rouge_sum(s, s) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rouge_sum is zero when either side is empty") {
  CHECK(rouge_sum("", "the cat") == doctest::Approx(0.0));
  CHECK(rouge_sum("the cat", "") == doctest::Approx(0.0));
  CHECK(rouge_sum("", "") == doctest::Approx(0.0));
}

TEST_CASE("privacy score fixtures") {
  CHECK(privacy_score(Action::keep_local, 0, 3) == doctest::Approx(1.0));
  CHECK(privacy_score(Action::defer, 4, 4) == doctest::Approx(0.0));
  CHECK(privacy_score(Action::mask_defer, 1, 4) == doctest::Approx(0.75));
  CHECK(privacy_score(Action::defer, 0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(privacy_score(Action::defer, 5, 4), ValidationError);
  CHECK_THROWS_AS(privacy_score(Action::keep_local, 1, 4), ValidationError);
}

TEST_CASE("reward is quality plus lambda times privacy") {
  RewardConfig cfg;
  cfg.lambda = 0.5;
  CHECK(compute_reward(1.0, 1.0, cfg) == doctest::Approx(1.5));
  cfg.lambda = 0.0;
  CHECK(compute_reward(0.7, 0.1, cfg) == doctest::Approx(0.7));
  CHECK(compute_reward(0.7, 0.9, cfg) == doctest::Approx(0.7));
  cfg.lambda = 1.0;
  CHECK(compute_reward(34.0 / 45.0, 0.75, cfg) ==
        doctest::Approx(34.0 / 45.0 + 0.75).epsilon(1e-12));
}

TEST_CASE("reward is affine in privacy with slope lambda") {
  RewardConfig cfg;
  cfg.lambda = 2.5;
  const double r0 = compute_reward(0.4, 0.0, cfg);
  const double r1 = compute_reward(0.4, 0.5, cfg);
  const double r2 = compute_reward(0.4, 1.0, cfg);
  CHECK(r2 - r1 == doctest::Approx(r1 - r0));
  CHECK(r1 - r0 == doctest::Approx(cfg.lambda * 0.5));
}

TEST_CASE("aggregate metrics fixtures") {
  Corpus corpus;
  std::vector<EpisodeOutcome> outcomes;
  // 10 outcomes: 4 sent (3 safe), leaked totals 2 of 8 private tokens.
  for (int i = 0; i < 10; ++i) {
    const std::string id = "r" + std::to_string(i);
    const bool is_private = i < 4;
    corpus.records.push_back(record_of(id, is_private));
  }
  // Give the four private records two annotations each by reusing the
  // outcome counters (total=2).
  outcomes.push_back(outcome_of("r0", Action::mask_defer, true, 0, 2, 1, 2));
  outcomes.push_back(outcome_of("r1", Action::mask_defer, true, 0, 2, 1, 2));
  outcomes.push_back(outcome_of("r2", Action::defer, true, 2, 2, 1, 1));
  outcomes.push_back(outcome_of("r3", Action::keep_local, false, 0, 2, 1, 2));
  outcomes.push_back(outcome_of("r4", Action::defer, true, 0, 0, 1, 2));
  for (int i = 5; i < 10; ++i) {
    outcomes.push_back(outcome_of("r" + std::to_string(i),
                                  Action::keep_local, false, 0, 0, 1, 2));
  }
  const MetricReport rep = aggregate_metrics(outcomes, corpus);
  CHECK(rep.call_rate == doctest::Approx(0.40));
  CHECK(rep.safe_call_rate == doctest::Approx(0.75));
  CHECK(rep.leakage_ratio == doctest::Approx(0.25));
  CHECK(rep.mean_quality == doctest::Approx(1.0));
  // Predicted private = mask_defer on r0, r1 (both gold-private):
  CHECK(rep.privacy_precision == doctest::Approx(1.0));
  CHECK(rep.privacy_recall == doctest::Approx(0.5));
}

TEST_CASE("an all-local run has no calls and no leakage") {
  Corpus corpus;
  std::vector<EpisodeOutcome> outcomes;
  for (int i = 0; i < 6; ++i) {
    const std::string id = "r" + std::to_string(i);
    corpus.records.push_back(record_of(id, i % 2 == 0));
    outcomes.push_back(outcome_of(id, Action::keep_local, false, 0,
                                  i % 2 == 0 ? 1 : 0, 1, 2));
  }
  const MetricReport rep = aggregate_metrics(outcomes, corpus);
  CHECK(rep.call_rate == doctest::Approx(0.0));
  CHECK(rep.safe_call_rate == doctest::Approx(1.0));
  CHECK(rep.leakage_ratio == doctest::Approx(0.0));
  CHECK(rep.privacy_recall == doctest::Approx(0.0));
  CHECK(rep.privacy_precision == doctest::Approx(1.0));
}

TEST_CASE("metric ratios stay within the unit interval") {
  Corpus corpus;
  std::vector<EpisodeOutcome> outcomes;
  SplitMix64 rng(9);
  for (int i = 0; i < 40; ++i) {
    const std::string id = "r" + std::to_string(i);
    const bool is_private = rng.next_double() < 0.5;
    corpus.records.push_back(record_of(id, is_private));
    const Action a = static_cast<Action>(rng.next_below(3));
    const int total = is_private ? 1 : 0;
    const bool sent = a != Action::keep_local;
    const int leaked =
        a == Action::defer
            ? total
            : (a == Action::mask_defer && rng.next_double() < 0.2 ? total : 0);
    outcomes.push_back(
        outcome_of(id, a, sent, leaked, total, rng.next_double(), 1.0));
  }
  const MetricReport rep = aggregate_metrics(outcomes, corpus);
  for (double v : {rep.call_rate, rep.safe_call_rate, rep.leakage_ratio,
                   rep.privacy_precision, rep.privacy_recall}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("aggregate rejects misaligned outcomes") {
  Corpus corpus;
  corpus.records.push_back(record_of("a", false));
  std::vector<EpisodeOutcome> outcomes;
  CHECK_THROWS_AS(aggregate_metrics(outcomes, corpus), ValidationError);
  outcomes.push_back(
      outcome_of("wrong-id", Action::keep_local, false, 0, 0, 1, 1));
  CHECK_THROWS_AS(aggregate_metrics(outcomes, corpus), ValidationError);
}

TEST_CASE("report serialization carries every metric") {
  MetricReport rep;
  rep.n = 3;
  rep.call_rate = 0.5;
  const std::string json = metric_report_to_json(rep);
  CHECK(json.find("\"call_rate\": 0.5") != std::string::npos);
  const std::string csv = metric_report_to_csv(rep);
  CHECK(csv.find("metric,value\n") == 0);
  CHECK(csv.find("call_rate,0.5") != std::string::npos);
}

TEST_CASE("episode CSV has the documented columns") {
  std::vector<EpisodeOutcome> outcomes = {
      outcome_of("q1", Action::mask_defer, true, 1, 4, 0.75, 1.5)};
  const std::string csv = episodes_to_csv(outcomes);
  CHECK(csv.find("id,action,sent,leaked,total_private,quality,reward\n") == 0);
  CHECK(csv.find("q1,a3,1,1,4,0.75,1.5") != std::string::npos);
}
