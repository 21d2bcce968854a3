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

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/tuning_losses.hpp"
#include "oracles.hpp"

using namespace cascade;

namespace {

TokenDistributionSequence seq_of(std::vector<std::vector<double>> rows,
                                 std::optional<std::vector<int>> targets =
                                     std::nullopt) {
  TokenDistributionSequence seq;
  seq.probs.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t v = 0; v < rows[t].size(); ++v) {
      seq.probs(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(v)) =
          rows[t][v];
    }
  }
  seq.target_ids = std::move(targets);
  return seq;
}

// Random probability row over `vocab` entries.
std::vector<double> random_row(SplitMix64& rng, std::size_t vocab) {
  std::vector<double> row(vocab);
  double sum = 0.0;
  for (auto& p : row) {
    p = rng.next_uniform(1e-6, 1.0);
    sum += p;
  }
  for (auto& p : row) p /= sum;
  // Re-normalize exactly against accumulated rounding.
  double s2 = 0.0;
  for (double p : row) s2 += p;
  row.back() += 1.0 - s2;
  return row;
}

}  // namespace

TEST_CASE("instruction loss fixtures") {
  // Gold token probability 1 at every step.
  const auto perfect = seq_of({{1.0, 0.0}, {1.0, 0.0}}, {{0, 0}});
  CHECK(instruction_loss(perfect) == doctest::Approx(0.0));

  const double e01 = std::exp(-0.1);
  const auto tenth =
      seq_of({{e01, 1 - e01}, {e01, 1 - e01}, {e01, 1 - e01}}, {{0, 0, 0}});
  CHECK(instruction_loss(tenth) == doctest::Approx(0.3).epsilon(1e-12));

  const auto two = seq_of({{0.5, 0.5}, {0.25, 0.75}}, {{0, 0}});
  CHECK(instruction_loss(two) ==
        doctest::Approx(2.0794415416798357).epsilon(1e-12));
}

TEST_CASE("instruction loss requires targets") {
  const auto seq = seq_of({{0.5, 0.5}});
  CHECK_THROWS_AS(instruction_loss(seq), ValidationError);
}

TEST_CASE("kd loss fixtures") {
  const auto same = seq_of({{0.3, 0.7}, {0.6, 0.4}});
  CHECK(kd_loss(same, same) == doctest::Approx(0.0));

  const auto server = seq_of({{1.0, 0.0}});
  const auto local = seq_of({{0.5, 0.5}});
  CHECK(kd_loss(server, local) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-12));

  const auto server2 = seq_of({{0.5, 0.5}});
  const auto local2 = seq_of({{0.9, 0.1}});
  CHECK(kd_loss(server2, local2) ==
        doctest::Approx(0.5108256237659907).epsilon(1e-12));
}

TEST_CASE("kd loss rejects mismatched shapes") {
  const auto a = seq_of({{0.5, 0.5}});
  const auto b = seq_of({{0.5, 0.5}, {0.5, 0.5}});
  CHECK_THROWS_AS(kd_loss(a, b), ValidationError);
}

TEST_CASE("kd loss is nonnegative and zero only at equality") {
  SplitMix64 rng(77);
  for (int i = 0; i < 200; ++i) {
    const std::size_t vocab = 2 + rng.next_below(5);
    const std::size_t steps = 1 + rng.next_below(4);
    std::vector<std::vector<double>> s_rows, l_rows;
    for (std::size_t t = 0; t < steps; ++t) {
      s_rows.push_back(random_row(rng, vocab));
      l_rows.push_back(random_row(rng, vocab));
    }
    const auto server = seq_of(s_rows);
    const auto local = seq_of(l_rows);
    const double kl = kd_loss(server, local);
    CHECK(kl >= -1e-12);
    CHECK(kl == doctest::Approx(oracle::kd_loss(s_rows, l_rows))
                    .epsilon(1e-12));
  }
}

TEST_CASE("instruction loss decreases when a gold probability rises") {
  auto low = seq_of({{0.4, 0.6}, {0.3, 0.7}}, {{0, 0}});
  auto high = seq_of({{0.5, 0.5}, {0.3, 0.7}}, {{0, 0}});
  CHECK(instruction_loss(high) < instruction_loss(low));
}

TEST_CASE("combined loss fixtures") {
  CHECK(combined_tuning_loss(0.3, 0.6931, 0.0) == doctest::Approx(0.3));
  CHECK(combined_tuning_loss(0.3, 0.6931, 1.0) == doctest::Approx(0.9931));
  CHECK(combined_tuning_loss(2.0794415416798357, 0.5108256237659907, 0.5) ==
        doctest::Approx(2.334854353562831).epsilon(1e-12));
}

TEST_CASE("the gate drops the server term above the threshold") {
  MultiObjLossConfig cfg;
  cfg.objective_weights = {0.2};
  cfg.w_local = 0.3;
  cfg.w_server = 0.5;
  cfg.threshold = 0.5;
  cfg.logit_summary = 0.8;  // above t -> gate 0
  CHECK(heaviside_gate(0.8, 0.5) == doctest::Approx(0.0));
  CHECK(multi_objective_cascade_loss({2.0}, 3.0, 100.0, cfg) ==
        doctest::Approx(0.2 * 2.0 + 0.3 * 3.0));
}

TEST_CASE("simplex weights on equal losses give that loss back") {
  MultiObjLossConfig cfg;
  cfg.objective_weights = {0.2};
  cfg.w_local = 0.3;
  cfg.w_server = 0.5;
  cfg.threshold = 0.5;
  cfg.logit_summary = 0.3;  // below t -> gate 1
  CHECK(multi_objective_cascade_loss({1.0}, 1.0, 1.0, cfg) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equality at the threshold keeps the server term") {
  MultiObjLossConfig cfg;
  cfg.objective_weights = {};
  cfg.w_local = 0.5;
  cfg.w_server = 0.5;
  cfg.threshold = 0.5;
  cfg.logit_summary = 0.5;  // equal -> gate 1 (rule is "0 only if > t")
  CHECK(heaviside_gate(0.5, 0.5) == doctest::Approx(1.0));
  CHECK(multi_objective_cascade_loss({}, 1.0, 3.0, cfg) ==
        doctest::Approx(2.0));
}

TEST_CASE("weight-sum violations are rejected") {
  MultiObjLossConfig cfg;
  cfg.objective_weights = {0.5};
  cfg.w_local = 0.5;
  cfg.w_server = 0.5;  // sums to 1.5
  cfg.threshold = 0.5;
  CHECK_THROWS_AS(multi_objective_cascade_loss({1.0}, 1.0, 1.0, cfg),
                  ValidationError);
}

TEST_CASE("privacy BCE fixture") {
  CHECK(privacy_objective_loss(0.9, true) ==
        doctest::Approx(0.10536051565782628).epsilon(1e-12));
  CHECK(privacy_objective_loss(0.9, false) ==
        doctest::Approx(-std::log(0.1)).epsilon(1e-9));
  CHECK(privacy_objective_loss(0.0, true) > 0.0);  // floored, finite
}

TEST_CASE("cascade loss is piecewise linear in each loss input") {
  MultiObjLossConfig cfg;
  cfg.objective_weights = {0.25, 0.25};
  cfg.w_local = 0.25;
  cfg.w_server = 0.25;
  cfg.threshold = 0.7;
  cfg.logit_summary = 0.2;
  const double base = multi_objective_cascade_loss({1.0, 2.0}, 3.0, 4.0, cfg);
  const double bumped =
      multi_objective_cascade_loss({1.0, 2.0}, 3.0 + 2.0, 4.0, cfg);
  CHECK(bumped - base == doctest::Approx(0.25 * 2.0).epsilon(1e-12));
}

TEST_CASE("invalid distributions are rejected") {
  auto bad = seq_of({{0.5, 0.6}});  // sums to 1.1
  CHECK_THROWS_AS(validate_sequence(bad), ValidationError);
  auto neg = seq_of({{1.2, -0.2}});
  CHECK_THROWS_AS(validate_sequence(neg), ValidationError);
  auto oob = seq_of({{0.5, 0.5}}, {{3}});
  CHECK_THROWS_AS(validate_sequence(oob), ValidationError);
}
