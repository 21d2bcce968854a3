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

#include <optional>
#include <string>
#include <vector>

#include "cascade/action.hpp"
#include "cascade/corpus.hpp"

namespace cascade {

enum class QualityKind { exact_match, rouge_sum };

std::string to_string(QualityKind k);
QualityKind quality_kind_from_string(const std::string& s);

/// Reward = quality + lambda * privacy.
struct RewardConfig {
  double lambda = 1.0;
  QualityKind quality_kind = QualityKind::exact_match;
};

/// The result of running one query through the cascade.
struct EpisodeOutcome {
  std::string record_id;
  Action action = Action::keep_local;
  std::string final_answer;
  bool sent_to_server = false;
  bool masked = false;
  int leaked_tokens = 0;         // gold private tokens sent unmasked
  int total_private_tokens = 0;  // gold private tokens in the query
  std::optional<double> quality;  // absent at inference time (no gold)
  std::optional<double> reward;
  std::string model_tag;
  double latency_ms = 0.0;
  // Server backend failed after retries; the local answer was returned and
  // the episode is excluded from training batches and metric folds.
  bool degraded = false;
};

/// 1 iff answer and gold agree after normalization (trim, lowercase, strip
/// trailing punctuation); when both carry a trailing number the numbers are
/// compared instead, so "The answer is 5." matches gold "5".
double exact_match_quality(const std::string& answer, const std::string& gold);

/// Mean of ROUGE-1, ROUGE-2 and ROUGE-L F1 over lowercased whitespace
/// tokens; 0 when either side is empty. When either side has fewer than n
/// tokens, ROUGE-n degenerates to exact sequence identity (1 if the token
/// lists are equal, else 0), which keeps rouge_sum(x, x) = 1 for any
/// nonempty x and rouge_sum of disjoint single tokens at 0.
double rouge_sum(const std::string& answer, const std::string& gold);

double quality_score(const std::string& answer, const std::string& gold,
                     QualityKind kind);

/// 1 - leaked/total when the query has private tokens; 1.0 when there is
/// nothing to leak. Always in [0, 1].
double privacy_score(Action action, int leaked_tokens,
                     int total_private_tokens);

double compute_reward(double quality, double privacy,
                      const RewardConfig& cfg);

struct MetricReport {
  std::size_t n = 0;
  std::size_t n_degraded = 0;
  std::size_t n_sent = 0;
  double call_rate = 0.0;
  double safe_call_rate = 1.0;
  double mean_quality = 0.0;
  double mean_reward = 0.0;
  double leakage_ratio = 0.0;     // sum(leaked) / sum(total private)
  double privacy_precision = 1.0; // predicted-private == chose mask_defer
  double privacy_recall = 1.0;
  long long leaked_tokens = 0;
  long long total_private_tokens = 0;
};

/// Folds outcomes (aligned 1:1, in order, with the corpus records) into the
/// evaluation metrics. Degraded episodes are counted but excluded from
/// every ratio. Throws ValidationError on misalignment.
MetricReport aggregate_metrics(const std::vector<EpisodeOutcome>& outcomes,
                               const Corpus& gold);

/// Serialization for reports and per-episode dumps. The JSON form uses a
/// fixed key order; the CSV form is one "metric,value" row per metric.
std::string metric_report_to_json(const MetricReport& report);
std::string metric_report_to_csv(const MetricReport& report);
std::string episodes_to_csv(const std::vector<EpisodeOutcome>& outcomes);

}  // namespace cascade
