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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cascade/corpus.hpp"

namespace cascade {

/// One model response plus the per-token log-probabilities the deferral
/// features are built from.
struct Generation {
  std::string text;
  std::vector<double> token_logprobs;  // each <= 0
  std::string model_tag;
  double latency_ms = 0.0;
  // True when the backend could not obtain real log-probabilities and
  // substituted the documented constant profile.
  bool logprobs_estimated = false;
};

struct LogitSummaryKind {
  enum class Stat { mean, quantile };
  Stat stat = Stat::mean;
  double q = 0.1;  // used when stat == quantile
};

/// Confidence summary in (0, 1]: exp of the chosen statistic (mean or
/// nearest-rank quantile) of the token log-probabilities. Monotone in any
/// uniform shift of the log-probabilities, so threshold rules over (0,1)
/// apply directly.
double logit_summary(const Generation& gen, const LogitSummaryKind& kind);

/// Uniform interface over the local and server models.
class Backend {
 public:
  virtual ~Backend() = default;

  /// Produces an answer for `query`. `record` supplies gold context for
  /// scripted simulation and may be null for live traffic. Throws
  /// BackendError when the backend is unreachable after retries.
  virtual Generation generate(const std::string& query,
                              const Record* record) = 0;

  virtual std::string tag() const = 0;
};

/// Deterministic stand-in for a real model. The answer is correct with
/// probability clamp(correctness_base - difficulty_slope * difficulty);
/// token log-probabilities are drawn around mean_correct for correct
/// answers and mean_incorrect otherwise, which couples the quality
/// features to actual answer quality.
struct ScriptedOracleConfig {
  double correctness_base = 0.9;
  double difficulty_slope = 0.0;
  double mean_correct = -0.35;
  double mean_incorrect = -2.5;
  double noise_sd = 0.25;
  std::uint64_t seed = 0;
  // Appends a trailing "confidence: <v>" field correlated with answer
  // correctness, for the confidence-parsing deferral baseline.
  bool emit_confidence = false;
};

// Token log-probabilities emitted by the scripted backend are clamped to
// this range; the upper bound keeps exp(mean) strictly below 1 so a
// threshold arbitrarily close to 1 defers every query.
constexpr double kScriptedLogprobFloor = -27.6;
constexpr double kScriptedLogprobCeil = -0.01;

class ScriptedBackend final : public Backend {
 public:
  /// `role` ("local" / "server") salts the per-call draw stream so the two
  /// tiers see independent randomness for the same record.
  ScriptedBackend(ScriptedOracleConfig config, std::string role);

  /// Pure function of (config, seed, role, record id | query). Concurrent
  /// calls are safe: every call derives its own generator.
  Generation generate(const std::string& query, const Record* record) override;

  std::string tag() const override;

  /// The correctness probability the oracle uses for this record; exposed
  /// so evaluations can enumerate expected rewards exactly.
  double correctness_probability(const Record& record) const;

  const ScriptedOracleConfig& config() const { return config_; }

 private:
  ScriptedOracleConfig config_;
  std::string role_;
};

/// OpenAI-compatible chat-completions client. Base URL and credential come
/// from environment variables (never flags); requests ask for logprobs and
/// fall back to a constant profile when the provider omits them.
struct HttpBackendConfig {
  std::string model = "gpt-4o-mini";
  std::string base_url_env = "CASCADE_BASE_URL";
  std::string api_key_env = "CASCADE_API_KEY";
  std::string system_prompt;   // optional
  std::string user_template;   // optional; "{query}" is substituted
  int timeout_ms = 30000;
  int max_retries = 3;
  double constant_logprob = -1.0;  // fallback profile value
};

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  /// Up to max_retries attempts with exponential backoff (100ms, 200ms,
  /// 400ms ...); transport failures and 5xx responses are retried, then
  /// surfaced as BackendError.
  Generation generate(const std::string& query, const Record* record) override;

  std::string tag() const override;

 private:
  HttpBackendConfig config_;
  std::string base_url_;
  std::string api_key_;
};

}  // namespace cascade
