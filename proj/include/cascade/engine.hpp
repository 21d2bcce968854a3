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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cascade/backends.hpp"
#include "cascade/policy_agent.hpp"
#include "cascade/privacy_memory.hpp"
#include "cascade/scoring.hpp"
#include "cascade/state_encoder.hpp"

namespace cascade {

enum class DeferralStrategy { policy, threshold, confidence };

std::string to_string(DeferralStrategy s);
DeferralStrategy deferral_strategy_from_string(const std::string& s);

struct BackendConfig {
  enum class Type { scripted, http };
  Type type = Type::scripted;
  ScriptedOracleConfig scripted;
  HttpBackendConfig http;
  bool seed_overridden = false;  // scripted block carried its own seed
};

struct EngineConfig {
  std::uint64_t seed = 42;
  RewardConfig reward;
  TrainConfig train;
  EncoderConfig encoder;
  std::string memory_path;
  double match_threshold = 0.2;
  BackendConfig local_backend;
  BackendConfig server_backend;
  DeferralStrategy strategy = DeferralStrategy::policy;
  double threshold = 0.6;  // threshold / confidence baselines; in (0,1)
  LogitSummaryKind summary_kind;
};

EngineConfig load_engine_config(const std::string& path);

/// Builds a backend for `role` ("local" / "server"); scripted blocks that
/// did not pin their own seed inherit `default_seed`.
std::unique_ptr<Backend> make_backend(const BackendConfig& cfg,
                                      const std::string& role,
                                      std::uint64_t default_seed);

/// Keep-local / defer decision of the logit-threshold baseline:
/// keep iff logit_summary(gen, kind) > t (strict).
enum class DeferDecision { keep_local, defer };
DeferDecision threshold_defer(const Generation& gen, double t,
                              const LogitSummaryKind& kind);

struct ParsedConfidence {
  double value = 0.0;
  bool clamped = false;  // raw value fell outside [0,1]
};

/// Extracts a trailing "confidence: <number>" field (last occurrence,
/// case-insensitive, ':' or '=' separators). Absent or unparseable fields
/// yield nullopt, which the confidence strategy treats as defer.
std::optional<ParsedConfidence> parse_confidence(
    const std::string& answer_text);

struct IterationStats {
  int iteration = 0;
  std::size_t batch = 0;
  std::size_t degraded = 0;
  double mean_reward = 0.0;
  double call_rate = 0.0;
  double safe_call_rate = 1.0;
  double leakage_ratio = 0.0;
  double policy_objective = 0.0;
  double value_loss = 0.0;
  double policy_grad_norm = 0.0;
  double value_grad_norm = 0.0;
  double mean_entropy = 0.0;
};

/// On-policy experience for one training iteration; refilled from scratch
/// after every update.
struct ExperienceBuffer {
  std::vector<Transition> transitions;
  void clear() { transitions.clear(); }
};

struct TrainResult {
  PolicyParams policy;
  ValueParams value;
  std::vector<IterationStats> log;
};

/// One JSON object per iteration, newline-delimited; deterministic given
/// the run (no wall-clock fields).
std::string training_log_to_jsonl(const std::vector<IterationStats>& log);

/// Orchestrates episodes over a (local, server) backend pair with an
/// immutable private-memory snapshot. Inference over const engine state is
/// safe for concurrent callers; training owns its parameters exclusively.
class CascadeEngine {
 public:
  CascadeEngine(EngineConfig cfg, PrivateMemory memory,
                std::unique_ptr<Backend> local,
                std::unique_ptr<Backend> server);

  /// Convenience constructor: loads memory from cfg.memory_path (when set)
  /// and builds both backends from the config blocks.
  explicit CascadeEngine(EngineConfig cfg);

  /// One training episode: generate locally, encode the state, sample an
  /// action from the policy (or take `forced`), execute its branch, score
  /// the reward, and return the transition for the experience buffer.
  /// Server failure degrades to the local answer; degraded episodes carry
  /// no usable transition and are excluded from training batches.
  std::pair<EpisodeOutcome, Transition> run_episode(
      const Record& record, const PolicyParams& policy, SplitMix64& rng,
      std::optional<Action> forced = std::nullopt) const;

  /// On-policy training: per iteration, collect a batch of transitions
  /// (batch_size iid record draws, or one full corpus pass when
  /// batch_size == 0), then apply one policy/value update. Deterministic
  /// given (corpus, config, seed).
  TrainResult train(const Corpus& corpus) const;

  /// Greedy evaluation of the configured deferral strategy over a corpus,
  /// one outcome per record in order.
  std::vector<EpisodeOutcome> evaluate(const Corpus& corpus,
                                       const PolicyParams* policy) const;

  /// Live inference: greedy action, no gold, no transition. Backend
  /// failure falls back to the local answer with action keep_local and the
  /// degraded flag set.
  EpisodeOutcome infer(const std::string& query,
                       const PolicyParams* policy) const;

  const EngineConfig& config() const { return cfg_; }
  const PrivateMemory& memory() const { return memory_; }
  Backend& local_backend() const { return *local_; }
  Backend& server_backend() const { return *server_; }

  /// State encoding shared by training, evaluation, and inference.
  State encode(const std::string& query, const Generation& local_gen) const;

 private:
  struct Execution {
    EpisodeOutcome outcome;
    Generation final_gen;
  };
  Execution execute_action(Action action, const std::string& query,
                           const Record* record,
                           const Generation& local_gen) const;

  EngineConfig cfg_;
  PrivateMemory memory_;
  std::unique_ptr<Backend> local_;
  std::unique_ptr<Backend> server_;
};

}  // namespace cascade
