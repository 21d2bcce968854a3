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

#include "cascade/engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

using nlohmann::ordered_json;

std::string to_string(DeferralStrategy s) {
  switch (s) {
    case DeferralStrategy::policy: return "policy";
    case DeferralStrategy::threshold: return "threshold";
    case DeferralStrategy::confidence: return "confidence";
  }
  return "policy";
}

DeferralStrategy deferral_strategy_from_string(const std::string& s) {
  if (s == "policy") return DeferralStrategy::policy;
  if (s == "threshold") return DeferralStrategy::threshold;
  if (s == "confidence") return DeferralStrategy::confidence;
  throw ConfigError("unknown deferral strategy: '" + s + "'");
}

namespace {

ScriptedOracleConfig parse_scripted(const ordered_json& j) {
  ScriptedOracleConfig cfg;
  cfg.correctness_base = j.value("correctness_base", cfg.correctness_base);
  cfg.difficulty_slope = j.value("difficulty_slope", cfg.difficulty_slope);
  cfg.mean_correct = j.value("mean_correct", cfg.mean_correct);
  cfg.mean_incorrect = j.value("mean_incorrect", cfg.mean_incorrect);
  cfg.noise_sd = j.value("noise_sd", cfg.noise_sd);
  cfg.emit_confidence = j.value("emit_confidence", cfg.emit_confidence);
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  return cfg;
}

HttpBackendConfig parse_http(const ordered_json& j) {
  HttpBackendConfig cfg;
  cfg.model = j.value("model", cfg.model);
  cfg.base_url_env = j.value("base_url_env", cfg.base_url_env);
  cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
  cfg.system_prompt = j.value("system_prompt", cfg.system_prompt);
  cfg.user_template = j.value("user_template", cfg.user_template);
  cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
  cfg.max_retries = j.value("max_retries", cfg.max_retries);
  cfg.constant_logprob = j.value("constant_logprob", cfg.constant_logprob);
  return cfg;
}

BackendConfig parse_backend(const ordered_json& j) {
  BackendConfig cfg;
  const std::string type = j.value("type", std::string("scripted"));
  if (type == "scripted") {
    cfg.type = BackendConfig::Type::scripted;
    cfg.scripted = parse_scripted(j);
    cfg.seed_overridden = j.contains("seed");
  } else if (type == "http") {
    cfg.type = BackendConfig::Type::http;
    cfg.http = parse_http(j);
  } else {
    throw ConfigError("unknown backend type: '" + type + "'");
  }
  return cfg;
}

}  // namespace

EngineConfig load_engine_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open engine config: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  EngineConfig cfg;
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("reward")) {
    const auto& r = j["reward"];
    cfg.reward.lambda = r.value("lambda", cfg.reward.lambda);
    if (r.contains("quality_kind")) {
      cfg.reward.quality_kind =
          quality_kind_from_string(r["quality_kind"].get<std::string>());
    }
  }
  if (!std::isfinite(cfg.reward.lambda) || cfg.reward.lambda < 0.0) {
    throw ConfigError("reward.lambda must be finite and >= 0");
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    cfg.train.eta = t.value("eta", cfg.train.eta);
    cfg.train.value_eta = t.value("value_eta", cfg.train.value_eta);
    cfg.train.gamma = t.value("gamma", cfg.train.gamma);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.iterations = t.value("iterations", cfg.train.iterations);
    cfg.train.clip_epsilon = t.value("clip_epsilon", cfg.train.clip_epsilon);
    cfg.train.entropy_bonus =
        t.value("entropy_bonus", cfg.train.entropy_bonus);
    cfg.train.hidden = t.value("hidden", cfg.train.hidden);
  }
  cfg.train.seed = cfg.seed;
  if (cfg.train.eta <= 0.0) throw ConfigError("train.eta must be > 0");
  if (cfg.train.value_eta <= 0.0) {
    throw ConfigError("train.value_eta must be > 0");
  }
  if (cfg.train.gamma < 0.0 || cfg.train.gamma > 1.0) {
    throw ConfigError("train.gamma must lie in [0,1]");
  }
  if (j.contains("encoder")) {
    const auto& e = j["encoder"];
    cfg.encoder.quantile_q = e.value("quantile_q", cfg.encoder.quantile_q);
    cfg.encoder.logprob_floor =
        e.value("logprob_floor", cfg.encoder.logprob_floor);
    cfg.encoder.length_cap = e.value("length_cap", cfg.encoder.length_cap);
  }
  if (j.contains("memory")) {
    const auto& m = j["memory"];
    cfg.memory_path = m.value("path", cfg.memory_path);
    cfg.match_threshold = m.value("match_threshold", cfg.match_threshold);
  }
  if (j.contains("backends")) {
    const auto& b = j["backends"];
    if (b.contains("local")) cfg.local_backend = parse_backend(b["local"]);
    if (b.contains("server")) cfg.server_backend = parse_backend(b["server"]);
  }
  if (j.contains("deferral")) {
    const auto& d = j["deferral"];
    if (d.contains("strategy")) {
      cfg.strategy =
          deferral_strategy_from_string(d["strategy"].get<std::string>());
    }
    cfg.threshold = d.value("threshold", cfg.threshold);
    const std::string summary = d.value("summary", std::string("mean"));
    if (summary == "mean") {
      cfg.summary_kind.stat = LogitSummaryKind::Stat::mean;
    } else if (summary == "quantile") {
      cfg.summary_kind.stat = LogitSummaryKind::Stat::quantile;
      cfg.summary_kind.q = d.value("quantile_q", cfg.summary_kind.q);
    } else {
      throw ConfigError("unknown logit summary: '" + summary + "'");
    }
  }
  if (cfg.strategy != DeferralStrategy::policy &&
      (cfg.threshold <= 0.0 || cfg.threshold >= 1.0)) {
    throw ConfigError("deferral threshold must lie in (0,1)");
  }
  return cfg;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg,
                                      const std::string& role,
                                      std::uint64_t default_seed) {
  if (cfg.type == BackendConfig::Type::scripted) {
    ScriptedOracleConfig sc = cfg.scripted;
    if (!cfg.seed_overridden) sc.seed = default_seed;
    return std::make_unique<ScriptedBackend>(sc, role);
  }
  return std::make_unique<HttpBackend>(cfg.http);
}

DeferDecision threshold_defer(const Generation& gen, double t,
                              const LogitSummaryKind& kind) {
  if (t <= 0.0 || t >= 1.0) {
    throw ConfigError("threshold_defer: t must lie in (0,1)");
  }
  return logit_summary(gen, kind) > t ? DeferDecision::keep_local
                                      : DeferDecision::defer;
}

std::optional<ParsedConfidence> parse_confidence(
    const std::string& answer_text) {
  const std::string lowered = text::lower(answer_text);
  const std::string key = "confidence";
  std::size_t pos = lowered.rfind(key);
  if (pos == std::string::npos) return std::nullopt;
  std::size_t i = pos + key.size();
  while (i < lowered.size() &&
         (std::isspace(static_cast<unsigned char>(lowered[i])) ||
          lowered[i] == ':' || lowered[i] == '=')) {
    ++i;
  }
  std::size_t j = i;
  bool digits = false;
  if (j < lowered.size() && (lowered[j] == '+' || lowered[j] == '-')) ++j;
  while (j < lowered.size() &&
         (std::isdigit(static_cast<unsigned char>(lowered[j])) ||
          lowered[j] == '.')) {
    if (std::isdigit(static_cast<unsigned char>(lowered[j]))) digits = true;
    ++j;
  }
  if (!digits) return std::nullopt;
  try {
    const double raw = std::stod(lowered.substr(i, j - i));
    ParsedConfidence out;
    out.value = std::clamp(raw, 0.0, 1.0);
    out.clamped = raw < 0.0 || raw > 1.0;
    return out;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

CascadeEngine::CascadeEngine(EngineConfig cfg, PrivateMemory memory,
                             std::unique_ptr<Backend> local,
                             std::unique_ptr<Backend> server)
    : cfg_(std::move(cfg)),
      memory_(std::move(memory)),
      local_(std::move(local)),
      server_(std::move(server)) {
  if (!local_ || !server_) {
    throw ConfigError("engine needs both a local and a server backend");
  }
  if (cfg_.strategy == DeferralStrategy::policy && memory_.entries.empty()) {
    throw ConfigError(
        "policy strategy requires a nonempty private memory (mask_defer "
        "would have nothing to mask with)");
  }
}

CascadeEngine::CascadeEngine(EngineConfig cfg)
    : CascadeEngine(
          cfg,
          cfg.memory_path.empty()
              ? PrivateMemory{{}, cfg.match_threshold}
              : load_memory(cfg.memory_path, cfg.match_threshold),
          make_backend(cfg.local_backend, "local", cfg.seed),
          make_backend(cfg.server_backend, "server", cfg.seed)) {}

State CascadeEngine::encode(const std::string& query,
                            const Generation& local_gen) const {
  return encode_state(privacy_features(query, memory_),
                      quality_features(local_gen, cfg_.encoder));
}

CascadeEngine::Execution CascadeEngine::execute_action(
    Action action, const std::string& query, const Record* record,
    const Generation& local_gen) const {
  Execution ex;
  EpisodeOutcome& o = ex.outcome;
  o.record_id = record ? record->id : "";
  o.action = action;
  o.total_private_tokens =
      record ? static_cast<int>(record->private_tokens.size()) : 0;
  o.latency_ms = local_gen.latency_ms;

  switch (action) {
    case Action::keep_local: {
      ex.final_gen = local_gen;
      break;
    }
    case Action::defer: {
      try {
        ex.final_gen = server_->generate(query, record);
        o.sent_to_server = true;
        o.leaked_tokens = o.total_private_tokens;
      } catch (const BackendError&) {
        ex.final_gen = local_gen;
        o.degraded = true;
      }
      break;
    }
    case Action::mask_defer: {
      const MaskedQuery masked = mask_query(query, memory_, record);
      try {
        ex.final_gen = server_->generate(masked.text, record);
        o.sent_to_server = true;
        o.masked = true;
        o.leaked_tokens = static_cast<int>(masked.residual_private.size());
      } catch (const BackendError&) {
        ex.final_gen = local_gen;
        o.degraded = true;
      }
      break;
    }
  }
  o.final_answer = ex.final_gen.text;
  o.model_tag = ex.final_gen.model_tag;
  o.latency_ms += o.sent_to_server ? ex.final_gen.latency_ms : 0.0;
  return ex;
}

std::pair<EpisodeOutcome, Transition> CascadeEngine::run_episode(
    const Record& record, const PolicyParams& policy, SplitMix64& rng,
    std::optional<Action> forced) const {
  const Generation local_gen = local_->generate(record.query, &record);
  const State state = encode(record.query, local_gen);
  const Vector3 dist = policy_forward(policy, state);
  const Action action = forced ? *forced : sample_action(dist, rng);

  Execution ex = execute_action(action, record.query, &record, local_gen);
  EpisodeOutcome& o = ex.outcome;
  o.quality = quality_score(o.final_answer, record.gold_answer,
                            cfg_.reward.quality_kind);
  const double privacy =
      privacy_score(o.degraded ? Action::keep_local : o.action,
                    o.leaked_tokens, o.total_private_tokens);
  o.reward = compute_reward(*o.quality, privacy, cfg_.reward);

  Transition t;
  t.state = state;
  t.action = action;
  t.reward = *o.reward;
  t.logprob_at_collection = std::log(dist[static_cast<int>(action)]);
  return {std::move(ex.outcome), std::move(t)};
}

TrainResult CascadeEngine::train(const Corpus& corpus) const {
  if (corpus.records.empty()) {
    throw ConfigError("training requires a nonempty corpus");
  }
  if (cfg_.train.iterations < 1) {
    throw ConfigError("train.iterations must be >= 1");
  }

  SplitMix64 init_rng(cfg_.seed ^ fnv1a64("init"));
  SplitMix64 episode_rng(cfg_.seed ^ fnv1a64("train"));

  TrainResult result;
  result.policy = init_policy(cfg_.train.hidden, init_rng);
  result.value = init_value(cfg_.train.hidden, init_rng);
  result.log.reserve(static_cast<std::size_t>(cfg_.train.iterations));

  const std::size_t n = corpus.records.size();
  ExperienceBuffer buffer;
  for (int iter = 1; iter <= cfg_.train.iterations; ++iter) {
    buffer.clear();
    std::vector<Transition>& batch = buffer.transitions;
    std::size_t degraded = 0;
    std::size_t sent = 0;
    std::size_t safe_sent = 0;
    long long leaked = 0;
    long long total_private = 0;

    auto run_one = [&](const Record& rec) {
      auto [outcome, transition] = run_episode(rec, result.policy, episode_rng);
      if (outcome.degraded) {
        ++degraded;
        return;
      }
      batch.push_back(std::move(transition));
      if (outcome.sent_to_server) {
        ++sent;
        if (outcome.leaked_tokens == 0) ++safe_sent;
      }
      leaked += outcome.leaked_tokens;
      total_private += outcome.total_private_tokens;
    };

    if (cfg_.train.batch_size <= 0) {
      for (const Record& rec : corpus.records) run_one(rec);
    } else {
      for (int k = 0; k < cfg_.train.batch_size; ++k) {
        run_one(corpus.records[episode_rng.next_below(n)]);
      }
    }
    if (batch.empty()) {
      throw Error("training iteration " + std::to_string(iter) +
                  ": every episode degraded; no transitions to learn from");
    }

    const UpdateStats stats =
        update(result.policy, result.value, batch, cfg_.train);

    IterationStats row;
    row.iteration = iter;
    row.batch = batch.size();
    row.degraded = degraded;
    row.mean_reward = stats.mean_reward;
    row.call_rate = static_cast<double>(sent) / batch.size();
    row.safe_call_rate =
        sent == 0 ? 1.0 : static_cast<double>(safe_sent) / sent;
    row.leakage_ratio =
        total_private == 0
            ? 0.0
            : static_cast<double>(leaked) / static_cast<double>(total_private);
    row.policy_objective = stats.policy_objective;
    row.value_loss = stats.value_loss;
    row.policy_grad_norm = stats.policy_grad_norm;
    row.value_grad_norm = stats.value_grad_norm;
    row.mean_entropy = stats.mean_entropy;
    result.log.push_back(row);
  }
  return result;
}

std::vector<EpisodeOutcome> CascadeEngine::evaluate(
    const Corpus& corpus, const PolicyParams* policy) const {
  if (corpus.records.empty()) {
    throw ConfigError("evaluation requires a nonempty corpus");
  }
  if (cfg_.strategy == DeferralStrategy::policy && policy == nullptr) {
    throw ConfigError("policy strategy evaluation needs trained parameters");
  }

  std::vector<EpisodeOutcome> outcomes;
  outcomes.reserve(corpus.records.size());
  for (const Record& rec : corpus.records) {
    const Generation local_gen = local_->generate(rec.query, &rec);
    Action action = Action::keep_local;
    switch (cfg_.strategy) {
      case DeferralStrategy::policy: {
        const State state = encode(rec.query, local_gen);
        action = greedy_action(policy_forward(*policy, state));
        break;
      }
      case DeferralStrategy::threshold: {
        action = threshold_defer(local_gen, cfg_.threshold,
                                 cfg_.summary_kind) == DeferDecision::defer
                     ? Action::defer
                     : Action::keep_local;
        break;
      }
      case DeferralStrategy::confidence: {
        const auto conf = parse_confidence(local_gen.text);
        const bool keep = conf && conf->value > cfg_.threshold;
        action = keep ? Action::keep_local : Action::defer;
        break;
      }
    }
    Execution ex = execute_action(action, rec.query, &rec, local_gen);
    EpisodeOutcome& o = ex.outcome;
    o.quality = quality_score(o.final_answer, rec.gold_answer,
                              cfg_.reward.quality_kind);
    const double privacy =
        privacy_score(o.degraded ? Action::keep_local : o.action,
                      o.leaked_tokens, o.total_private_tokens);
    o.reward = compute_reward(*o.quality, privacy, cfg_.reward);
    outcomes.push_back(std::move(ex.outcome));
  }
  return outcomes;
}

EpisodeOutcome CascadeEngine::infer(const std::string& query,
                                    const PolicyParams* policy) const {
  const Generation local_gen = local_->generate(query, nullptr);
  Action action = Action::keep_local;
  switch (cfg_.strategy) {
    case DeferralStrategy::policy: {
      if (policy == nullptr) {
        throw ConfigError("inference with the policy strategy needs params");
      }
      const State state = encode(query, local_gen);
      action = greedy_action(policy_forward(*policy, state));
      break;
    }
    case DeferralStrategy::threshold: {
      action = threshold_defer(local_gen, cfg_.threshold, cfg_.summary_kind) ==
                       DeferDecision::defer
                   ? Action::defer
                   : Action::keep_local;
      break;
    }
    case DeferralStrategy::confidence: {
      const auto conf = parse_confidence(local_gen.text);
      action = (conf && conf->value > cfg_.threshold) ? Action::keep_local
                                                      : Action::defer;
      break;
    }
  }
  Execution ex = execute_action(action, query, nullptr, local_gen);
  if (ex.outcome.degraded) {
    // A live gateway must answer: fall back to the local response.
    ex.outcome.action = Action::keep_local;
    ex.outcome.masked = false;
  }
  return std::move(ex.outcome);
}

std::string training_log_to_jsonl(const std::vector<IterationStats>& log) {
  std::ostringstream os;
  for (const auto& row : log) {
    ordered_json j;
    j["iteration"] = row.iteration;
    j["batch"] = row.batch;
    j["degraded"] = row.degraded;
    j["mean_reward"] = row.mean_reward;
    j["call_rate"] = row.call_rate;
    j["safe_call_rate"] = row.safe_call_rate;
    j["leakage_ratio"] = row.leakage_ratio;
    j["policy_objective"] = row.policy_objective;
    j["value_loss"] = row.value_loss;
    j["policy_grad_norm"] = row.policy_grad_norm;
    j["value_grad_norm"] = row.value_grad_norm;
    j["mean_entropy"] = row.mean_entropy;
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace cascade
