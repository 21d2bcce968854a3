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

#include "cascade/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/state_encoder.hpp"
#include "cascade/text.hpp"

// httplib drags in resolv.h, whose _res macro mangles Eigen declarations;
// keep it after every Eigen-bearing header.
#include "httplib.h"
#include "json.hpp"

namespace cascade {

using nlohmann::json;

double logit_summary(const Generation& gen, const LogitSummaryKind& kind) {
  if (gen.token_logprobs.empty()) {
    throw ValidationError("logit_summary needs a nonempty generation");
  }
  double stat = 0.0;
  if (kind.stat == LogitSummaryKind::Stat::mean) {
    for (double lp : gen.token_logprobs) stat += lp;
    stat /= static_cast<double>(gen.token_logprobs.size());
  } else {
    stat = nearest_rank_quantile(gen.token_logprobs, kind.q);
  }
  return std::exp(stat);
}

// ---------------------------------------------------------------------------
// Scripted backend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(ScriptedOracleConfig config, std::string role)
    : config_(config), role_(std::move(role)) {}

std::string ScriptedBackend::tag() const { return "scripted-" + role_; }

double ScriptedBackend::correctness_probability(const Record& record) const {
  const double difficulty = record.difficulty.value_or(0.5);
  return std::clamp(
      config_.correctness_base - config_.difficulty_slope * difficulty, 0.0,
      1.0);
}

namespace {

std::optional<double> parse_trailing_number(const std::string& s);

// Degraded stand-in for a wrong answer: a numeric gold answer is shifted by
// delta; otherwise the first half of the gold tokens are echoed.
std::string wrong_answer(const std::string& gold, std::uint64_t delta) {
  const auto num = parse_trailing_number(gold);
  if (num) {
    std::ostringstream os;
    const double v = *num + static_cast<double>(delta);
    if (v == std::floor(v)) {
      os << static_cast<long long>(v);
    } else {
      os << v;
    }
    return os.str();
  }
  const auto toks = text::tokenize(gold);
  if (toks.empty()) return "unknown";
  std::string out;
  const std::size_t keep = (toks.size() + 1) / 2;
  for (std::size_t i = 0; i < keep; ++i) {
    if (i) out += ' ';
    out += gold.substr(toks[i].begin, toks[i].end - toks[i].begin);
  }
  return out;
}

std::optional<double> parse_trailing_number(const std::string& s) {
  // Last run of digits (with optional sign, decimal point, thousands
  // commas) in the string.
  int end = static_cast<int>(s.size()) - 1;
  while (end >= 0 && !std::isdigit(static_cast<unsigned char>(s[end]))) --end;
  if (end < 0) return std::nullopt;
  int begin = end;
  auto numeric = [&](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == ',';
  };
  while (begin > 0 && numeric(s[begin - 1])) --begin;
  if (begin > 0 && (s[begin - 1] == '-' || s[begin - 1] == '+')) --begin;
  std::string raw = s.substr(begin, end - begin + 1);
  raw.erase(std::remove(raw.begin(), raw.end(), ','), raw.end());
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used == 0) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

Generation ScriptedBackend::generate(const std::string& query,
                                     const Record* record) {
  const std::string key = record ? record->id : query;
  SplitMix64 rng(fnv1a64(key) ^ (config_.seed + fnv1a64(role_)));

  double p_correct = config_.correctness_base;
  if (record) {
    p_correct = correctness_probability(*record);
  } else {
    p_correct = std::clamp(
        config_.correctness_base - config_.difficulty_slope * 0.5, 0.0, 1.0);
  }
  const bool correct = rng.next_double() < p_correct;
  const double latency = 0.5 + 2.0 * rng.next_double();
  const std::uint64_t delta = 1 + rng.next_below(9);

  Generation gen;
  gen.model_tag = tag();
  gen.latency_ms = latency;
  if (record) {
    gen.text = correct ? record->gold_answer
                       : wrong_answer(record->gold_answer, delta);
  } else {
    // No gold context (live traffic): deterministic filler answer.
    std::ostringstream os;
    os << "sim-" << (fnv1a64(key) % 10000);
    gen.text = os.str();
  }

  const std::size_t n_tokens =
      std::max<std::size_t>(1, text::tokenize(gen.text).size());
  const double mean = correct ? config_.mean_correct : config_.mean_incorrect;
  gen.token_logprobs.reserve(n_tokens);
  for (std::size_t i = 0; i < n_tokens; ++i) {
    const double lp = mean + config_.noise_sd * rng.next_gaussian();
    gen.token_logprobs.push_back(
        std::clamp(lp, kScriptedLogprobFloor, kScriptedLogprobCeil));
  }

  if (config_.emit_confidence) {
    const double u = rng.next_double();
    const double conf = correct ? 0.75 + 0.24 * u : 0.05 + 0.45 * u;
    std::ostringstream os;
    os << gen.text << " confidence: ";
    os.precision(2);
    os << std::fixed << conf;
    gen.text = os.str();
  }
  return gen;
}

// ---------------------------------------------------------------------------
// HTTP backend
// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  const char* url = std::getenv(config_.base_url_env.c_str());
  if (url == nullptr || *url == '\0') {
    throw ConfigError("http backend: environment variable " +
                      config_.base_url_env + " is not set");
  }
  base_url_ = url;
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    api_key_ = key;
  }
}

std::string HttpBackend::tag() const { return "http-" + config_.model; }

Generation HttpBackend::generate(const std::string& query,
                                 const Record* /*record*/) {
  std::string content = query;
  if (!config_.user_template.empty()) {
    content = config_.user_template;
    const std::string needle = "{query}";
    if (auto pos = content.find(needle); pos != std::string::npos) {
      content.replace(pos, needle.size(), query);
    }
  }

  json body;
  body["model"] = config_.model;
  json messages = json::array();
  if (!config_.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", config_.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", content}});
  body["messages"] = messages;
  body["logprobs"] = true;
  body["temperature"] = 0.0;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, config_.max_retries); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(100LL << (attempt - 1)));
    }
    httplib::Client client(base_url_);
    client.set_connection_timeout(config_.timeout_ms / 1000,
                                  (config_.timeout_ms % 1000) * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000,
                            (config_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!api_key_.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto res = client.Post("/v1/chat/completions", headers, payload,
                           "application/json");
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("http backend: status " +
                         std::to_string(res->status) + ": " + res->body);
    }
    try {
      json reply = json::parse(res->body);
      const auto& choice = reply.at("choices").at(0);
      Generation gen;
      gen.text = choice.at("message").at("content").get<std::string>();
      gen.model_tag = tag();
      gen.latency_ms = elapsed_ms;
      if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
          choice["logprobs"].contains("content")) {
        for (const auto& item : choice["logprobs"]["content"]) {
          gen.token_logprobs.push_back(
              std::min(0.0, item.at("logprob").get<double>()));
        }
      }
      if (gen.token_logprobs.empty()) {
        const std::size_t n =
            std::max<std::size_t>(1, text::tokenize(gen.text).size());
        gen.token_logprobs.assign(n, config_.constant_logprob);
        gen.logprobs_estimated = true;
      }
      if (gen.text.empty()) gen.text = "(empty response)";
      return gen;
    } catch (const json::exception& e) {
      throw BackendError(std::string("http backend: malformed response: ") +
                         e.what());
    }
  }
  throw BackendError("http backend: exhausted retries (" + last_error + ")");
}

}  // namespace cascade
