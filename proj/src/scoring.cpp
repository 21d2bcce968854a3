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

#include "cascade/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

using nlohmann::ordered_json;

std::string action_code(Action a) {
  switch (a) {
    case Action::keep_local: return "a1";
    case Action::defer: return "a2";
    case Action::mask_defer: return "a3";
  }
  return "a1";
}

std::string action_wire_name(Action a) {
  switch (a) {
    case Action::keep_local: return "local";
    case Action::defer: return "defer";
    case Action::mask_defer: return "mask_defer";
  }
  return "local";
}

std::string to_string(QualityKind k) {
  return k == QualityKind::exact_match ? "exact_match" : "rouge_sum";
}

QualityKind quality_kind_from_string(const std::string& s) {
  if (s == "exact_match") return QualityKind::exact_match;
  if (s == "rouge_sum") return QualityKind::rouge_sum;
  throw ConfigError("unknown quality kind: '" + s + "'");
}

namespace {

std::string normalize_answer(const std::string& s) {
  std::string t = text::lower(text::trim(s));
  while (!t.empty() && std::ispunct(static_cast<unsigned char>(t.back()))) {
    t.pop_back();
  }
  return text::trim(t);
}

std::optional<double> trailing_number(const std::string& s) {
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

std::vector<std::string> rouge_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(text::lower(s));
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double f1(double overlap, double n_answer, double n_gold) {
  if (overlap <= 0.0) return 0.0;
  const double p = overlap / n_answer;
  const double r = overlap / n_gold;
  return 2.0 * p * r / (p + r);
}

double rouge_n_f1(const std::vector<std::string>& answer,
                  const std::vector<std::string>& gold, std::size_t n) {
  if (answer.size() < n || gold.size() < n) {
    return answer == gold ? 1.0 : 0.0;
  }
  std::map<std::vector<std::string>, int> gold_counts;
  for (std::size_t i = 0; i + n <= gold.size(); ++i) {
    gold_counts[{gold.begin() + i, gold.begin() + i + n}]++;
  }
  double overlap = 0.0;
  std::map<std::vector<std::string>, int> used;
  for (std::size_t i = 0; i + n <= answer.size(); ++i) {
    std::vector<std::string> gram(answer.begin() + i, answer.begin() + i + n);
    auto it = gold_counts.find(gram);
    if (it != gold_counts.end() && used[gram] < it->second) {
      used[gram]++;
      overlap += 1.0;
    }
  }
  return f1(overlap, static_cast<double>(answer.size() - n + 1),
            static_cast<double>(gold.size() - n + 1));
}

double rouge_l_f1(const std::vector<std::string>& answer,
                  const std::vector<std::string>& gold) {
  const std::size_t m = answer.size();
  const std::size_t n = gold.size();
  std::vector<std::size_t> prev(n + 1, 0);
  std::vector<std::size_t> curr(n + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      curr[j] = answer[i - 1] == gold[j - 1]
                    ? prev[j - 1] + 1
                    : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return f1(static_cast<double>(prev[n]), static_cast<double>(m),
            static_cast<double>(n));
}

}  // namespace

double exact_match_quality(const std::string& answer,
                           const std::string& gold) {
  const std::string na = normalize_answer(answer);
  const std::string ng = normalize_answer(gold);
  const auto num_a = trailing_number(na);
  const auto num_g = trailing_number(ng);
  if (num_a && num_g) return *num_a == *num_g ? 1.0 : 0.0;
  return na == ng ? 1.0 : 0.0;
}

double rouge_sum(const std::string& answer, const std::string& gold) {
  const auto ta = rouge_tokens(answer);
  const auto tg = rouge_tokens(gold);
  if (ta.empty() || tg.empty()) return 0.0;
  const double r1 = rouge_n_f1(ta, tg, 1);
  const double r2 = rouge_n_f1(ta, tg, 2);
  const double rl = rouge_l_f1(ta, tg);
  return (r1 + r2 + rl) / 3.0;
}

double quality_score(const std::string& answer, const std::string& gold,
                     QualityKind kind) {
  return kind == QualityKind::exact_match ? exact_match_quality(answer, gold)
                                          : rouge_sum(answer, gold);
}

double privacy_score(Action action, int leaked_tokens,
                     int total_private_tokens) {
  if (leaked_tokens < 0 || total_private_tokens < 0 ||
      leaked_tokens > total_private_tokens) {
    throw ValidationError("privacy_score: inconsistent leak counts");
  }
  if (action == Action::keep_local && leaked_tokens != 0) {
    throw ValidationError("privacy_score: keep_local cannot leak");
  }
  if (total_private_tokens == 0) return 1.0;
  return 1.0 - static_cast<double>(leaked_tokens) /
                   static_cast<double>(total_private_tokens);
}

double compute_reward(double quality, double privacy,
                      const RewardConfig& cfg) {
  if (!std::isfinite(quality) || !std::isfinite(privacy) ||
      !std::isfinite(cfg.lambda)) {
    throw ValidationError("compute_reward: non-finite input");
  }
  return quality + cfg.lambda * privacy;
}

namespace {

void validate_outcome(const EpisodeOutcome& o) {
  if (o.action == Action::keep_local &&
      (o.sent_to_server || o.leaked_tokens != 0)) {
    throw ValidationError("outcome '" + o.record_id +
                          "': keep_local cannot contact the server");
  }
  if (o.leaked_tokens < 0 || o.leaked_tokens > o.total_private_tokens) {
    throw ValidationError("outcome '" + o.record_id +
                          "': leaked_tokens out of range");
  }
}

}  // namespace

MetricReport aggregate_metrics(const std::vector<EpisodeOutcome>& outcomes,
                               const Corpus& gold) {
  if (outcomes.size() != gold.records.size()) {
    throw ValidationError("aggregate_metrics: outcome count " +
                          std::to_string(outcomes.size()) +
                          " does not match corpus size " +
                          std::to_string(gold.records.size()));
  }
  MetricReport rep;
  std::size_t n_eff = 0;
  std::size_t n_safe_sent = 0;
  double sum_quality = 0.0;
  double sum_reward = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const EpisodeOutcome& o = outcomes[i];
    const Record& rec = gold.records[i];
    if (o.record_id != rec.id) {
      throw ValidationError("aggregate_metrics: outcome " +
                            std::to_string(i) + " id '" + o.record_id +
                            "' does not match record '" + rec.id + "'");
    }
    validate_outcome(o);
    ++rep.n;
    if (o.degraded) {
      ++rep.n_degraded;
      continue;
    }
    ++n_eff;
    if (!o.quality || !o.reward) {
      throw ValidationError("aggregate_metrics: outcome '" + o.record_id +
                            "' lacks quality/reward");
    }
    sum_quality += *o.quality;
    sum_reward += *o.reward;
    if (o.sent_to_server) {
      ++rep.n_sent;
      if (o.leaked_tokens == 0) ++n_safe_sent;
    }
    rep.leaked_tokens += o.leaked_tokens;
    rep.total_private_tokens += o.total_private_tokens;
    const bool predicted_private = o.action == Action::mask_defer;
    if (predicted_private && rec.gold_private) ++tp;
    if (predicted_private && !rec.gold_private) ++fp;
    if (!predicted_private && rec.gold_private) ++fn;
  }

  if (n_eff > 0) {
    rep.call_rate = static_cast<double>(rep.n_sent) / n_eff;
    rep.mean_quality = sum_quality / n_eff;
    rep.mean_reward = sum_reward / n_eff;
  }
  rep.safe_call_rate =
      rep.n_sent == 0 ? 1.0 : static_cast<double>(n_safe_sent) / rep.n_sent;
  rep.leakage_ratio =
      rep.total_private_tokens == 0
          ? 0.0
          : static_cast<double>(rep.leaked_tokens) / rep.total_private_tokens;
  rep.privacy_precision =
      (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
  rep.privacy_recall =
      (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn);
  return rep;
}

namespace {

ordered_json report_json(const MetricReport& r) {
  ordered_json j;
  j["n"] = r.n;
  j["n_degraded"] = r.n_degraded;
  j["n_sent"] = r.n_sent;
  j["call_rate"] = r.call_rate;
  j["safe_call_rate"] = r.safe_call_rate;
  j["mean_quality"] = r.mean_quality;
  j["mean_reward"] = r.mean_reward;
  j["leakage_ratio"] = r.leakage_ratio;
  j["privacy_precision"] = r.privacy_precision;
  j["privacy_recall"] = r.privacy_recall;
  j["leaked_tokens"] = r.leaked_tokens;
  j["total_private_tokens"] = r.total_private_tokens;
  return j;
}

}  // namespace

std::string metric_report_to_json(const MetricReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string metric_report_to_csv(const MetricReport& report) {
  const ordered_json j = report_json(report);
  std::ostringstream os;
  os << "metric,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    os << it.key() << "," << it.value().dump() << "\n";
  }
  return os.str();
}

std::string episodes_to_csv(const std::vector<EpisodeOutcome>& outcomes) {
  std::ostringstream os;
  os << "id,action,sent,leaked,total_private,quality,reward\n";
  for (const auto& o : outcomes) {
    os << o.record_id << "," << action_code(o.action) << ","
       << (o.sent_to_server ? 1 : 0) << "," << o.leaked_tokens << ","
       << o.total_private_tokens << ",";
    if (o.quality) os << ordered_json(*o.quality).dump();
    os << ",";
    if (o.reward) os << ordered_json(*o.reward).dump();
    os << "\n";
  }
  return os.str();
}

}  // namespace cascade
