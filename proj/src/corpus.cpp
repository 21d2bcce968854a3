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

#include "cascade/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/text.hpp"

namespace cascade {

using nlohmann::ordered_json;

std::string to_string(TaskKind t) {
  return t == TaskKind::qa ? "qa" : "summarization";
}

TaskKind task_from_string(const std::string& s) {
  if (s == "qa") return TaskKind::qa;
  if (s == "summarization") return TaskKind::summarization;
  throw ParseError("unknown task kind: '" + s + "'");
}

void validate_record(const Record& rec) {
  if (rec.id.empty()) throw ValidationError("record with empty id");
  if (rec.gold_private != !rec.private_tokens.empty()) {
    throw ValidationError("record '" + rec.id +
                          "': gold_private inconsistent with private_tokens");
  }
  for (const auto& tok : rec.private_tokens) {
    if (!text::contains_phrase(rec.query, tok)) {
      throw ValidationError("record '" + rec.id + "': private token '" + tok +
                            "' not found in query");
    }
  }
  if (rec.difficulty && (*rec.difficulty < 0.0 || *rec.difficulty > 1.0)) {
    throw ValidationError("record '" + rec.id + "': difficulty outside [0,1]");
  }
}

Record record_from_json_line(const std::string& line) {
  ordered_json j = ordered_json::parse(line);
  Record rec;
  rec.id = j.at("id").get<std::string>();
  rec.query = j.at("query").get<std::string>();
  rec.gold_answer = j.at("gold_answer").get<std::string>();
  rec.task = task_from_string(j.at("task").get<std::string>());
  rec.private_tokens = j.at("private_tokens").get<std::vector<std::string>>();
  rec.gold_private = j.at("gold_private").get<bool>();
  if (j.contains("difficulty") && !j["difficulty"].is_null()) {
    rec.difficulty = j["difficulty"].get<double>();
  }
  return rec;
}

std::string record_to_json_line(const Record& rec) {
  ordered_json j;
  j["id"] = rec.id;
  j["query"] = rec.query;
  j["gold_answer"] = rec.gold_answer;
  j["task"] = to_string(rec.task);
  j["private_tokens"] = rec.private_tokens;
  j["gold_private"] = rec.gold_private;
  if (rec.difficulty) j["difficulty"] = *rec.difficulty;
  return j.dump();
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  Corpus corpus;
  corpus.name = path;
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    Record rec;
    try {
      rec = record_from_json_line(line);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    validate_record(rec);
    if (!seen_ids.insert(rec.id).second) {
      throw ValidationError("record '" + rec.id + "': duplicate id (line " +
                            std::to_string(lineno) + ")");
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file: " + path);
  for (const auto& rec : corpus.records) {
    out << record_to_json_line(rec) << "\n";
  }
}

namespace {

double draw_difficulty(const DifficultySpec& spec, SplitMix64& rng) {
  const double u = rng.next_double();
  switch (spec.kind) {
    case DifficultySpec::Kind::fixed:
      return spec.value;
    case DifficultySpec::Kind::uniform:
      return u;
    case DifficultySpec::Kind::bimodal:
      return u < spec.p_high ? spec.high : spec.low;
  }
  return spec.value;
}

std::string format_id(int i) {
  std::ostringstream os;
  os << "synth-";
  std::string digits = std::to_string(i);
  for (std::size_t k = digits.size(); k < 6; ++k) os << '0';
  os << digits;
  return os.str();
}

}  // namespace

Corpus generate_synthetic_corpus(const SynthConfig& config,
                                 std::uint64_t seed) {
  if (config.n_records < 1) {
    throw ConfigError("synthetic corpus needs n_records >= 1");
  }
  if (config.privacy_fraction < 0.0 || config.privacy_fraction > 1.0) {
    throw ConfigError("privacy_fraction must lie in [0,1]");
  }
  if (config.lexicon.empty() && config.privacy_fraction > 0.0) {
    throw ConfigError("privacy_fraction > 0 requires a nonempty lexicon");
  }

  Corpus corpus;
  corpus.name = config.name;
  corpus.records.reserve(static_cast<std::size_t>(config.n_records));
  const std::size_t lex = config.lexicon.size();

  for (int i = 0; i < config.n_records; ++i) {
    SplitMix64 rng(substream_seed(seed, static_cast<std::uint64_t>(i)));
    const bool is_private = rng.next_double() < config.privacy_fraction;
    const double difficulty = draw_difficulty(config.difficulty, rng);
    const std::uint64_t a = 2 + rng.next_below(98);
    const std::uint64_t b = 1 + rng.next_below(a - 1);

    Record rec;
    rec.id = format_id(i);
    rec.task = TaskKind::qa;
    rec.difficulty = difficulty;
    std::ostringstream q;
    if (is_private) {
      const std::uint64_t i1 = rng.next_below(lex);
      const std::string& n1 = config.lexicon[i1];
      if (lex >= 2) {
        const std::string& n2 =
            config.lexicon[(i1 + 1 + rng.next_below(lex - 1)) % lex];
        q << n1 << " owes " << n2 << " " << a << " dollars and pays back " << b
          << " dollars. How many dollars does " << n1 << " still owe " << n2
          << "?";
        rec.private_tokens = {n1, n2};
      } else {
        q << n1 << " has " << a << " stamps and gives away " << b
          << " stamps. How many stamps does " << n1 << " have left?";
        rec.private_tokens = {n1};
      }
      rec.gold_answer = std::to_string(a - b);
      rec.gold_private = true;
    } else {
      q << "A shopper has " << a << " apples and buys " << b
        << " more. How many apples does the shopper have now?";
      rec.gold_answer = std::to_string(a + b);
      rec.gold_private = false;
    }
    rec.query = q.str();
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

SynthConfig load_synth_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synthetic config: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  SynthConfig cfg;
  cfg.name = j.value("name", std::string("synthetic"));
  cfg.n_records = j.at("n_records").get<int>();
  cfg.privacy_fraction = j.at("privacy_fraction").get<double>();
  cfg.lexicon = j.value("lexicon", std::vector<std::string>{});
  if (j.contains("difficulty")) {
    const auto& d = j["difficulty"];
    const std::string kind = d.value("kind", std::string("bimodal"));
    if (kind == "fixed") {
      cfg.difficulty.kind = DifficultySpec::Kind::fixed;
      cfg.difficulty.value = d.value("value", 0.5);
    } else if (kind == "uniform") {
      cfg.difficulty.kind = DifficultySpec::Kind::uniform;
    } else if (kind == "bimodal") {
      cfg.difficulty.kind = DifficultySpec::Kind::bimodal;
      cfg.difficulty.low = d.value("low", 0.1);
      cfg.difficulty.high = d.value("high", 0.9);
      cfg.difficulty.p_high = d.value("p_high", 0.5);
    } else {
      throw ConfigError("unknown difficulty kind: '" + kind + "'");
    }
  }
  return cfg;
}

}  // namespace cascade
