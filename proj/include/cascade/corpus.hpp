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
#include <optional>
#include <string>
#include <vector>

namespace cascade {

enum class TaskKind { qa, summarization };

std::string to_string(TaskKind t);
TaskKind task_from_string(const std::string& s);

/// One query with its gold answer and privacy annotations.
///
/// Invariants (enforced by validate()):
///   - every private_tokens entry occurs in `query` as a whole
///     (punctuation-stripped, case-insensitive) token phrase;
///   - gold_private is true iff private_tokens is nonempty.
struct Record {
  std::string id;
  std::string query;
  std::string gold_answer;
  TaskKind task = TaskKind::qa;
  std::vector<std::string> private_tokens;
  bool gold_private = false;
  // Synthetic-only latent in [0,1] driving the scripted local backend's
  // correctness; absent for corpora loaded from real annotations.
  std::optional<double> difficulty;

  bool operator==(const Record&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<Record> records;

  bool operator==(const Corpus&) const = default;
};

/// Difficulty distribution for synthetic generation. `bimodal` draws `high`
/// with probability p_high, else `low`; `uniform` draws from [0,1); `fixed`
/// always yields `value`. Each kind consumes exactly one double from the
/// record's substream so draw sequences stay alignable.
struct DifficultySpec {
  enum class Kind { fixed, uniform, bimodal };
  Kind kind = Kind::bimodal;
  double value = 0.5;   // fixed
  double low = 0.1;     // bimodal
  double high = 0.9;    // bimodal
  double p_high = 0.5;  // bimodal
};

struct SynthConfig {
  std::string name = "synthetic";
  int n_records = 0;
  double privacy_fraction = 0.0;
  std::vector<std::string> lexicon;  // entity names injected verbatim
  DifficultySpec difficulty;
};

/// Throws ValidationError naming the record id on any invariant violation.
void validate_record(const Record& rec);

/// Loads a UTF-8 JSONL corpus (one Record object per line). Parse failures
/// raise ParseError with the 1-based line number; invariant violations raise
/// ValidationError naming the record id. An empty file yields an empty
/// corpus.
Corpus load_corpus(const std::string& path);

/// Writes the corpus in the same JSONL schema load_corpus reads.
void save_corpus(const Corpus& corpus, const std::string& path);

std::string record_to_json_line(const Record& rec);
Record record_from_json_line(const std::string& line);

/// Deterministic synthetic QA corpus: pure function of (config, seed).
///
/// Record i draws from SplitMix64(substream_seed(seed, i)) in this order:
///   1. u_priv = next_double(); record is private iff u_priv < privacy_fraction
///   2. one double for the difficulty spec
///   3. operand a = 2 + next_below(98)
///   4. operand b = 1 + next_below(a - 1)
///   5. if private: name index n1 = next_below(L); if L >= 2 a second
///      distinct index (n1 + 1 + next_below(L - 1)) % L.
Corpus generate_synthetic_corpus(const SynthConfig& config, std::uint64_t seed);

/// Parses a SynthConfig from a JSON file (schema in the README).
SynthConfig load_synth_config(const std::string& path);

}  // namespace cascade
