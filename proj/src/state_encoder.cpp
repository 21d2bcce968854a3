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

#include "cascade/state_encoder.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

namespace cascade {

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw ValidationError("quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

Vector4 privacy_features(const std::string& query,
                         const PrivateMemory& memory) {
  const auto matches = detect_private_tokens(query, memory);
  Vector4 e = Vector4::Zero();
  if (matches.empty()) return e;

  const auto tokens = text::tokenize(query);
  const double n_tokens = std::max<std::size_t>(1, tokens.size());

  double min_distance = 1.0;
  std::size_t covered = 0;
  for (const auto& m : matches) {
    min_distance = std::min(min_distance, m.distance);
    covered += m.token_count;
  }
  e[0] = static_cast<double>(matches.size()) / n_tokens;
  e[1] = 1.0 - min_distance;
  e[2] = static_cast<double>(covered) / n_tokens;
  e[3] = 1.0;
  return e;
}

Vector4 quality_features(const Generation& gen, const EncoderConfig& cfg) {
  if (gen.token_logprobs.empty()) {
    throw ValidationError("quality_features: generation has no token logprobs");
  }
  const double n = static_cast<double>(gen.token_logprobs.size());
  double mean = 0.0;
  double below = 0.0;
  for (double lp : gen.token_logprobs) {
    mean += lp;
    if (lp < cfg.logprob_floor) below += 1.0;
  }
  mean /= n;

  Vector4 e;
  e[0] = mean;
  e[1] = nearest_rank_quantile(gen.token_logprobs, cfg.quantile_q);
  e[2] = std::min(n, static_cast<double>(cfg.length_cap)) /
         static_cast<double>(cfg.length_cap);
  e[3] = below / n;
  return e;
}

State encode_state(const Vector4& privacy, const Vector4& quality) {
  if (!privacy.allFinite() || !quality.allFinite()) {
    throw ValidationError("encode_state: non-finite feature input");
  }
  State s;
  s << privacy, quality;
  return s;
}

}  // namespace cascade
