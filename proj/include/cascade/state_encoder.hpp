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

#include <Eigen/Dense>
#include <string>

#include "cascade/backends.hpp"
#include "cascade/privacy_memory.hpp"

namespace cascade {

using Vector4 = Eigen::Matrix<double, 4, 1>;
using State = Eigen::Matrix<double, 8, 1>;

constexpr int kPrivacyFeatureDim = 4;
constexpr int kQualityFeatureDim = 4;
constexpr int kStateDim = kPrivacyFeatureDim + kQualityFeatureDim;

struct EncoderConfig {
  double quantile_q = 0.1;      // lower-tail quantile of token log-probs
  double logprob_floor = -2.0;  // tokens below this count as "uncertain"
  int length_cap = 256;         // answer-length saturation, in tokens
};

/// Privacy feature vector, derived solely from detect_private_tokens:
///   [0] matched spans / query token count
///   [1] max similarity: 1 - min normalized distance over matches
///   [2] matched-token density: covered query tokens / query token count
///   [3] any-match flag (0 or 1)
/// All zero iff the memory matches nothing in the query.
Vector4 privacy_features(const std::string& query,
                         const PrivateMemory& memory);

/// Quality feature vector from the local generation:
///   [0] mean token log-probability
///   [1] nearest-rank q-quantile of token log-probabilities
///   [2] min(token count, cap) / cap
///   [3] fraction of tokens with log-probability < logprob_floor
/// Throws ValidationError when the generation carries no token
/// log-probabilities.
Vector4 quality_features(const Generation& gen, const EncoderConfig& cfg);

/// Concatenation [e_p, e_q]; throws ValidationError on non-finite input.
State encode_state(const Vector4& privacy, const Vector4& quality);

/// Nearest-rank quantile of an unsorted sample: the ceil(q*n)-th smallest
/// value (1-based), clamped to the sample range. q in [0,1].
double nearest_rank_quantile(std::vector<double> values, double q);

}  // namespace cascade
