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
#include <optional>
#include <vector>

namespace cascade {

/// Probability floor applied before every log so degenerate inputs stay
/// finite.
constexpr double kProbFloor = 1e-12;

/// A sequence of per-step probability distributions over a shared
/// vocabulary (one row per step), optionally with gold token indices.
struct TokenDistributionSequence {
  Eigen::MatrixXd probs;  // steps x vocab; rows sum to 1
  std::optional<std::vector<int>> target_ids;
};

/// Throws ValidationError unless every row is a probability vector (within
/// 1e-9) over a vocabulary of size >= 2 and target ids are in range.
void validate_sequence(const TokenDistributionSequence& seq);

/// Negative log-likelihood of the gold tokens:
///   -sum_t log p_t[target_t].
double instruction_loss(const TokenDistributionSequence& local);

/// Token-level KL from the server to the local distribution, summed over
/// steps: sum_t sum_v pS log(pS / pL), with 0 log 0 = 0 and pL floored.
/// Nonnegative; zero iff the sequences agree (up to the floor).
double kd_loss(const TokenDistributionSequence& server,
               const TokenDistributionSequence& local);

/// instruction + lambda_kd * kd.
double combined_tuning_loss(double l_inst, double l_kd, double lambda_kd);

/// Weighted multi-objective cascade loss. The weights must satisfy
/// sum(w_i) + w_local + w_server = 1 within 1e-9; the server term is gated
/// by the step rule on logit_summary.
struct MultiObjLossConfig {
  std::vector<double> objective_weights;
  double w_local = 0.0;
  double w_server = 0.0;
  double threshold = 0.5;      // t in (0,1)
  double logit_summary = 0.0;  // answer-level confidence fed to the gate
};

/// Step gate: 0 when value > threshold, else 1 (equality yields 1).
double heaviside_gate(double value, double threshold);

double multi_objective_cascade_loss(const std::vector<double>& objective_losses,
                                    double l_local, double l_server,
                                    const MultiObjLossConfig& cfg);

/// Binary cross-entropy objective for the privacy prediction head:
/// -(y log p + (1-y) log(1-p)) with flooring.
double privacy_objective_loss(double predicted_private_prob,
                              bool gold_private);

}  // namespace cascade
