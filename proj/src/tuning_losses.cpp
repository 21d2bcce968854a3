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

#include "cascade/tuning_losses.hpp"

#include <cmath>
#include <numeric>

#include "cascade/errors.hpp"

namespace cascade {

void validate_sequence(const TokenDistributionSequence& seq) {
  if (seq.probs.rows() < 1 || seq.probs.cols() < 2) {
    throw ValidationError(
        "distribution sequence needs >= 1 step over a vocabulary of >= 2");
  }
  for (Eigen::Index t = 0; t < seq.probs.rows(); ++t) {
    if (seq.probs.row(t).minCoeff() < 0.0) {
      throw ValidationError("distribution step " + std::to_string(t) +
                            " has a negative probability");
    }
    if (std::abs(seq.probs.row(t).sum() - 1.0) > 1e-9) {
      throw ValidationError("distribution step " + std::to_string(t) +
                            " does not sum to 1");
    }
  }
  if (seq.target_ids) {
    if (static_cast<Eigen::Index>(seq.target_ids->size()) != seq.probs.rows()) {
      throw ValidationError("target_ids length does not match step count");
    }
    for (int id : *seq.target_ids) {
      if (id < 0 || id >= seq.probs.cols()) {
        throw ValidationError("target id out of vocabulary range");
      }
    }
  }
}

double instruction_loss(const TokenDistributionSequence& local) {
  validate_sequence(local);
  if (!local.target_ids) {
    throw ValidationError("instruction_loss requires target_ids");
  }
  double loss = 0.0;
  for (Eigen::Index t = 0; t < local.probs.rows(); ++t) {
    const double p = std::max(local.probs(t, (*local.target_ids)[t]),
                              kProbFloor);
    loss -= std::log(p);
  }
  return loss;
}

double kd_loss(const TokenDistributionSequence& server,
               const TokenDistributionSequence& local) {
  validate_sequence(server);
  validate_sequence(local);
  if (server.probs.rows() != local.probs.rows() ||
      server.probs.cols() != local.probs.cols()) {
    throw ValidationError("kd_loss: sequence shapes do not match");
  }
  double loss = 0.0;
  for (Eigen::Index t = 0; t < server.probs.rows(); ++t) {
    for (Eigen::Index v = 0; v < server.probs.cols(); ++v) {
      const double ps = server.probs(t, v);
      if (ps <= 0.0) continue;  // 0 log 0 = 0
      const double pl = std::max(local.probs(t, v), kProbFloor);
      loss += ps * std::log(ps / pl);
    }
  }
  return loss;
}

double combined_tuning_loss(double l_inst, double l_kd, double lambda_kd) {
  if (!std::isfinite(l_inst) || !std::isfinite(l_kd) ||
      !std::isfinite(lambda_kd)) {
    throw ValidationError("combined_tuning_loss: non-finite input");
  }
  return l_inst + lambda_kd * l_kd;
}

double heaviside_gate(double value, double threshold) {
  return value > threshold ? 0.0 : 1.0;
}

double multi_objective_cascade_loss(const std::vector<double>& objective_losses,
                                    double l_local, double l_server,
                                    const MultiObjLossConfig& cfg) {
  if (cfg.objective_weights.size() != objective_losses.size()) {
    throw ValidationError(
        "multi_objective_cascade_loss: weight/loss count mismatch");
  }
  if (cfg.threshold <= 0.0 || cfg.threshold >= 1.0) {
    throw ValidationError("multi_objective_cascade_loss: threshold not in (0,1)");
  }
  const double weight_sum =
      std::accumulate(cfg.objective_weights.begin(),
                      cfg.objective_weights.end(), 0.0) +
      cfg.w_local + cfg.w_server;
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw ValidationError(
        "multi_objective_cascade_loss: weights must sum to 1, got " +
        std::to_string(weight_sum));
  }
  const double alpha = heaviside_gate(cfg.logit_summary, cfg.threshold);
  double loss = 0.0;
  for (std::size_t i = 0; i < objective_losses.size(); ++i) {
    loss += cfg.objective_weights[i] * objective_losses[i];
  }
  loss += cfg.w_local * l_local;
  loss += alpha * cfg.w_server * l_server;
  return loss;
}

double privacy_objective_loss(double predicted_private_prob,
                              bool gold_private) {
  const double p = std::min(std::max(predicted_private_prob, kProbFloor),
                            1.0 - kProbFloor);
  return gold_private ? -std::log(p) : -std::log(1.0 - p);
}

}  // namespace cascade
