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
#include <cstdint>
#include <string>
#include <vector>

#include "cascade/action.hpp"
#include "cascade/rng.hpp"
#include "cascade/state_encoder.hpp"

namespace cascade {

using Vector3 = Eigen::Vector3d;

/// Action network: state (8) -> tanh hidden (H) -> softmax over 3 actions.
struct PolicyParams {
  Eigen::MatrixXd w1;  // H x 8
  Eigen::VectorXd b1;  // H
  Eigen::MatrixXd w2;  // 3 x H
  Eigen::VectorXd b2;  // 3
};

/// State-value baseline: state (8) -> tanh hidden (H) -> scalar.
struct ValueParams {
  Eigen::MatrixXd w1;  // H x 8
  Eigen::VectorXd b1;  // H
  Eigen::RowVectorXd w2;  // 1 x H
  double b2 = 0.0;
};

/// One (state, action, reward) observation, with the action's
/// log-probability under the collecting policy for the clipped surrogate.
struct Transition {
  State state = State::Zero();
  Action action = Action::keep_local;
  double reward = 0.0;
  double logprob_at_collection = 0.0;
};

struct TrainConfig {
  double eta = 0.3;          // plain gradient step size for the policy
  double value_eta = 0.05;   // step size for the value regression; must stay
                             // under 2 / (2 * hidden) or the quadratic loss
                             // diverges once the hidden layer saturates
  double gamma = 1.0;        // episodes are one step long; kept for the
                             // discounted-return formulation
  int batch_size = 0;        // records per iteration; 0 = full corpus pass
  int iterations = 60;
  double clip_epsilon = 0.0; // > 0 switches to the clipped-ratio surrogate
  double entropy_bonus = 0.005;
  int hidden = 16;
  std::uint64_t seed = 0;
};

/// Weights drawn uniform(-0.1, 0.1) from `rng` in documented order (w1 rows,
/// then w2 rows); biases start at zero.
PolicyParams init_policy(int hidden, SplitMix64& rng);
ValueParams init_value(int hidden, SplitMix64& rng);

/// Softmax action distribution; strictly positive, sums to 1.
Vector3 policy_forward(const PolicyParams& params, const State& state);

/// Log-probabilities of all actions (numerically stable log-softmax).
Vector3 policy_log_forward(const PolicyParams& params, const State& state);

double value_forward(const ValueParams& params, const State& state);

/// Inverse-CDF draw in fixed action order (a1, a2, a3). Throws
/// ValidationError when the distribution does not sum to 1 within 1e-6.
Action sample_action(const Vector3& dist, SplitMix64& rng);

/// Argmax with exact ties resolved to the lowest action index.
Action greedy_action(const Vector3& dist);

/// One-step episodes make Q(s, a) = r, so the advantage is r - V(s).
double compute_advantage(double reward, double value);

double entropy(const Vector3& dist);

struct UpdateStats {
  double mean_reward = 0.0;
  double mean_advantage = 0.0;
  double policy_objective = 0.0;  // advantage-weighted surrogate + entropy
  double value_loss = 0.0;        // mean squared error to reward
  double policy_grad_norm = 0.0;
  double value_grad_norm = 0.0;
  double mean_entropy = 0.0;
};

/// The scalar objective `update` ascends, with the advantages held fixed:
/// batch mean of the advantage-weighted log-likelihood (or clipped-ratio
/// surrogate when cfg.clip_epsilon > 0) plus cfg.entropy_bonus times the
/// mean policy entropy.
double policy_objective(const PolicyParams& params,
                        const std::vector<Transition>& batch,
                        const std::vector<double>& advantages,
                        const TrainConfig& cfg);

/// Same objective together with its analytic gradient (params-shaped).
std::pair<double, PolicyParams> policy_objective_and_gradient(
    const PolicyParams& params, const std::vector<Transition>& batch,
    const std::vector<double>& advantages, const TrainConfig& cfg);

/// Mean squared error of V(s) against the observed rewards.
double value_loss(const ValueParams& params,
                  const std::vector<Transition>& batch);

std::pair<double, ValueParams> value_loss_and_gradient(
    const ValueParams& params, const std::vector<Transition>& batch);

/// One plain-gradient step: policy ascends the surrogate, value descends
/// its squared error, advantages computed against the pre-update value
/// network. Throws Error on an empty batch or non-finite gradients.
UpdateStats update(PolicyParams& policy, ValueParams& value,
                   const std::vector<Transition>& batch,
                   const TrainConfig& cfg);

/// Versioned JSON parameter files (shape header + row-major weight arrays).
/// load_params rejects files whose shapes disagree with their header.
void save_params(const std::string& path, const PolicyParams& policy,
                 const ValueParams& value);
std::pair<PolicyParams, ValueParams> load_params(const std::string& path);

/// Flat row-major views used by the finite-difference checks.
Eigen::VectorXd flatten(const PolicyParams& p);
Eigen::VectorXd flatten(const ValueParams& p);
PolicyParams unflatten_policy(const Eigen::VectorXd& v, int hidden);
ValueParams unflatten_value(const Eigen::VectorXd& v, int hidden);

}  // namespace cascade
