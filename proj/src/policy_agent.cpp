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

#include "cascade/policy_agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "cascade/errors.hpp"

namespace cascade {

using nlohmann::ordered_json;

namespace {

constexpr double kInitRange = 0.1;

Eigen::MatrixXd uniform_matrix(int rows, int cols, SplitMix64& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.next_uniform(-kInitRange, kInitRange);
    }
  }
  return m;
}

void check_state(const State& state) {
  if (!state.allFinite()) {
    throw ValidationError("policy/value forward: non-finite state");
  }
}

Eigen::VectorXd hidden_activation(const Eigen::MatrixXd& w1,
                                  const Eigen::VectorXd& b1,
                                  const State& state) {
  return ((w1 * state + b1).array().tanh()).matrix();
}

Vector3 log_softmax(const Vector3& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

}  // namespace

PolicyParams init_policy(int hidden, SplitMix64& rng) {
  if (hidden < 1) throw ConfigError("hidden layer width must be >= 1");
  PolicyParams p;
  p.w1 = uniform_matrix(hidden, kStateDim, rng);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.w2 = uniform_matrix(kNumActions, hidden, rng);
  p.b2 = Eigen::VectorXd::Zero(kNumActions);
  return p;
}

ValueParams init_value(int hidden, SplitMix64& rng) {
  if (hidden < 1) throw ConfigError("hidden layer width must be >= 1");
  ValueParams v;
  v.w1 = uniform_matrix(hidden, kStateDim, rng);
  v.b1 = Eigen::VectorXd::Zero(hidden);
  v.w2 = uniform_matrix(1, hidden, rng);
  v.b2 = 0.0;
  return v;
}

Vector3 policy_log_forward(const PolicyParams& params, const State& state) {
  check_state(state);
  const Eigen::VectorXd h = hidden_activation(params.w1, params.b1, state);
  const Vector3 logits = params.w2 * h + params.b2;
  return log_softmax(logits);
}

Vector3 policy_forward(const PolicyParams& params, const State& state) {
  return policy_log_forward(params, state).array().exp();
}

double value_forward(const ValueParams& params, const State& state) {
  check_state(state);
  const Eigen::VectorXd h = hidden_activation(params.w1, params.b1, state);
  return params.w2.dot(h) + params.b2;
}

Action sample_action(const Vector3& dist, SplitMix64& rng) {
  if (!dist.allFinite() || dist.minCoeff() < 0.0 ||
      std::abs(dist.sum() - 1.0) > 1e-6) {
    throw ValidationError("sample_action: invalid action distribution");
  }
  const double u = rng.next_double();
  double cum = 0.0;
  for (int i = 0; i < kNumActions; ++i) {
    cum += dist[i];
    if (u < cum) return static_cast<Action>(i);
  }
  return static_cast<Action>(kNumActions - 1);
}

Action greedy_action(const Vector3& dist) {
  int best = 0;
  for (int i = 1; i < kNumActions; ++i) {
    if (dist[i] > dist[best]) best = i;
  }
  return static_cast<Action>(best);
}

double compute_advantage(double reward, double value) {
  return reward - value;
}

double entropy(const Vector3& dist) {
  double h = 0.0;
  for (int i = 0; i < kNumActions; ++i) {
    if (dist[i] > 0.0) h -= dist[i] * std::log(dist[i]);
  }
  return h;
}

namespace {

struct PolicyEval {
  double objective = 0.0;
  PolicyParams grad;
  double mean_entropy = 0.0;
};

PolicyEval eval_policy(const PolicyParams& params,
                       const std::vector<Transition>& batch,
                       const std::vector<double>& advantages,
                       const TrainConfig& cfg, bool want_grad) {
  const int hidden = static_cast<int>(params.w1.rows());
  PolicyEval out;
  if (want_grad) {
    out.grad.w1 = Eigen::MatrixXd::Zero(hidden, kStateDim);
    out.grad.b1 = Eigen::VectorXd::Zero(hidden);
    out.grad.w2 = Eigen::MatrixXd::Zero(kNumActions, hidden);
    out.grad.b2 = Eigen::VectorXd::Zero(kNumActions);
  }
  const double n = static_cast<double>(batch.size());

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i];
    const double adv = advantages[i];
    const int a = static_cast<int>(t.action);

    const Eigen::VectorXd h = hidden_activation(params.w1, params.b1, t.state);
    const Vector3 logits = params.w2 * h + params.b2;
    const Vector3 logp = log_softmax(logits);
    const Vector3 p = logp.array().exp();
    const double ent = entropy(p);
    out.mean_entropy += ent / n;

    double surrogate;
    Vector3 g2 = Vector3::Zero();  // d(surrogate)/d(logits)
    if (cfg.clip_epsilon > 0.0) {
      const double ratio = std::exp(logp[a] - t.logprob_at_collection);
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip_epsilon,
                                        1.0 + cfg.clip_epsilon);
      surrogate = std::min(ratio * adv, clipped * adv);
      const bool active = (adv >= 0.0 && ratio <= 1.0 + cfg.clip_epsilon) ||
                          (adv < 0.0 && ratio >= 1.0 - cfg.clip_epsilon);
      if (active) {
        g2 = ratio * adv * (Vector3::Unit(a) - p);
      }
    } else {
      surrogate = adv * logp[a];
      g2 = adv * (Vector3::Unit(a) - p);
    }
    out.objective += (surrogate + cfg.entropy_bonus * ent) / n;

    if (want_grad) {
      // d(entropy)/d(logits) = -p .* (log p + H)
      const Vector3 gent =
          (-p.array() * (logp.array() + ent)).matrix();
      const Vector3 gtot = (g2 + cfg.entropy_bonus * gent) / n;
      out.grad.w2.noalias() += gtot * h.transpose();
      out.grad.b2 += gtot;
      const Eigen::VectorXd g1 =
          (params.w2.transpose() * gtot).array() * (1.0 - h.array().square());
      out.grad.w1.noalias() += g1 * t.state.transpose();
      out.grad.b1 += g1;
    }
  }
  return out;
}

}  // namespace

double policy_objective(const PolicyParams& params,
                        const std::vector<Transition>& batch,
                        const std::vector<double>& advantages,
                        const TrainConfig& cfg) {
  if (batch.empty() || batch.size() != advantages.size()) {
    throw Error("policy_objective: empty batch or advantage mismatch");
  }
  return eval_policy(params, batch, advantages, cfg, false).objective;
}

std::pair<double, PolicyParams> policy_objective_and_gradient(
    const PolicyParams& params, const std::vector<Transition>& batch,
    const std::vector<double>& advantages, const TrainConfig& cfg) {
  if (batch.empty() || batch.size() != advantages.size()) {
    throw Error("policy gradient: empty batch or advantage mismatch");
  }
  PolicyEval ev = eval_policy(params, batch, advantages, cfg, true);
  return {ev.objective, std::move(ev.grad)};
}

double value_loss(const ValueParams& params,
                  const std::vector<Transition>& batch) {
  if (batch.empty()) throw Error("value_loss: empty batch");
  double loss = 0.0;
  for (const Transition& t : batch) {
    const double d = value_forward(params, t.state) - t.reward;
    loss += d * d;
  }
  return loss / static_cast<double>(batch.size());
}

std::pair<double, ValueParams> value_loss_and_gradient(
    const ValueParams& params, const std::vector<Transition>& batch) {
  if (batch.empty()) throw Error("value gradient: empty batch");
  const int hidden = static_cast<int>(params.w1.rows());
  ValueParams grad;
  grad.w1 = Eigen::MatrixXd::Zero(hidden, kStateDim);
  grad.b1 = Eigen::VectorXd::Zero(hidden);
  grad.w2 = Eigen::RowVectorXd::Zero(hidden);
  grad.b2 = 0.0;
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;

  for (const Transition& t : batch) {
    const Eigen::VectorXd h = hidden_activation(params.w1, params.b1, t.state);
    const double v = params.w2.dot(h) + params.b2;
    const double d = v - t.reward;
    loss += d * d / n;
    const double gv = 2.0 * d / n;
    grad.w2.noalias() += gv * h.transpose();
    grad.b2 += gv;
    const Eigen::VectorXd g1 =
        (params.w2.transpose() * gv).array() * (1.0 - h.array().square());
    grad.w1.noalias() += g1 * t.state.transpose();
    grad.b1 += g1;
  }
  return {loss, std::move(grad)};
}

UpdateStats update(PolicyParams& policy, ValueParams& value,
                   const std::vector<Transition>& batch,
                   const TrainConfig& cfg) {
  if (batch.empty()) throw Error("update: empty batch");

  UpdateStats stats;
  std::vector<double> advantages(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double v = value_forward(value, batch[i].state);
    advantages[i] = compute_advantage(batch[i].reward, v);
    stats.mean_reward += batch[i].reward / batch.size();
    stats.mean_advantage += advantages[i] / batch.size();
  }

  PolicyEval ev = eval_policy(policy, batch, advantages, cfg, true);
  const double objective = ev.objective;
  PolicyParams& pgrad = ev.grad;
  auto [vloss, vgrad] = value_loss_and_gradient(value, batch);

  const double pnorm = std::sqrt(
      pgrad.w1.squaredNorm() + pgrad.b1.squaredNorm() +
      pgrad.w2.squaredNorm() + pgrad.b2.squaredNorm());
  const double vnorm =
      std::sqrt(vgrad.w1.squaredNorm() + vgrad.b1.squaredNorm() +
                vgrad.w2.squaredNorm() + vgrad.b2 * vgrad.b2);
  if (!std::isfinite(pnorm) || !std::isfinite(vnorm)) {
    throw Error("update: non-finite gradient (policy norm " +
                std::to_string(pnorm) + ", value norm " +
                std::to_string(vnorm) + ")");
  }

  // Ascend the policy surrogate, descend the value error.
  policy.w1 += cfg.eta * pgrad.w1;
  policy.b1 += cfg.eta * pgrad.b1;
  policy.w2 += cfg.eta * pgrad.w2;
  policy.b2 += cfg.eta * pgrad.b2;
  value.w1 -= cfg.value_eta * vgrad.w1;
  value.b1 -= cfg.value_eta * vgrad.b1;
  value.w2 -= cfg.value_eta * vgrad.w2;
  value.b2 -= cfg.value_eta * vgrad.b2;

  stats.policy_objective = objective;
  stats.value_loss = vloss;
  stats.policy_grad_norm = pnorm;
  stats.value_grad_norm = vnorm;
  stats.mean_entropy = ev.mean_entropy;
  return stats;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kFormatName = "cascade-params";
constexpr int kFormatVersion = 1;

std::vector<double> to_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Eigen::MatrixXd from_row_major(const std::vector<double>& v, int rows,
                               int cols, const std::string& what) {
  if (v.size() != static_cast<std::size_t>(rows) * cols) {
    throw ValidationError("params file: " + what + " has " +
                          std::to_string(v.size()) + " values, expected " +
                          std::to_string(rows * cols));
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = v[k++];
  }
  return m;
}

}  // namespace

void save_params(const std::string& path, const PolicyParams& policy,
                 const ValueParams& value) {
  const int hidden = static_cast<int>(policy.w1.rows());
  ordered_json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["input_dim"] = kStateDim;
  j["hidden_dim"] = hidden;
  j["num_actions"] = kNumActions;
  j["policy"] = {{"w1", to_row_major(policy.w1)},
                 {"b1", std::vector<double>(policy.b1.begin(), policy.b1.end())},
                 {"w2", to_row_major(policy.w2)},
                 {"b2", std::vector<double>(policy.b2.begin(), policy.b2.end())}};
  j["value"] = {{"w1", to_row_major(value.w1)},
                {"b1", std::vector<double>(value.b1.begin(), value.b1.end())},
                {"w2", to_row_major(value.w2)},
                {"b2", value.b2}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write params file: " + path);
  out << j.dump(2) << "\n";
}

std::pair<PolicyParams, ValueParams> load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open params file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.value("format", std::string()) != kFormatName ||
      j.value("version", -1) != kFormatVersion) {
    throw ValidationError("params file: unsupported format or version");
  }
  if (j.value("input_dim", -1) != kStateDim ||
      j.value("num_actions", -1) != kNumActions) {
    throw ValidationError("params file: shape header mismatch");
  }
  const int hidden = j.value("hidden_dim", -1);
  if (hidden < 1) throw ValidationError("params file: bad hidden_dim");

  auto vec = [](const ordered_json& node) {
    return node.get<std::vector<double>>();
  };
  PolicyParams p;
  p.w1 = from_row_major(vec(j.at("policy").at("w1")), hidden, kStateDim,
                        "policy.w1");
  p.w2 = from_row_major(vec(j.at("policy").at("w2")), kNumActions, hidden,
                        "policy.w2");
  const auto pb1 = vec(j.at("policy").at("b1"));
  const auto pb2 = vec(j.at("policy").at("b2"));
  if (pb1.size() != static_cast<std::size_t>(hidden) ||
      pb2.size() != static_cast<std::size_t>(kNumActions)) {
    throw ValidationError("params file: policy bias shape mismatch");
  }
  p.b1 = Eigen::Map<const Eigen::VectorXd>(pb1.data(), hidden);
  p.b2 = Eigen::Map<const Eigen::VectorXd>(pb2.data(), kNumActions);

  ValueParams v;
  v.w1 = from_row_major(vec(j.at("value").at("w1")), hidden, kStateDim,
                        "value.w1");
  const auto vw2 = vec(j.at("value").at("w2"));
  if (vw2.size() != static_cast<std::size_t>(hidden)) {
    throw ValidationError("params file: value.w2 shape mismatch");
  }
  v.w2 = Eigen::Map<const Eigen::RowVectorXd>(vw2.data(), hidden);
  const auto vb1 = vec(j.at("value").at("b1"));
  if (vb1.size() != static_cast<std::size_t>(hidden)) {
    throw ValidationError("params file: value.b1 shape mismatch");
  }
  v.b1 = Eigen::Map<const Eigen::VectorXd>(vb1.data(), hidden);
  v.b2 = j.at("value").at("b2").get<double>();
  return {std::move(p), std::move(v)};
}

// ---------------------------------------------------------------------------
// Flat views (finite-difference checks)
// ---------------------------------------------------------------------------

Eigen::VectorXd flatten(const PolicyParams& p) {
  const auto w1 = to_row_major(p.w1);
  const auto w2 = to_row_major(p.w2);
  Eigen::VectorXd out(static_cast<Eigen::Index>(w1.size()) + p.b1.size() +
                      static_cast<Eigen::Index>(w2.size()) + p.b2.size());
  Eigen::Index k = 0;
  for (double x : w1) out[k++] = x;
  for (Eigen::Index i = 0; i < p.b1.size(); ++i) out[k++] = p.b1[i];
  for (double x : w2) out[k++] = x;
  for (Eigen::Index i = 0; i < p.b2.size(); ++i) out[k++] = p.b2[i];
  return out;
}

Eigen::VectorXd flatten(const ValueParams& p) {
  const auto w1 = to_row_major(p.w1);
  Eigen::VectorXd out(static_cast<Eigen::Index>(w1.size()) + p.b1.size() +
                      p.w2.size() + 1);
  Eigen::Index k = 0;
  for (double x : w1) out[k++] = x;
  for (Eigen::Index i = 0; i < p.b1.size(); ++i) out[k++] = p.b1[i];
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) out[k++] = p.w2[i];
  out[k++] = p.b2;
  return out;
}

PolicyParams unflatten_policy(const Eigen::VectorXd& v, int hidden) {
  const Eigen::Index expect = static_cast<Eigen::Index>(hidden) * kStateDim +
                              hidden +
                              static_cast<Eigen::Index>(kNumActions) * hidden +
                              kNumActions;
  if (v.size() != expect) {
    throw ValidationError("unflatten_policy: size mismatch");
  }
  PolicyParams p;
  Eigen::Index k = 0;
  p.w1 = Eigen::MatrixXd(hidden, kStateDim);
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < kStateDim; ++c) p.w1(r, c) = v[k++];
  p.b1 = v.segment(k, hidden);
  k += hidden;
  p.w2 = Eigen::MatrixXd(kNumActions, hidden);
  for (int r = 0; r < kNumActions; ++r)
    for (int c = 0; c < hidden; ++c) p.w2(r, c) = v[k++];
  p.b2 = v.segment(k, kNumActions);
  return p;
}

ValueParams unflatten_value(const Eigen::VectorXd& v, int hidden) {
  const Eigen::Index expect =
      static_cast<Eigen::Index>(hidden) * kStateDim + hidden + hidden + 1;
  if (v.size() != expect) {
    throw ValidationError("unflatten_value: size mismatch");
  }
  ValueParams p;
  Eigen::Index k = 0;
  p.w1 = Eigen::MatrixXd(hidden, kStateDim);
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < kStateDim; ++c) p.w1(r, c) = v[k++];
  p.b1 = v.segment(k, hidden);
  k += hidden;
  p.w2 = v.segment(k, hidden).transpose();
  k += hidden;
  p.b2 = v[k];
  return p;
}

}  // namespace cascade
