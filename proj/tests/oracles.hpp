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

// Test-only reference implementations, kept independent of the library
// code paths they check: the edit-distance oracle uses the full DP matrix,
// and the loss oracles evaluate the formulas directly in long double.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace oracle {

// Full-matrix Levenshtein (insert/delete/substitute, unit costs).
inline std::size_t levenshtein(const std::string& a, const std::string& b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  std::vector<std::vector<std::size_t>> d(m + 1,
                                          std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 0; i <= m; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= n; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[m][n];
}

inline double normalized_levenshtein(const std::string& a,
                                     const std::string& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

// Direct long-double evaluation of the token-level losses.
inline double instruction_loss(const std::vector<std::vector<double>>& probs,
                               const std::vector<int>& targets) {
  long double loss = 0.0L;
  for (std::size_t t = 0; t < probs.size(); ++t) {
    long double p = probs[t][static_cast<std::size_t>(targets[t])];
    if (p < 1e-12L) p = 1e-12L;
    loss -= std::log(p);
  }
  return static_cast<double>(loss);
}

inline double kd_loss(const std::vector<std::vector<double>>& server,
                      const std::vector<std::vector<double>>& local) {
  long double loss = 0.0L;
  for (std::size_t t = 0; t < server.size(); ++t) {
    for (std::size_t v = 0; v < server[t].size(); ++v) {
      const long double ps = server[t][v];
      if (ps <= 0.0L) continue;
      long double pl = local[t][v];
      if (pl < 1e-12L) pl = 1e-12L;
      loss += ps * std::log(ps / pl);
    }
  }
  return static_cast<double>(loss);
}

inline double combined_tuning_loss(double l_inst, double l_kd,
                                   double lambda_kd) {
  return static_cast<double>(static_cast<long double>(l_inst) +
                             static_cast<long double>(lambda_kd) *
                                 static_cast<long double>(l_kd));
}

inline double multi_objective_cascade_loss(
    const std::vector<double>& objective_losses,
    const std::vector<double>& weights, double w_local, double l_local,
    double w_server, double l_server, double logit_summary, double threshold) {
  const long double alpha = logit_summary > threshold ? 0.0L : 1.0L;
  long double loss = 0.0L;
  for (std::size_t i = 0; i < objective_losses.size(); ++i) {
    loss += static_cast<long double>(weights[i]) * objective_losses[i];
  }
  loss += static_cast<long double>(w_local) * l_local;
  loss += alpha * static_cast<long double>(w_server) * l_server;
  return static_cast<double>(loss);
}

inline double bce(double p, bool gold) {
  long double q = p;
  if (q < 1e-12L) q = 1e-12L;
  if (q > 1.0L - 1e-12L) q = 1.0L - 1e-12L;
  return static_cast<double>(gold ? -std::log(q) : -std::log(1.0L - q));
}

}  // namespace oracle
