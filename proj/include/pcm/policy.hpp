// Copyright 2026 The PCM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Tabular softmax policies over small finite prompt/response spaces. The
// optimal policy for a reward r at temperature tau reweights a reference
// policy by exp(r/tau) and renormalizes per prompt. Two rewards induce the
// same optimal policy exactly when, for every prompt, all pairwise reward
// differences between responses agree; adding a per-prompt offset to the
// reward therefore never changes the policy. These spaces are capped at 64
// states per axis because the module exists for verification, not scale.

#ifndef PCM_POLICY_HPP_
#define PCM_POLICY_HPP_

#include <cmath>
#include <cstddef>

#include "pcm/errors.hpp"
#include "pcm/matrix.hpp"

namespace pcm {

constexpr std::size_t kMaxPolicyStates = 64;

// rewards(x, y) = reward of response y for prompt x.
struct TabularReward {
  Matrix values;  // X x Y
};

// probs(x, y) = probability of response y given prompt x; rows sum to one.
struct TabularPolicy {
  Matrix probs;  // X x Y
};

inline void validate_policy_shape(const Matrix& values) {
  if (values.rows() == 0 || values.cols() == 0)
    throw ContractError("policy tables must be nonempty");
  if (values.rows() > kMaxPolicyStates || values.cols() > kMaxPolicyStates)
    throw ContractError("policy tables are capped at 64 states per axis");
  if (!all_finite(values)) throw ContractError("policy tables must be finite");
}

// pi(y|x) proportional to ref(y|x) * exp(r(x,y)/tau). The max trick keeps
// the exponentials in range for any reward scale.
inline TabularPolicy optimal_policy(const TabularReward& reward,
                                    const TabularPolicy& reference, double tau) {
  validate_policy_shape(reward.values);
  validate_policy_shape(reference.probs);
  if (reward.values.rows() != reference.probs.rows() ||
      reward.values.cols() != reference.probs.cols())
    throw ContractError("reward and reference policy shapes differ");
  if (!(tau > 0.0)) throw ContractError("temperature must be positive");

  const std::size_t x_count = reward.values.rows(), y_count = reward.values.cols();
  TabularPolicy out{Matrix(x_count, y_count)};
  for (std::size_t x = 0; x < x_count; ++x) {
    double max_score = -1e300;
    for (std::size_t y = 0; y < y_count; ++y) {
      if (!(reference.probs(x, y) > 0.0))
        throw ContractError("reference policy must be strictly positive");
      max_score = std::max(max_score, reward.values(x, y) / tau);
    }
    double z = 0.0;
    for (std::size_t y = 0; y < y_count; ++y) {
      const double w = reference.probs(x, y) * std::exp(reward.values(x, y) / tau - max_score);
      out.probs(x, y) = w;
      z += w;
    }
    for (std::size_t y = 0; y < y_count; ++y) out.probs(x, y) /= z;
  }
  return out;
}

// True exactly when the two rewards induce identical optimal policies for
// every reference and temperature: all pairwise differences must match.
inline bool same_policy(const TabularReward& r1, const TabularReward& r2,
                        double tol = 1e-9) {
  validate_policy_shape(r1.values);
  validate_policy_shape(r2.values);
  if (r1.values.rows() != r2.values.rows() || r1.values.cols() != r2.values.cols())
    throw ContractError("reward shapes differ");
  for (std::size_t x = 0; x < r1.values.rows(); ++x)
    for (std::size_t y = 0; y < r1.values.cols(); ++y)
      for (std::size_t z = y + 1; z < r1.values.cols(); ++z) {
        const double d1 = r1.values(x, y) - r1.values(x, z);
        const double d2 = r2.values(x, y) - r2.values(x, z);
        if (std::fabs(d1 - d2) > tol) return false;
      }
  return true;
}

}  // namespace pcm

#endif  // PCM_POLICY_HPP_
