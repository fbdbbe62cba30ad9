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
// Attack target constructors: each produces the adversarial preference
// vector theta_a an attacker wants the learned reward model to reflect.

#ifndef PCM_ATTACK_HPP_
#define PCM_ATTACK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pcm/dataset.hpp"
#include "pcm/errors.hpp"
#include "pcm/rng.hpp"

namespace pcm {

struct AttackTarget {
  Vector theta_a;
  std::string description;  // method plus parameters, for provenance
};

// Flips each pair's preference to its complement independently with
// probability p, using its own stream so results do not depend on how the
// dataset was produced.
inline AttackTarget random_flip_target(const PreferenceDataset& ds, double p,
                                       std::uint64_t seed) {
  validate_dataset(ds);
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("flip probability must lie in [0,1]");
  Rng rng(seed);
  AttackTarget out;
  out.theta_a = ds.theta_o;
  for (std::size_t i = 0; i < ds.big_n; ++i)
    if (rng.next_uniform() < p) out.theta_a[i] = 1.0 - ds.theta_o[i];
  char buf[96];
  std::snprintf(buf, sizeof(buf), "random_flip(p=%g,seed=%llu)", p,
                static_cast<unsigned long long>(seed));
  out.description = buf;
  return out;
}

// Margin-ranked first-feature attack. Eligible pairs are those where the
// currently dispreferred response has the strictly larger first feature;
// the margin is that excess. The top ceil(a*N) candidates by margin pass a
// quality filter, and the top floor(b*N) of those get flipped. Ties in the
// margin ranking break toward the lower index.
inline AttackTarget first_feature_poison_target(const PreferenceDataset& ds, double a,
                                                double b) {
  validate_dataset(ds);
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
    throw ContractError("attack fractions must lie in [0,1]");

  struct Candidate {
    std::size_t index;
    double margin;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < ds.big_n; ++i) {
    const bool y_preferred = ds.theta_o[i] >= 0.5;
    const double preferred_first = y_preferred ? ds.features_y(i, 0) : ds.features_z(i, 0);
    const double dispreferred_first = y_preferred ? ds.features_z(i, 0) : ds.features_y(i, 0);
    const double margin = dispreferred_first - preferred_first;
    if (margin > 0.0) candidates.push_back({i, margin});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& lhs, const Candidate& rhs) {
                     return lhs.margin > rhs.margin;
                   });

  const auto keep = static_cast<std::size_t>(
      std::ceil(a * static_cast<double>(ds.big_n) - 1e-12));
  const auto flips = static_cast<std::size_t>(
      std::floor(b * static_cast<double>(ds.big_n) + 1e-12));
  if (candidates.size() > keep) candidates.resize(keep);
  if (flips > candidates.size())
    throw ContractError("first-feature attack needs " + std::to_string(flips) +
                        " flippable pairs but only " + std::to_string(candidates.size()) +
                        " are eligible after the quality filter");

  AttackTarget out;
  out.theta_a = ds.theta_o;
  for (std::size_t k = 0; k < flips; ++k) {
    const std::size_t i = candidates[k].index;
    out.theta_a[i] = 1.0 - ds.theta_o[i];
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "first_feature(a=%g,b=%g) margin-ranked", a, b);
  out.description = buf;
  return out;
}

}  // namespace pcm

#endif  // PCM_ATTACK_HPP_
