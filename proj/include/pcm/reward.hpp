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
// Linear reward model fitting under the Bradley-Terry preference model.
// With phi the feature difference matrix and r the reward weights, the
// pairwise score differences are delta = phi^T r and the expected negative
// log-likelihood with soft labels theta is
//
//   L(r) = -sum_i [ theta_i log s(delta_i) + (1-theta_i) log s(-delta_i) ]
//
// where s is the logistic function. Every datum is weighted equally. The
// trainer minimizes L plus a ridge term (ridge/2)||r||^2 by damped Newton
// steps with Armijo backtracking, starting from zero, so runs are fully
// deterministic.

#ifndef PCM_REWARD_HPP_
#define PCM_REWARD_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pcm/errors.hpp"
#include "pcm/feature_diff.hpp"
#include "pcm/matrix.hpp"

namespace pcm {

struct TrainConfig {
  double ridge = 1e-8;
  double grad_tol = 1e-10;  // on the max-norm of the regularized gradient
  std::size_t max_iters = 500;
};

inline double sigmoid(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

// log s(t), evaluated without overflow for large |t|.
inline double log_sigmoid(double t) {
  return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

// Score differences delta = phi^T r.
inline Vector score_diffs(const FeatureDiffMatrix& phi, const Vector& r) {
  if (r.size() != phi.feature_dim())
    throw ContractError("reward vector has wrong dimension");
  return matvec_transposed(phi.matrix(), r);
}

// Model preferences s(phi^T r).
inline Vector preference_vector(const FeatureDiffMatrix& phi, const Vector& r) {
  Vector delta = score_diffs(phi, r);
  for (double& d : delta) d = sigmoid(d);
  return delta;
}

inline void validate_theta(const Vector& theta, std::size_t big_n) {
  if (theta.size() != big_n) throw ContractError("preference vector has wrong length");
  for (double t : theta)
    if (!(t >= 0.0 && t <= 1.0))
      throw ContractError("preference probabilities must lie in [0,1]");
}

struct LossGradient {
  double loss;
  Vector gradient;  // length n
};

inline LossGradient loss_and_gradient(const FeatureDiffMatrix& phi, const Vector& theta,
                                      const Vector& r) {
  validate_theta(theta, phi.data_count());
  const Vector delta = score_diffs(phi, r);
  double loss = 0.0;
  Vector residual(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    loss -= theta[i] * log_sigmoid(delta[i]) + (1.0 - theta[i]) * log_sigmoid(-delta[i]);
    residual[i] = theta[i] - sigmoid(delta[i]);
  }
  // gradient = -phi (theta - s(delta))
  Vector grad = matvec(phi.matrix(), residual);
  for (double& g : grad) g = -g;
  return {loss, std::move(grad)};
}

// Hessian phi diag(s(1-s)) phi^T, an n x n positive semidefinite matrix.
inline Matrix loss_hessian(const FeatureDiffMatrix& phi, const Vector& r) {
  const Vector delta = score_diffs(phi, r);
  const Matrix& f = phi.matrix();
  const std::size_t n = phi.feature_dim(), big_n = phi.data_count();
  Matrix hess(n, n);
  Vector scaled(big_n);
  for (std::size_t i = 0; i < big_n; ++i) {
    const double s = sigmoid(delta[i]);
    scaled[i] = s * (1.0 - s);
  }
  for (std::size_t a = 0; a < n; ++a) {
    const double* fa = f.row_ptr(a);
    for (std::size_t b = a; b < n; ++b) {
      const double* fb = f.row_ptr(b);
      double acc = 0.0;
      for (std::size_t i = 0; i < big_n; ++i) acc += scaled[i] * fa[i] * fb[i];
      hess(a, b) = acc;
      hess(b, a) = acc;
    }
  }
  return hess;
}

inline Vector train_reward(const FeatureDiffMatrix& phi, const Vector& theta,
                           const TrainConfig& cfg = {}) {
  validate_theta(theta, phi.data_count());
  if (cfg.ridge < 0.0) throw ContractError("ridge weight must be nonnegative");
  if (!(cfg.grad_tol > 0.0)) throw ContractError("gradient tolerance must be positive");

  const std::size_t n = phi.feature_dim();
  Vector r(n, 0.0);
  auto objective = [&](const Vector& weights, const LossGradient& lg) {
    return lg.loss + 0.5 * cfg.ridge * dot(weights, weights);
  };

  LossGradient lg = loss_and_gradient(phi, theta, r);
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    Vector grad = lg.gradient;
    for (std::size_t j = 0; j < n; ++j) grad[j] += cfg.ridge * r[j];
    const double gnorm = norm_linf(grad);
    if (gnorm <= cfg.grad_tol) return r;

    Matrix hess = loss_hessian(phi, r);
    for (std::size_t j = 0; j < n; ++j) hess(j, j) += cfg.ridge;
    Vector step;
    try {
      step = CholeskyFactorization(std::move(hess)).solve(grad);
    } catch (const NumericalError&) {
      // A semidefinite Hessian with zero ridge can defeat Cholesky; retry
      // with a small diagonal shift proportional to the gradient scale.
      Matrix shifted = loss_hessian(phi, r);
      const double jitter = 1e-12 * std::max(1.0, norm_linf(grad));
      for (std::size_t j = 0; j < n; ++j) shifted(j, j) += cfg.ridge + jitter;
      step = CholeskyFactorization(std::move(shifted)).solve(grad);
    }
    for (double& s : step) s = -s;

    const double slope = dot(grad, step);  // negative for a descent step
    const double f0 = objective(r, lg);
    // Once the predicted decrease is below floating-point noise the Armijo
    // comparison is meaningless; take the full Newton step.
    if (std::fabs(slope) <= 1e-12 * std::max(1.0, std::fabs(f0))) {
      for (std::size_t j = 0; j < n; ++j) r[j] += step[j];
      lg = loss_and_gradient(phi, theta, r);
      continue;
    }
    double t = 1.0;
    bool accepted = false;
    Vector trial(n);
    LossGradient trial_lg{0.0, {}};
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = r[j] + t * step[j];
      trial_lg = loss_and_gradient(phi, theta, trial);
      if (objective(trial, trial_lg) <= f0 + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw ConvergenceError("line search failed; gradient max-norm " +
                                 std::to_string(gnorm),
                             gnorm);
    r = trial;
    lg = trial_lg;
  }
  Vector grad = lg.gradient;
  for (std::size_t j = 0; j < n; ++j) grad[j] += cfg.ridge * r[j];
  const double gnorm = norm_linf(grad);
  throw ConvergenceError("Newton did not reach tolerance in " +
                             std::to_string(cfg.max_iters) +
                             " iterations; gradient max-norm " + std::to_string(gnorm),
                         gnorm);
}

}  // namespace pcm

#endif  // PCM_REWARD_HPP_
