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
// Minimum-cost preference poisoning.
//
// Given clean preferences theta_o and an attack target theta_a, the label
// perturbation zeta = theta - theta_o cheapest in l1 cost that still trains
// the same reward model as theta_a solves
//
//   min ||zeta||_1   s.t.  phi zeta = phi (theta_a - theta_o),
//                          -theta_o <= zeta <= 1 - theta_o.
//
// The program is assembled in split form zeta = pos - neg with pos, neg
// nonnegative and box-bounded, which keeps the simplex basis at the number
// of equality rows. Closed-form certificates accompany the solve: with
// P the projection onto the row space of phi and d = theta_a - theta_o,
// ||P d||_2^2 / ||P d||_inf lower-bounds the cost (with an explicit dual
// witness), and a blend of d with P d upper-bounds it.

#ifndef PCM_PCM_HPP_
#define PCM_PCM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcm/dataset.hpp"
#include "pcm/errors.hpp"
#include "pcm/feature_diff.hpp"
#include "pcm/lp.hpp"
#include "pcm/matrix.hpp"

namespace pcm {

struct PcmSolution {
  Vector zeta_star;               // optimal continuous perturbation
  Vector theta_star_continuous;   // theta_o + zeta_star
  Vector theta_star_discrete;     // rounded to the 1/m grid
  double cost_continuous = 0.0;   // ||zeta_star||_1
  double cost_discrete = 0.0;     // ||theta_star_discrete - theta_o||_1
  double naive_cost = 0.0;        // ||theta_a - theta_o||_1
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  LpStatus lp_status = LpStatus::kOptimal;
};

struct BoundReport {
  double lower = 0.0;
  double upper = 0.0;
  double alpha_star = 0.0;
  double alpha_bar = 0.0;
  double dual_certificate_value = 0.0;
};

struct DualCertificate {
  Vector lambda;  // length n, witness for the equality block
  double value = 0.0;
};

namespace detail {

inline Vector difference_checked(const Vector& theta_o, const Vector& theta_a) {
  if (theta_a.size() != theta_o.size())
    throw ContractError("target preference vector has wrong length");
  Vector d(theta_o.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(theta_o[i] >= 0.0 && theta_o[i] <= 1.0) ||
        !(theta_a[i] >= 0.0 && theta_a[i] <= 1.0))
      throw ContractError("preference probabilities must lie in [0,1]");
    d[i] = theta_a[i] - theta_o[i];
  }
  return d;
}

// Split-form program over variables (pos, neg), zeta = pos - neg:
//   min 1.pos + 1.neg
//   s.t. [R | -R] (pos, neg) = R d,  0 <= pos <= 1-theta_o, 0 <= neg <= theta_o,
// with R the constraint rows rescaled to unit length (zero rows dropped:
// they constrain nothing). Row scaling leaves the feasible set unchanged
// and keeps the simplex well conditioned.
inline LinearProgram assemble_flip_lp(const Matrix& constraint, const Vector& theta_o,
                                      const Vector& theta_a) {
  const std::size_t big_n = theta_o.size();
  if (constraint.cols() != big_n)
    throw ContractError("constraint matrix does not match the dataset size");
  const Vector d = difference_checked(theta_o, theta_a);

  std::vector<std::size_t> kept;
  Vector scales;
  double max_norm = 0.0;
  Vector row_norms(constraint.rows());
  for (std::size_t r = 0; r < constraint.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < big_n; ++j) acc += constraint(r, j) * constraint(r, j);
    row_norms[r] = std::sqrt(acc);
    max_norm = std::max(max_norm, row_norms[r]);
  }
  for (std::size_t r = 0; r < constraint.rows(); ++r)
    if (row_norms[r] > 1e-14 * max_norm && row_norms[r] > 0.0) {
      kept.push_back(r);
      scales.push_back(1.0 / row_norms[r]);
    }

  LinearProgram lp;
  const std::size_t vars = 2 * big_n;
  lp.c.assign(vars, 1.0);
  lp.lower.assign(vars, 0.0);
  lp.upper.resize(vars);
  for (std::size_t i = 0; i < big_n; ++i) {
    lp.upper[i] = 1.0 - theta_o[i];
    lp.upper[big_n + i] = theta_o[i];
  }
  lp.e_mat = Matrix(kept.size(), vars);
  lp.e_rhs.assign(kept.size(), 0.0);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const double* row = constraint.row_ptr(kept[k]);
    double rhs = 0.0;
    for (std::size_t j = 0; j < big_n; ++j) {
      const double value = row[j] * scales[k];
      lp.e_mat(k, j) = value;
      lp.e_mat(k, big_n + j) = -value;
      rhs += value * d[j];
    }
    lp.e_rhs[k] = rhs;
  }
  return lp;
}

}  // namespace detail

// Cost lower bound ||P d||_2^2 / ||P d||_inf; zero when d has no component
// in the row space of phi.
inline double lower_bound(const FeatureDiffMatrix& phi, const Vector& theta_o,
                          const Vector& theta_a) {
  if (theta_o.size() != phi.data_count())
    throw ContractError("preference vector does not match the data count");
  const Vector d = detail::difference_checked(theta_o, theta_a);
  const Vector pd = phi.project(d);
  const double inf_norm = norm_linf(pd);
  if (inf_norm <= 1e-12) return 0.0;
  return dot(pd, pd) / inf_norm;
}

namespace detail {

struct UpperBoundParts {
  double value;
  double alpha_star;
  double alpha_bar;
};

inline UpperBoundParts upper_bound_parts(const FeatureDiffMatrix& phi,
                                         const Vector& theta_o, const Vector& theta_a) {
  const Vector d = difference_checked(theta_o, theta_a);
  const Vector pd = phi.project(d);

  // theta* = theta_o + P d is the cheapest row-space-consistent point; how
  // far it escapes [0,1] fixes the mixing weight toward the naive target.
  double escape = 0.0, target_spread = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    escape = std::max(escape, std::fabs(theta_o[i] + pd[i] - 0.5));
    target_spread = std::max(target_spread, std::fabs(theta_a[i] - 0.5));
  }
  const double alpha_star = std::max(escape - 0.5, 0.0);
  const double alpha_bar = 0.5 - target_spread;

  const double naive = norm_l1(d);
  double blended;
  if (alpha_star == 0.0) {
    blended = norm_l1(pd);
  } else if (alpha_bar <= 0.0) {
    blended = naive;
  } else {
    const double denom = alpha_star + alpha_bar;
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      acc += std::fabs((alpha_star * d[i] + alpha_bar * pd[i]) / denom);
    blended = acc;
  }
  return {std::min(blended, naive), alpha_star, alpha_bar};
}

}  // namespace detail

// Cost upper bound from retargeting to a feasible mixture of theta_a and
// theta_o + P d.
inline double upper_bound(const FeatureDiffMatrix& phi, const Vector& theta_o,
                          const Vector& theta_a) {
  if (theta_o.size() != phi.data_count())
    throw ContractError("preference vector does not match the data count");
  return detail::upper_bound_parts(phi, theta_o, theta_a).value;
}

// Explicit dual witness for the lower bound: lambda = -(phi^+)^T d scaled
// by 1/||P d||_inf satisfies ||phi^T lambda||_inf <= 1 and certifies the
// value -lambda . (phi d) = ||P d||_2^2 / ||P d||_inf.
inline DualCertificate dual_certificate(const FeatureDiffMatrix& phi,
                                        const Vector& theta_o, const Vector& theta_a) {
  if (theta_o.size() != phi.data_count())
    throw ContractError("preference vector does not match the data count");
  const Vector d = detail::difference_checked(theta_o, theta_a);
  const Vector pd = phi.project(d);
  const double inf_norm = norm_linf(pd);
  DualCertificate cert;
  cert.lambda.assign(phi.feature_dim(), 0.0);
  if (inf_norm <= 1e-12) return cert;

  Vector lambda = matvec_transposed(phi.pinv(), d);
  for (double& v : lambda) v = -v / inf_norm;
  const Vector feas = matvec_transposed(phi.matrix(), lambda);
  if (norm_linf(feas) > 1.0 + 1e-9)
    throw NumericalError("dual certificate violates feasibility");
  cert.value = -dot(lambda, matvec(phi.matrix(), d));
  cert.lambda = std::move(lambda);
  return cert;
}

inline BoundReport bound_report(const FeatureDiffMatrix& phi, const Vector& theta_o,
                                const Vector& theta_a) {
  BoundReport report;
  report.lower = lower_bound(phi, theta_o, theta_a);
  const auto parts = detail::upper_bound_parts(phi, theta_o, theta_a);
  report.upper = parts.value;
  report.alpha_star = parts.alpha_star;
  report.alpha_bar = parts.alpha_bar;
  report.dual_certificate_value = dual_certificate(phi, theta_o, theta_a).value;
  return report;
}

// The linear program behind solve_pcm, exposed for inspection and testing.
inline LinearProgram build_primal(const PreferenceDataset& ds, const FeatureDiffMatrix& phi,
                                  const Vector& theta_a) {
  validate_dataset(ds);
  if (phi.data_count() != ds.big_n)
    throw ContractError("feature difference matrix does not match the dataset");
  return detail::assemble_flip_lp(phi.matrix(), ds.theta_o, theta_a);
}

namespace detail {

inline PcmSolution minimize_flip_cost(const FeatureDiffMatrix& constraint,
                                      const Vector& theta_o, const Vector& theta_a,
                                      std::size_t m, double tol) {
  const Vector d = difference_checked(theta_o, theta_a);
  const std::size_t big_n = theta_o.size();

  const LinearProgram lp = assemble_flip_lp(constraint.matrix(), theta_o, theta_a);
  const LpSolution sol = solve_lp(lp, tol);
  if (sol.status != LpStatus::kOptimal)
    throw NumericalError(std::string("flip-cost program reported ") +
                         to_string(sol.status) + " but is feasible by construction");

  PcmSolution out;
  out.lp_status = sol.status;
  out.zeta_star.resize(big_n);
  out.theta_star_continuous.resize(big_n);
  for (std::size_t i = 0; i < big_n; ++i) {
    double zeta = sol.x[i] - sol.x[big_n + i];
    zeta = std::clamp(zeta, -theta_o[i], 1.0 - theta_o[i]);
    out.zeta_star[i] = zeta;
    out.theta_star_continuous[i] = theta_o[i] + zeta;
  }

  // The reported point must reproduce the target's constraint values on the
  // original (unscaled) rows.
  Vector residual = matvec(constraint.matrix(), out.zeta_star);
  const Vector rhs = matvec(constraint.matrix(), d);
  for (std::size_t r = 0; r < residual.size(); ++r) residual[r] -= rhs[r];
  if (norm_linf(residual) > 1e-7)
    throw NumericalError("optimal perturbation violates the reward-equivalence "
                         "constraint beyond tolerance");

  out.theta_star_discrete = discretize_theta(out.theta_star_continuous, m);
  out.cost_continuous = norm_l1(out.zeta_star);
  out.naive_cost = norm_l1(d);
  double disc_cost = 0.0;
  for (std::size_t i = 0; i < big_n; ++i)
    disc_cost += std::fabs(out.theta_star_discrete[i] - theta_o[i]);
  out.cost_discrete = disc_cost;
  out.lower_bound = lower_bound(constraint, theta_o, theta_a);
  out.upper_bound = upper_bound(constraint, theta_o, theta_a);
  return out;
}

}  // namespace detail

// Full pipeline: assemble the primal program, solve it exactly, then round
// the continuous optimum onto the 1/m label grid (granularity ds.m).
inline PcmSolution solve_pcm(const PreferenceDataset& ds, const FeatureDiffMatrix& phi,
                             const Vector& theta_a, double tol = 1e-9) {
  validate_dataset(ds);
  if (phi.data_count() != ds.big_n)
    throw ContractError("feature difference matrix does not match the dataset");
  return detail::minimize_flip_cost(phi, ds.theta_o, theta_a, ds.m, tol);
}

// Relaxation that only preserves the target reward's own scores: the n
// equality rows collapse to the single row reward_a^T phi. Its optimum can
// only be cheaper than the full program's.
inline PcmSolution solve_reduced(const PreferenceDataset& ds, const FeatureDiffMatrix& phi,
                                 const Vector& reward_a, const Vector& theta_a,
                                 double tol = 1e-9) {
  validate_dataset(ds);
  if (phi.data_count() != ds.big_n)
    throw ContractError("feature difference matrix does not match the dataset");
  if (reward_a.size() != phi.feature_dim())
    throw ContractError("reward vector has wrong dimension");
  if (!all_finite(reward_a)) throw ContractError("reward vector must be finite");

  Vector row = matvec_transposed(phi.matrix(), reward_a);
  // Scores orthogonal to every datum make the constraint vacuous; snap
  // numerically-zero rows to exact zero so no garbage direction survives.
  const double scale = norm_l2(reward_a) * frobenius_norm(phi.matrix());
  if (norm_l2(row) <= 1e-14 * scale) row.assign(row.size(), 0.0);

  Matrix reduced(1, ds.big_n, std::move(row));
  FeatureDiffMatrix reduced_phi(std::move(reduced));
  return detail::minimize_flip_cost(reduced_phi, ds.theta_o, theta_a, ds.m, tol);
}

// Membership of theta in the cost-k reachable sets: first under the exact
// lower bound (row-space metric), second under the naive flip metric.
inline std::pair<bool, bool> reachable_set_member(const FeatureDiffMatrix& phi,
                                                  const Vector& theta_o,
                                                  const Vector& theta, double k) {
  if (k < 0.0) throw ContractError("budget must be nonnegative");
  const double bound = lower_bound(phi, theta_o, theta);
  const Vector d = detail::difference_checked(theta_o, theta);
  return {bound <= k, norm_l1(d) <= k};
}

inline nlohmann::json to_json(const PcmSolution& s) {
  return nlohmann::json{{"zeta_star", s.zeta_star},
                        {"theta_star_continuous", s.theta_star_continuous},
                        {"theta_star_discrete", s.theta_star_discrete},
                        {"cost_continuous", s.cost_continuous},
                        {"cost_discrete", s.cost_discrete},
                        {"naive_cost", s.naive_cost},
                        {"lower_bound", s.lower_bound},
                        {"upper_bound", s.upper_bound},
                        {"lp_status", to_string(s.lp_status)}};
}

inline nlohmann::json to_json(const BoundReport& r) {
  return nlohmann::json{{"lower", r.lower},
                        {"upper", r.upper},
                        {"alpha_star", r.alpha_star},
                        {"alpha_bar", r.alpha_bar},
                        {"dual_certificate_value", r.dual_certificate_value}};
}

}  // namespace pcm

#endif  // PCM_PCM_HPP_
