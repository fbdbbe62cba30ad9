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
// Exact linear programming.
//
// A program is min c.x subject to g x <= h, e_mat x = e_rhs and optional
// per-variable bounds. The solver is a two-phase revised simplex over the
// bounded-variable computational form: singleton inequality rows are folded
// into variable bounds, remaining inequalities get slack variables, and the
// basis inverse is kept as an LU factorization plus product-form updates
// with periodic refactorization. Pricing is most-negative (Dantzig) with
// index tie-breaks; after a run of non-improving iterations the pivot rule
// switches to Bland's smallest-index rule, which cannot cycle. All choices
// are index-deterministic, so identical inputs give identical outputs.

#ifndef PCM_LP_HPP_
#define PCM_LP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pcm/errors.hpp"
#include "pcm/matrix.hpp"

namespace pcm {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

struct LinearProgram {
  Vector c;      // objective, length v
  Matrix g;      // inequality matrix, q x v (g x <= h); may have zero rows
  Vector h;      // length q
  Matrix e_mat;  // equality matrix, p x v; may have zero rows
  Vector e_rhs;  // length p
  // Optional explicit variable bounds, each either empty or length v.
  // Missing bounds mean the variable is free in that direction.
  Vector lower;
  Vector upper;
};

struct LpSolution {
  LpStatus status = LpStatus::kOptimal;
  Vector x;                // valid only when status == optimal
  double objective = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Revised simplex over min cost.x s.t. columns * x = b, lo <= x <= hi.
class BoundedSimplex {
 public:
  BoundedSimplex(std::vector<Vector> columns, Vector cost, Vector lo, Vector hi,
                 Vector b, double tol)
      : cols_(std::move(columns)),
        cost_(std::move(cost)),
        lo_(std::move(lo)),
        hi_(std::move(hi)),
        b_(std::move(b)),
        rows_(b_.size()),
        tol_(tol) {}

  // Runs both phases. Returns kOptimal/kInfeasible/kUnbounded; on optimal,
  // variable values are available through value().
  LpStatus run() {
    structural_count_ = cols_.size();
    add_artificials();
    set_initial_point();
    refactor();

    // Phase 1: minimize the sum of artificial variables.
    Vector phase1_cost(cols_.size(), 0.0);
    for (std::size_t j = structural_count_; j < cols_.size(); ++j) phase1_cost[j] = 1.0;
    if (!iterate(phase1_cost, /*allow_unbounded=*/false))
      throw NumericalError("phase-1 simplex reported an unbounded objective");
    const double bscale = std::max(1.0, norm_linf(b_));
    if (phase_objective(phase1_cost) > 10.0 * tol_ * bscale) return LpStatus::kInfeasible;
    fix_artificials();

    // Phase 2: the real objective, artificials pinned at zero.
    bland_ = false;
    stall_ = 0;
    if (!iterate(cost_, /*allow_unbounded=*/true)) return LpStatus::kUnbounded;
    finalize();
    return LpStatus::kOptimal;
  }

  double value(std::size_t j) const { return val_[j]; }

 private:
  enum Status : char { kAtLower, kAtUpper, kFree, kBasic };

  void add_artificials() {
    // Residual of the initial nonbasic point decides each artificial sign
    // so the starting basis is feasible with artificials >= 0.
    Vector residual = b_;
    val_.assign(cols_.size(), 0.0);
    status_.assign(cols_.size(), kFree);
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      double v = 0.0;
      Status st = kFree;
      if (lo_[j] > -kInf) {
        v = lo_[j];
        st = kAtLower;
      } else if (hi_[j] < kInf) {
        v = hi_[j];
        st = kAtUpper;
      }
      val_[j] = v;
      status_[j] = st;
      if (v != 0.0)
        for (std::size_t i = 0; i < rows_; ++i) residual[i] -= cols_[j][i] * v;
    }
    basis_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      Vector col(rows_, 0.0);
      col[i] = residual[i] >= 0.0 ? 1.0 : -1.0;
      cols_.push_back(std::move(col));
      cost_.push_back(0.0);
      lo_.push_back(0.0);
      hi_.push_back(kInf);
      val_.push_back(std::fabs(residual[i]));
      status_.push_back(kBasic);
      basis_[i] = cols_.size() - 1;
    }
  }

  void set_initial_point() {
    xb_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) xb_[i] = val_[basis_[i]];
  }

  void fix_artificials() {
    for (std::size_t j = structural_count_; j < cols_.size(); ++j) {
      lo_[j] = hi_[j] = 0.0;
      if (status_[j] != kBasic) {
        status_[j] = kAtLower;
        val_[j] = 0.0;
      }
    }
    // Pivot basic artificials onto structural columns where possible;
    // rows that admit no pivot are redundant and keep a zero artificial.
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < structural_count_) continue;
      Vector rho(rows_, 0.0);
      rho[i] = 1.0;
      rho = btran(rho);
      std::size_t enter = cols_.size();
      double best = 1e-9;
      for (std::size_t j = 0; j < structural_count_; ++j) {
        if (status_[j] == kBasic || lo_[j] == hi_[j]) continue;
        const double piv = std::fabs(dot(rho, cols_[j]));
        if (piv > best) {
          best = piv;
          enter = j;
        }
      }
      if (enter == cols_.size()) continue;
      Vector w = ftran(cols_[enter]);
      const std::size_t leaving = basis_[i];
      status_[leaving] = kAtLower;
      val_[leaving] = 0.0;
      basis_[i] = enter;
      status_[enter] = kBasic;
      xb_[i] = val_[enter];
      push_eta(i, std::move(w));
    }
    refactor();
  }

  double phase_objective(const Vector& cost) const {
    double obj = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) obj += cost[basis_[i]] * xb_[i];
    for (std::size_t j = 0; j < cols_.size(); ++j)
      if (status_[j] != kBasic && val_[j] != 0.0) obj += cost[j] * val_[j];
    return obj;
  }

  // Core loop. Returns false when the objective is unbounded below.
  bool iterate(const Vector& cost, bool allow_unbounded) {
    const double dtol = tol_ * std::max(1.0, norm_linf(cost));
    const std::size_t iter_cap = 5000 + 50 * (rows_ + cols_.size());
    double best_obj = kInf;
    for (std::size_t iter = 0; iter < iter_cap; ++iter) {
      if (etas_.size() >= 64) refactor();

      Vector cb(rows_);
      for (std::size_t i = 0; i < rows_; ++i) cb[i] = cost[basis_[i]];
      const Vector y = btran(cb);

      // Pricing: pick the entering column and its direction of movement.
      std::size_t enter = cols_.size();
      int dir = 0;
      double best_score = dtol;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (status_[j] == kBasic || lo_[j] == hi_[j]) continue;
        const double d = cost[j] - dot(y, cols_[j]);
        double score = 0.0;
        int cand_dir = 0;
        if (status_[j] != kAtUpper && d < -dtol) {
          score = -d;
          cand_dir = 1;
        } else if (status_[j] != kAtLower && d > dtol) {
          score = d;
          cand_dir = -1;
        }
        if (cand_dir == 0) continue;
        if (bland_) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (score > best_score) {
          best_score = score;
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter == cols_.size()) return true;  // optimal for this phase

      const Vector w = ftran(cols_[enter]);

      // Ratio test: the entering variable moves by t >= 0 in direction dir,
      // basic variables move by -dir * w * t.
      double t_max = kInf;
      if (lo_[enter] > -kInf && hi_[enter] < kInf) t_max = hi_[enter] - lo_[enter];
      double t_best = t_max;
      std::size_t leave_pos = rows_;  // rows_ means bound flip
      const double ptol = 1e-11;
      for (std::size_t i = 0; i < rows_; ++i) {
        const double delta = -dir * w[i];
        double cap = kInf;
        if (delta > ptol) {
          if (hi_[basis_[i]] < kInf) cap = (hi_[basis_[i]] - xb_[i]) / delta;
        } else if (delta < -ptol) {
          if (lo_[basis_[i]] > -kInf) cap = (xb_[i] - lo_[basis_[i]]) / (-delta);
        }
        if (cap >= t_best) continue;
        t_best = std::max(cap, 0.0);
        leave_pos = i;
      }
      if (bland_ && leave_pos != rows_) {
        // Smallest variable index among ties guarantees termination.
        std::size_t best_idx = basis_[leave_pos];
        for (std::size_t i = 0; i < rows_; ++i) {
          const double delta = -dir * w[i];
          double cap = kInf;
          if (delta > ptol) {
            if (hi_[basis_[i]] < kInf) cap = (hi_[basis_[i]] - xb_[i]) / delta;
          } else if (delta < -ptol) {
            if (lo_[basis_[i]] > -kInf) cap = (xb_[i] - lo_[basis_[i]]) / (-delta);
          }
          if (cap <= t_best + 1e-12 && basis_[i] < best_idx) {
            best_idx = basis_[i];
            leave_pos = i;
          }
        }
      }
      if (t_best == kInf) {
        if (allow_unbounded) return false;
        throw NumericalError("ratio test found no blocking bound in phase 1");
      }

      // Apply the move.
      for (std::size_t i = 0; i < rows_; ++i) xb_[i] += -dir * w[i] * t_best;
      if (leave_pos == rows_) {
        // Bound flip: no basis change.
        val_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
        status_[enter] = dir > 0 ? kAtUpper : kAtLower;
      } else {
        const std::size_t leaving = basis_[leave_pos];
        const double delta = -dir * w[leave_pos];
        if (delta > 0.0) {
          val_[leaving] = hi_[leaving];
          status_[leaving] = kAtUpper;
        } else {
          val_[leaving] = lo_[leaving];
          status_[leaving] = kAtLower;
        }
        const double enter_val =
            (status_[enter] == kAtUpper ? hi_[enter]
                                        : (status_[enter] == kAtLower ? lo_[enter] : 0.0)) +
            dir * t_best;
        basis_[leave_pos] = enter;
        status_[enter] = kBasic;
        xb_[leave_pos] = enter_val;
        push_eta(leave_pos, w);
      }

      // Stall detection: long runs without progress switch on Bland's rule.
      const double obj = phase_objective(cost);
      if (obj < best_obj - 1e-12 * std::max(1.0, std::fabs(best_obj))) {
        best_obj = obj;
        stall_ = 0;
      } else if (++stall_ > 500) {
        bland_ = true;
      }
    }
    throw NumericalError("simplex iteration cap exceeded");
  }

  // Recomputes basic values from scratch and refreshes the LU factors.
  void refactor() {
    Matrix basis_matrix(rows_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t r = 0; r < rows_; ++r) basis_matrix(r, i) = cols_[basis_[i]][r];
    lu_ = std::make_unique<LuFactorization>(std::move(basis_matrix));
    etas_.clear();
    Vector rhs = b_;
    for (std::size_t j = 0; j < cols_.size(); ++j)
      if (status_[j] != kBasic && val_[j] != 0.0)
        for (std::size_t i = 0; i < rows_; ++i) rhs[i] -= cols_[j][i] * val_[j];
    xb_ = lu_->solve(rhs);
  }

  struct Eta {
    std::size_t row;
    Vector w;
  };

  void push_eta(std::size_t row, Vector w) { etas_.push_back({row, std::move(w)}); }

  Vector ftran(const Vector& v) const {
    Vector x = lu_->solve(v);
    for (const Eta& e : etas_) {
      const double xr = x[e.row] / e.w[e.row];
      for (std::size_t i = 0; i < rows_; ++i) x[i] -= e.w[i] * xr;
      x[e.row] = xr;
    }
    return x;
  }

  Vector btran(const Vector& v) const {
    Vector x = v;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = x[it->row];
      for (std::size_t i = 0; i < rows_; ++i)
        if (i != it->row) acc -= it->w[i] * x[i];
      x[it->row] = acc / it->w[it->row];
    }
    return lu_->solve_transposed(x);
  }

  // Refactors once more and applies one step of iterative refinement so the
  // reported point satisfies the equalities to near machine precision.
  void finalize() {
    refactor();
    Vector residual = b_;
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      const double v = status_[j] == kBasic ? 0.0 : val_[j];
      if (v != 0.0)
        for (std::size_t i = 0; i < rows_; ++i) residual[i] -= cols_[j][i] * v;
    }
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t r = 0; r < rows_; ++r) residual[r] -= cols_[basis_[i]][r] * xb_[i];
    const Vector correction = ftran(residual);
    for (std::size_t i = 0; i < rows_; ++i) xb_[i] += correction[i];
    for (std::size_t i = 0; i < rows_; ++i) val_[basis_[i]] = xb_[i];
  }

  std::vector<Vector> cols_;
  Vector cost_, lo_, hi_, b_;
  std::size_t rows_;
  double tol_;
  std::size_t structural_count_ = 0;

  Vector val_, xb_;
  std::vector<Status> status_;
  std::vector<std::size_t> basis_;
  std::unique_ptr<LuFactorization> lu_;
  std::vector<Eta> etas_;
  bool bland_ = false;
  std::size_t stall_ = 0;
};

}  // namespace detail

inline void validate_program(const LinearProgram& lp) {
  const std::size_t v = lp.c.size();
  if (v == 0) throw ContractError("linear program has no variables");
  if (lp.g.rows() != lp.h.size())
    throw ContractError("inequality matrix and rhs disagree on row count");
  if (lp.g.rows() > 0 && lp.g.cols() != v)
    throw ContractError("inequality matrix has wrong column count");
  if (lp.e_mat.rows() != lp.e_rhs.size())
    throw ContractError("equality matrix and rhs disagree on row count");
  if (lp.e_mat.rows() > 0 && lp.e_mat.cols() != v)
    throw ContractError("equality matrix has wrong column count");
  if (!lp.lower.empty() && lp.lower.size() != v)
    throw ContractError("lower bound vector has wrong length");
  if (!lp.upper.empty() && lp.upper.size() != v)
    throw ContractError("upper bound vector has wrong length");
  if (!all_finite(lp.c) || !all_finite(lp.g) || !all_finite(lp.h) ||
      !all_finite(lp.e_mat) || !all_finite(lp.e_rhs))
    throw ContractError("linear program contains non-finite coefficients");
}

inline LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-9) {
  validate_program(lp);
  const auto status_only = [](LpStatus s) {
    LpSolution out;
    out.status = s;
    return out;
  };
  const std::size_t v = lp.c.size();
  const double inf = detail::kInf;

  Vector lo(v, -inf), hi(v, inf);
  for (std::size_t j = 0; j < lp.lower.size(); ++j) lo[j] = lp.lower[j];
  for (std::size_t j = 0; j < lp.upper.size(); ++j) hi[j] = lp.upper[j];

  // Fold singleton inequality rows into bounds; keep the rest as slack rows.
  std::vector<std::size_t> general_rows;
  for (std::size_t r = 0; r < lp.g.rows(); ++r) {
    std::size_t nnz = 0, idx = 0;
    for (std::size_t j = 0; j < v; ++j)
      if (lp.g(r, j) != 0.0) {
        ++nnz;
        idx = j;
        if (nnz > 1) break;
      }
    if (nnz == 0) {
      if (lp.h[r] < -tol) return status_only(LpStatus::kInfeasible);
    } else if (nnz == 1) {
      const double coef = lp.g(r, idx);
      const double bound = lp.h[r] / coef;
      if (coef > 0.0)
        hi[idx] = std::min(hi[idx], bound);
      else
        lo[idx] = std::max(lo[idx], bound);
    } else {
      general_rows.push_back(r);
    }
  }
  for (std::size_t j = 0; j < v; ++j) {
    if (lo[j] > hi[j] + tol) return status_only(LpStatus::kInfeasible);
    if (lo[j] > hi[j]) hi[j] = lo[j];
  }

  const std::size_t q = general_rows.size();
  const std::size_t p = lp.e_mat.rows();
  const std::size_t rows = q + p;

  std::vector<Vector> columns(v + q, Vector(rows, 0.0));
  Vector cost(v + q, 0.0), b(rows, 0.0);
  for (std::size_t j = 0; j < v; ++j) {
    cost[j] = lp.c[j];
    for (std::size_t i = 0; i < q; ++i) columns[j][i] = lp.g(general_rows[i], j);
    for (std::size_t k = 0; k < p; ++k) columns[j][q + k] = lp.e_mat(k, j);
  }
  for (std::size_t i = 0; i < q; ++i) {
    columns[v + i][i] = 1.0;
    lo.push_back(0.0);
    hi.push_back(inf);
    b[i] = lp.h[general_rows[i]];
  }
  for (std::size_t k = 0; k < p; ++k) b[q + k] = lp.e_rhs[k];

  detail::BoundedSimplex simplex(std::move(columns), std::move(cost), std::move(lo),
                                 std::move(hi), std::move(b), tol);
  const LpStatus status = simplex.run();
  if (status != LpStatus::kOptimal) return status_only(status);

  LpSolution out;
  out.status = LpStatus::kOptimal;
  out.x.resize(v);
  for (std::size_t j = 0; j < v; ++j) out.x[j] = simplex.value(j);
  out.objective = dot(lp.c, out.x);

  // Contract check on the reported point.
  double violation = 0.0;
  for (std::size_t r = 0; r < lp.g.rows(); ++r) {
    double acc = -lp.h[r];
    for (std::size_t j = 0; j < v; ++j) acc += lp.g(r, j) * out.x[j];
    violation = std::max(violation, acc);
  }
  for (std::size_t k = 0; k < lp.e_mat.rows(); ++k) {
    double acc = -lp.e_rhs[k];
    for (std::size_t j = 0; j < v; ++j) acc += lp.e_mat(k, j) * out.x[j];
    violation = std::max(violation, std::fabs(acc));
  }
  for (std::size_t j = 0; j < lp.lower.size(); ++j)
    violation = std::max(violation, lp.lower[j] - out.x[j]);
  for (std::size_t j = 0; j < lp.upper.size(); ++j)
    violation = std::max(violation, out.x[j] - lp.upper[j]);
  if (violation > 1e-8)
    throw NumericalError("simplex returned a point violating constraints by " +
                         std::to_string(violation));
  return out;
}

// Rewrites min ||A(x-a)||_1 + lambda ||B(x-b)||_1 over x in [0,1]^n subject
// to C x = C c as a linear program in the stacked variables (x, u, w), where
// u and w bound the absolute values row by row:
//
//   minimize    0.x + 1.u + lambda.w
//   subject to   x <= 1,  -x <= 0
//                A x - u <=  A a,   -A x - u <= -A a
//                B x - w <=  B b,   -B x - w <= -B b
//                C x = C c.
//
// A, B, C may have any row counts (u has one entry per row of A, w per row
// of B); empty B or C simply drops the corresponding blocks.
inline LinearProgram l1_to_lp(const Matrix& a_mat, const Vector& a_vec,
                              const Matrix& b_mat, const Vector& b_vec,
                              double lambda, const Matrix& c_mat,
                              const Vector& c_vec) {
  const std::size_t n = a_mat.cols();
  if (n == 0) throw ContractError("absolute-value objective needs at least one variable");
  if (a_vec.size() != n) throw ContractError("anchor a has wrong length");
  if (b_mat.rows() > 0 && b_mat.cols() != n)
    throw ContractError("second objective block has wrong column count");
  if (b_vec.size() != n) throw ContractError("anchor b has wrong length");
  if (c_mat.rows() > 0 && c_mat.cols() != n)
    throw ContractError("equality block has wrong column count");
  if (c_vec.size() != n) throw ContractError("anchor c has wrong length");
  if (lambda < 0.0) throw ContractError("lambda must be nonnegative");

  const std::size_t ka = a_mat.rows(), kb = b_mat.rows(), p = c_mat.rows();
  const std::size_t vars = n + ka + kb;
  LinearProgram lp;
  lp.c.assign(vars, 0.0);
  for (std::size_t i = 0; i < ka; ++i) lp.c[n + i] = 1.0;
  for (std::size_t i = 0; i < kb; ++i) lp.c[n + ka + i] = lambda;

  const std::size_t q = 2 * n + 2 * ka + 2 * kb;
  lp.g = Matrix(q, vars);
  lp.h.assign(q, 0.0);
  std::size_t row = 0;
  for (std::size_t j = 0; j < n; ++j, ++row) {
    lp.g(row, j) = 1.0;
    lp.h[row] = 1.0;
  }
  for (std::size_t j = 0; j < n; ++j, ++row) {
    lp.g(row, j) = -1.0;
    lp.h[row] = 0.0;
  }
  const Vector aa = ka > 0 ? matvec(a_mat, a_vec) : Vector{};
  for (std::size_t i = 0; i < ka; ++i, ++row) {
    for (std::size_t j = 0; j < n; ++j) lp.g(row, j) = a_mat(i, j);
    lp.g(row, n + i) = -1.0;
    lp.h[row] = aa[i];
  }
  for (std::size_t i = 0; i < ka; ++i, ++row) {
    for (std::size_t j = 0; j < n; ++j) lp.g(row, j) = -a_mat(i, j);
    lp.g(row, n + i) = -1.0;
    lp.h[row] = -aa[i];
  }
  const Vector bb = kb > 0 ? matvec(b_mat, b_vec) : Vector{};
  for (std::size_t i = 0; i < kb; ++i, ++row) {
    for (std::size_t j = 0; j < n; ++j) lp.g(row, j) = b_mat(i, j);
    lp.g(row, n + ka + i) = -1.0;
    lp.h[row] = bb[i];
  }
  for (std::size_t i = 0; i < kb; ++i, ++row) {
    for (std::size_t j = 0; j < n; ++j) lp.g(row, j) = -b_mat(i, j);
    lp.g(row, n + ka + i) = -1.0;
    lp.h[row] = -bb[i];
  }

  if (p > 0) {
    lp.e_mat = Matrix(p, vars);
    lp.e_rhs = matvec(c_mat, c_vec);
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t j = 0; j < n; ++j) lp.e_mat(k, j) = c_mat(k, j);
  }
  return lp;
}

}  // namespace pcm

#endif  // PCM_LP_HPP_
