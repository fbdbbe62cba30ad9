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
// Singular value decomposition by one-sided Jacobi rotations (Hestenes).
// Chosen over faster bidiagonalization schemes because the sweep order is
// fixed, so results are deterministic across runs, and accuracy is close
// to machine precision even for ill-conditioned inputs.

#ifndef PCM_SVD_HPP_
#define PCM_SVD_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "pcm/errors.hpp"
#include "pcm/matrix.hpp"

namespace pcm {

// Thin SVD a = u * diag(singular_values) * vt with k = min(rows, cols).
// u is rows x k with orthonormal columns, vt is k x cols with orthonormal
// rows, singular values are nonnegative and sorted descending.
struct SvdFactors {
  Matrix u;
  Vector singular_values;
  Matrix vt;
};

namespace detail {

// One-sided Jacobi on a tall matrix m (rows >= cols): orthogonalizes the
// columns of m by right rotations, accumulating them into v. On return
// m = u * diag(sigma) * v^T where u's columns are the normalized columns
// of the rotated work matrix.
inline void jacobi_tall(Matrix& work, Matrix& v, Vector& sigma, int max_sweeps) {
  const std::size_t rows = work.rows(), cols = work.cols();
  v = Matrix::identity(cols);
  if (cols == 0) return;

  // Column Gram entries are refreshed per pair; tolerance is relative to
  // the column norms so scaling the input rescales nothing else.
  const double eps = 1e-15;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          const double* row = work.row_ptr(i);
          app += row[p] * row[p];
          aqq += row[q] * row[q];
          apq += row[p] * row[q];
        }
        if (std::fabs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
        converged = false;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          double* row = work.row_ptr(i);
          const double vp = row[p], vq = row[q];
          row[p] = c * vp - s * vq;
          row[q] = s * vp + c * vq;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          double* row = v.row_ptr(i);
          const double vp = row[p], vq = row[q];
          row[p] = c * vp - s * vq;
          row[q] = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged)
    throw NumericalError("SVD did not converge within the sweep cap");

  sigma.assign(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += work(i, j) * work(i, j);
    sigma[j] = std::sqrt(acc);
  }

  // Sort singular values descending; stable order keeps ties deterministic.
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });
  Matrix work_sorted(rows, cols), v_sorted(cols, cols);
  Vector sigma_sorted(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    sigma_sorted[j] = sigma[order[j]];
    for (std::size_t i = 0; i < rows; ++i) work_sorted(i, j) = work(i, order[j]);
    for (std::size_t i = 0; i < cols; ++i) v_sorted(i, j) = v(i, order[j]);
  }
  work = std::move(work_sorted);
  v = std::move(v_sorted);
  sigma = std::move(sigma_sorted);

  // Normalize nonzero columns to build u in place; zero columns are filled
  // with unit vectors orthogonal to the others so u stays orthonormal.
  const double sigma_max = sigma.empty() ? 0.0 : sigma[0];
  const double zero_tol = sigma_max * 1e-14;
  for (std::size_t j = 0; j < cols; ++j) {
    if (sigma[j] > zero_tol && sigma[j] > 0.0) {
      const double inv = 1.0 / sigma[j];
      for (std::size_t i = 0; i < rows; ++i) work(i, j) *= inv;
    } else {
      sigma[j] = 0.0;
      // Gram-Schmidt a standard basis vector against the previous columns.
      bool placed = false;
      for (std::size_t cand = 0; cand < rows && !placed; ++cand) {
        Vector col(rows, 0.0);
        col[cand] = 1.0;
        for (std::size_t k = 0; k < j; ++k) {
          double proj = 0.0;
          for (std::size_t i = 0; i < rows; ++i) proj += work(i, k) * col[i];
          for (std::size_t i = 0; i < rows; ++i) col[i] -= proj * work(i, k);
        }
        double nrm = 0.0;
        for (double x : col) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm > 0.5) {
          for (std::size_t i = 0; i < rows; ++i) work(i, j) = col[i] / nrm;
          placed = true;
        }
      }
      if (!placed)
        throw NumericalError("SVD failed to complete an orthonormal basis");
    }
  }
}

}  // namespace detail

inline SvdFactors svd_decompose(const Matrix& a, int max_sweeps = 60) {
  if (!all_finite(a)) throw ContractError("SVD input contains non-finite values");
  SvdFactors out;
  if (a.rows() >= a.cols()) {
    Matrix work = a, v;
    detail::jacobi_tall(work, v, out.singular_values, max_sweeps);
    out.u = std::move(work);
    out.vt = v.transposed();
  } else {
    // Factor the transpose and swap the roles of u and v.
    Matrix work = a.transposed(), v;
    detail::jacobi_tall(work, v, out.singular_values, max_sweeps);
    out.u = std::move(v);
    out.vt = work.transposed();
  }
  return out;
}

inline std::size_t rank_from_singular_values(const Vector& sigma, double rank_tol) {
  const double sigma_max = sigma.empty() ? 0.0 : sigma[0];
  std::size_t r = 0;
  for (double s : sigma)
    if (s > rank_tol * sigma_max && s > 0.0) ++r;
  return r;
}

inline std::size_t numerical_rank(const Matrix& a, double rank_tol = 1e-10) {
  if (a.empty()) return 0;
  return rank_from_singular_values(svd_decompose(a).singular_values, rank_tol);
}

// Moore-Penrose pseudo-inverse via the SVD: singular values at or below
// rank_tol * sigma_max are treated as exact zeros.
inline Matrix pseudo_inverse_from_svd(const SvdFactors& f, double rank_tol = 1e-10) {
  const std::size_t rank = rank_from_singular_values(f.singular_values, rank_tol);
  const std::size_t rows = f.u.rows(), cols = f.vt.cols();
  // pinv = v * diag(1/sigma) * u^T, restricted to the leading rank triple.
  Matrix pinv(cols, rows);
  for (std::size_t r = 0; r < rank; ++r) {
    const double inv = 1.0 / f.singular_values[r];
    const double* vrow = f.vt.row_ptr(r);
    for (std::size_t i = 0; i < cols; ++i) {
      const double w = vrow[i] * inv;
      if (w == 0.0) continue;
      double* out = pinv.row_ptr(i);
      for (std::size_t j = 0; j < rows; ++j) out[j] += w * f.u(j, r);
    }
  }
  return pinv;
}

inline Matrix pseudo_inverse(const Matrix& a, double rank_tol = 1e-10) {
  if (a.empty()) return a.transposed();
  return pseudo_inverse_from_svd(svd_decompose(a), rank_tol);
}

}  // namespace pcm

#endif  // PCM_SVD_HPP_
