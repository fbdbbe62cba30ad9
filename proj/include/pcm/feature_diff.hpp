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

#ifndef PCM_FEATURE_DIFF_HPP_
#define PCM_FEATURE_DIFF_HPP_

#include <cstddef>
#include <memory>
#include <mutex>
#include <utility>

#include "pcm/matrix.hpp"
#include "pcm/svd.hpp"

namespace pcm {

// Per-datum feature difference matrix: column i holds the feature vector of
// the first (preferred-slot) response minus that of the second, so the
// matrix is n x N for n features and N data points. The SVD and
// pseudo-inverse are computed once at construction; the full N x N
// row-space projection is built lazily because only products with vectors
// are needed on the hot paths.
class FeatureDiffMatrix {
 public:
  explicit FeatureDiffMatrix(Matrix phi, double rank_tol = 1e-10)
      : phi_(std::move(phi)), rank_tol_(rank_tol) {
    if (phi_.rows() == 0 || phi_.cols() == 0)
      throw ContractError("feature difference matrix must be nonempty");
    if (!all_finite(phi_))
      throw ContractError("feature difference matrix contains non-finite values");
    svd_ = svd_decompose(phi_);
    rank_ = rank_from_singular_values(svd_.singular_values, rank_tol_);
    pinv_ = pseudo_inverse_from_svd(svd_, rank_tol_);
  }

  std::size_t feature_dim() const { return phi_.rows(); }
  std::size_t data_count() const { return phi_.cols(); }
  std::size_t rank() const { return rank_; }

  const Matrix& matrix() const { return phi_; }
  const SvdFactors& svd() const { return svd_; }
  const Matrix& pinv() const { return pinv_; }

  // Applies the row-space projection P = pinv * phi to a vector using the
  // right singular vectors: P d = sum_r v_r (v_r . d) over the leading
  // rank rows of vt.
  Vector project(const Vector& d) const {
    if (d.size() != data_count())
      throw ContractError("projection input has wrong dimension");
    Vector out(d.size(), 0.0);
    for (std::size_t r = 0; r < rank_; ++r) {
      const double* vr = svd_.vt.row_ptr(r);
      double coef = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) coef += vr[i] * d[i];
      if (coef == 0.0) continue;
      for (std::size_t i = 0; i < d.size(); ++i) out[i] += coef * vr[i];
    }
    return out;
  }

  // Full N x N projection matrix, built on first request and cached.
  const Matrix& projection() const {
    std::lock_guard<std::mutex> lock(*cache_mutex_);
    if (!projection_cache_) {
      const std::size_t n_data = data_count();
      auto p = std::make_shared<Matrix>(n_data, n_data);
      for (std::size_t r = 0; r < rank_; ++r) {
        const double* vr = svd_.vt.row_ptr(r);
        for (std::size_t i = 0; i < n_data; ++i) {
          const double w = vr[i];
          if (w == 0.0) continue;
          double* out = p->row_ptr(i);
          for (std::size_t j = 0; j < n_data; ++j) out[j] += w * vr[j];
        }
      }
      projection_cache_ = std::move(p);
    }
    return *projection_cache_;
  }

 private:
  Matrix phi_;
  double rank_tol_;
  SvdFactors svd_;
  std::size_t rank_ = 0;
  Matrix pinv_;
  mutable std::shared_ptr<const Matrix> projection_cache_;
  mutable std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
};

inline const Matrix& row_projection(const FeatureDiffMatrix& phi) {
  return phi.projection();
}

// Full row rank check: every feature direction must be identifiable from
// the data, i.e. rank(phi) == feature_dim.
inline bool check_assumption(const FeatureDiffMatrix& phi, double rank_tol = 1e-10) {
  return rank_from_singular_values(phi.svd().singular_values, rank_tol) ==
         phi.feature_dim();
}

}  // namespace pcm

#endif  // PCM_FEATURE_DIFF_HPP_
