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
// End-to-end acceptance gate. Runs eight independent checks against the
// library and prints exactly one PASS/FAIL line per check; the process exits
// nonzero when any check fails. Checks are ordered cheap-to-expensive and a
// failure in one never blocks the others.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pcm/attack.hpp"
#include "pcm/dataset.hpp"
#include "pcm/experiment.hpp"
#include "pcm/pcm.hpp"
#include "pcm/policy.hpp"
#include "pcm/reward.hpp"
#include "pcm/rng.hpp"

namespace fs = std::filesystem;
using pcm::FeatureDiffMatrix;
using pcm::Matrix;
using pcm::Vector;

namespace {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

pcm::PreferenceDataset dataset_from_phi(const Matrix& phi, Vector theta_o, std::size_t m) {
  pcm::PreferenceDataset ds;
  ds.n = phi.rows();
  ds.big_n = phi.cols();
  ds.m = m;
  ds.features_y = Matrix(ds.big_n, ds.n);
  ds.features_z = Matrix(ds.big_n, ds.n);
  for (std::size_t i = 0; i < ds.big_n; ++i)
    for (std::size_t j = 0; j < ds.n; ++j) ds.features_y(i, j) = phi(j, i);
  ds.theta_o = std::move(theta_o);
  return ds;
}

Matrix random_phi_matrix(std::size_t n, std::size_t big_n, pcm::Rng& rng) {
  Matrix phi(n, big_n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < big_n; ++j) phi(i, j) = rng.next_normal();
  return phi;
}

Vector random_grid_theta(std::size_t big_n, std::size_t m, pcm::Rng& rng) {
  Vector theta(big_n);
  for (auto& t : theta)
    t = static_cast<double>(rng.next_u64() % (m + 1)) / static_cast<double>(m);
  return theta;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string mask_wall_column(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.find_last_of(',');
    out << (cut == std::string::npos ? line : line.substr(0, cut)) << "\n";
  }
  return out.str();
}

// Check 1: on random instances the certified lower bound, the exact optimum,
// and the closed-form upper bound form a sandwich within 1e-6, in under 60 s.
CheckResult check_bound_sandwich() {
  const auto start = std::chrono::steady_clock::now();
  const double p_grid[] = {0.05, 0.1, 0.3};
  pcm::Rng rng(20260814);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + rng.next_u64() % 19;       // 2..20
    const std::size_t big_n = 5 + rng.next_u64() % 196;  // 5..200
    const double p = p_grid[i % 3];
    const auto ds = pcm::generate_synthetic(n, big_n, 1, pcm::mix_seed(7001, i));
    const auto target = pcm::random_flip_target(ds, p, pcm::mix_seed(7002, i));
    const FeatureDiffMatrix phi = pcm::feature_diff(ds);
    const auto sol = pcm::solve_pcm(ds, phi, target.theta_a);
    worst = std::max(worst, sol.lower_bound - sol.cost_continuous);
    worst = std::max(worst, sol.cost_continuous - sol.upper_bound);
  }
  const double secs = elapsed_s(start);
  const bool pass = worst <= 1e-6 && secs < 60.0;
  return {pass, format("200 instances, worst sandwich violation %.2e, %.1f s", worst, secs)};
}

// Check 2: against exhaustive enumeration on tiny instances, the continuous
// optimum matches vertex enumeration within 1e-7 and the discretized cost
// exceeds the exhaustive grid optimum by at most the rounding slack N/(2m).
CheckResult check_oracle_equivalence() {
  pcm::Rng rng(31415);
  double worst_cont = 0.0, worst_disc = 0.0;
  int count = 0;
  for (std::size_t n : {1, 2, 3})
    for (std::size_t big_n : {2, 3, 4})
      for (std::size_t m : {1, 2})
        for (int trial = 0; trial < 5; ++trial) {
          const Matrix phi = random_phi_matrix(n, big_n, rng);
          auto ds = dataset_from_phi(phi, random_grid_theta(big_n, m, rng), m);
          const Vector theta_a = random_grid_theta(big_n, m, rng);
          const FeatureDiffMatrix fdm = pcm::feature_diff(ds);
          const auto sol = pcm::solve_pcm(ds, fdm, theta_a);

          const auto vertex = oracle::lp_vertex_minimum(pcm::build_primal(ds, fdm, theta_a));
          if (!vertex.feasible) return {false, "vertex oracle found no feasible basis"};
          worst_cont = std::max(worst_cont, std::fabs(sol.cost_continuous - vertex.objective));

          const auto brute = oracle::grid_minimum(phi, ds.theta_o, theta_a, m);
          if (!brute.feasible) return {false, "grid oracle rejected the attack target"};
          const double slack = static_cast<double>(big_n) / (2.0 * static_cast<double>(m));
          worst_disc = std::max(worst_disc, sol.cost_discrete - brute.objective - slack);
          ++count;
        }
  const bool pass = worst_cont <= 1e-7 && worst_disc <= 1e-6;
  return {pass, format("%d instances, max LP gap %.2e, max discrete overshoot beyond slack %.2e",
                       count, worst_cont, worst_disc)};
}

// Check 3: training on the minimized continuous target reproduces the
// preference vector of training on the original attack target within 1e-5.
CheckResult check_effect_preservation() {
  pcm::Rng rng(27182);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + rng.next_u64() % 5;        // 2..6
    const std::size_t big_n = 10 + rng.next_u64() % 51;  // 10..60
    const auto ds = pcm::generate_synthetic(n, big_n, 1, pcm::mix_seed(8001, i));
    const auto target = pcm::random_flip_target(ds, 0.2, pcm::mix_seed(8002, i));
    const FeatureDiffMatrix phi = pcm::feature_diff(ds);
    const auto sol = pcm::solve_pcm(ds, phi, target.theta_a);
    const Vector pref_attack = pcm::preference_vector(phi, pcm::train_reward(phi, target.theta_a));
    const Vector pref_cheap =
        pcm::preference_vector(phi, pcm::train_reward(phi, sol.theta_star_continuous));
    for (std::size_t k = 0; k < big_n; ++k)
      worst = std::max(worst, std::fabs(pref_cheap[k] - pref_attack[k]));
  }
  return {worst <= 1e-5, format("50 instances, max preference deviation %.2e", worst)};
}

// Check 4: the synthetic sweep reproduces the qualitative trends: the
// minimized/naive cost ratio falls with the dataset size, the certified lower
// bound never exceeds the projected-change total, and the discretization loss
// rate shrinks as annotation granularity grows.
CheckResult check_trend_reproduction(const fs::path& work_dir) {
  const auto start = std::chrono::steady_clock::now();
  pcm::SweepConfig cfg;
  cfg.n_values = {50};
  cfg.big_n_values = {100, 250, 500, 1000, 2500, 5000};
  cfg.m_values = {1, 4, 16};
  cfg.trials = 5;
  cfg.seed = 6;
  cfg.attack.p = 0.1;
  cfg.out_dir = (work_dir / "trend").string();
  const auto rows = pcm::run_sweep(cfg);

  auto rows_at = [&](std::size_t big_n, std::size_t m) {
    std::vector<pcm::ExperimentRow> out;
    for (const auto& r : rows)
      if (r.big_n == big_n && r.m == m) out.push_back(r);
    return out;
  };

  // (a) median minimized/naive ratio non-increasing in N, < 0.9 once N >= 10n.
  std::vector<double> ratio_by_n;
  for (std::size_t big_n : cfg.big_n_values) {
    std::vector<double> ratios;
    for (const auto& r : rows_at(big_n, 1))
      if (r.naive_cost > 0.0) ratios.push_back(r.minimized_cost_continuous / r.naive_cost);
    ratio_by_n.push_back(median(ratios));
  }
  bool ratio_ok = true;
  for (std::size_t i = 0; i + 1 < ratio_by_n.size(); ++i)
    if (ratio_by_n[i + 1] > ratio_by_n[i] + 1e-6) ratio_ok = false;
  for (std::size_t i = 0; i < cfg.big_n_values.size(); ++i)
    if (cfg.big_n_values[i] >= 10 * cfg.n_values[0] && !(ratio_by_n[i] < 0.9)) ratio_ok = false;

  // (b) lower bound never exceeds the projected-change total.
  bool lower_ok = true;
  std::vector<double> bound_ratios;
  for (const auto& r : rows) {
    if (r.lower_bound > r.upper_bound_term + 1e-9) lower_ok = false;
    if (r.lower_bound > 0.0) bound_ratios.push_back(r.upper_bound_term / r.lower_bound);
  }

  // (c) at the largest N the median loss rate is non-increasing in m and at
  // most 0.3 for the coarsest grid.
  const std::size_t largest = cfg.big_n_values.back();
  std::vector<double> plr_by_m;
  bool plr_defined = true;
  for (std::size_t m : cfg.m_values) {
    std::vector<double> rates;
    for (const auto& r : rows_at(largest, m))
      if (!std::isnan(r.performance_loss_rate)) rates.push_back(r.performance_loss_rate);
    if (rates.size() < 3) plr_defined = false;
    plr_by_m.push_back(median(rates));
  }
  bool plr_ok = plr_defined;
  for (std::size_t i = 0; plr_ok && i + 1 < plr_by_m.size(); ++i)
    if (plr_by_m[i + 1] > plr_by_m[i] + 1e-6) plr_ok = false;
  if (plr_ok && !(plr_by_m.front() <= 0.3)) plr_ok = false;

  const double secs = elapsed_s(start);
  const bool pass = ratio_ok && lower_ok && plr_ok && secs < 900.0;
  return {pass,
          format("cost ratio %.3f@N=100 to %.3f@N=5000 (monotone=%s), "
                 "median ||Pd||_1/lower %.2f (lower<=||Pd||_1: %s), "
                 "loss rate m1/m4/m16 %.3f/%.3f/%.3f, %.0f s",
                 ratio_by_n.front(), ratio_by_n.back(), ratio_ok ? "yes" : "no",
                 median(bound_ratios), lower_ok ? "yes" : "no", plr_by_m[0], plr_by_m[1],
                 plr_by_m[2], secs)};
}

// Check 5: analytic gradient and Hessian of the preference loss match central
// finite differences at 1e-5 / 1e-4 relative tolerance.
CheckResult check_loss_derivatives() {
  pcm::Rng rng(16180);
  double worst_grad = 0.0, worst_hess = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + rng.next_u64() % 4;       // 2..5
    const std::size_t big_n = 5 + rng.next_u64() % 16;  // 5..20
    const Matrix phi_mat = random_phi_matrix(n, big_n, rng);
    const FeatureDiffMatrix phi(phi_mat);
    Vector theta(big_n), r(n);
    for (auto& t : theta) t = rng.next_uniform();
    for (auto& w : r) w = 0.5 * rng.next_normal();

    const auto loss_at = [&](const Vector& weights) {
      return pcm::loss_and_gradient(phi, theta, weights).loss;
    };
    const Vector grad = pcm::loss_and_gradient(phi, theta, r).gradient;
    const Vector grad_fd = oracle::fd_gradient(loss_at, r);
    double gref = 1.0;
    for (double g : grad) gref = std::max(gref, std::fabs(g));
    for (std::size_t j = 0; j < n; ++j)
      worst_grad = std::max(worst_grad, std::fabs(grad[j] - grad_fd[j]) / gref);

    const Matrix hess = pcm::loss_hessian(phi, r);
    const Matrix hess_fd = oracle::fd_hessian(loss_at, r);
    double href = 1.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) href = std::max(href, std::fabs(hess(a, b)));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        worst_hess = std::max(worst_hess, std::fabs(hess(a, b) - hess_fd(a, b)) / href);
  }
  const bool pass = worst_grad <= 1e-5 && worst_hess <= 1e-4;
  return {pass, format("50 instances, max rel gradient error %.2e, max rel Hessian error %.2e",
                       worst_grad, worst_hess)};
}

// Check 6: two rewards induce the same optimal policy exactly when they
// differ by per-prompt offsets, and adding such offsets leaves the computed
// policy unchanged, on 100 random tabular instances.
CheckResult check_policy_equivalence() {
  pcm::Rng rng(14142);
  const double tol = 1e-9;
  for (int i = 0; i < 100; ++i) {
    const std::size_t x_count = 1 + rng.next_u64() % 8;
    const std::size_t y_count = 2 + rng.next_u64() % 7;
    pcm::TabularReward r1{Matrix(x_count, y_count)};
    for (std::size_t x = 0; x < x_count; ++x)
      for (std::size_t y = 0; y < y_count; ++y)
        r1.values(x, y) = 2.0 * rng.next_uniform() - 1.0;

    pcm::TabularReward r2{r1.values};
    for (std::size_t x = 0; x < x_count; ++x) {
      const double offset = 2.0 * rng.next_uniform() - 1.0;
      for (std::size_t y = 0; y < y_count; ++y) r2.values(x, y) += offset;
    }
    const bool make_equivalent = (i % 2 == 0);
    if (!make_equivalent)
      r2.values(rng.next_u64() % x_count, rng.next_u64() % y_count) += 0.5;

    pcm::TabularPolicy ref{Matrix(x_count, y_count)};
    for (std::size_t x = 0; x < x_count; ++x)
      for (std::size_t y = 0; y < y_count; ++y)
        ref.probs(x, y) = 1.0 / static_cast<double>(y_count);

    if (pcm::same_policy(r1, r2, tol) != make_equivalent)
      return {false, format("equivalence predicate wrong on instance %d", i)};
    const auto p1 = pcm::optimal_policy(r1, ref, 1.0);
    const auto p2 = pcm::optimal_policy(r2, ref, 1.0);
    double gap = 0.0;
    for (std::size_t x = 0; x < x_count; ++x)
      for (std::size_t y = 0; y < y_count; ++y)
        gap = std::max(gap, std::fabs(p1.probs(x, y) - p2.probs(x, y)));
    if (make_equivalent && gap > tol)
      return {false, format("offset-shifted reward moved the policy by %.2e", gap)};
    if (!make_equivalent && gap <= tol)
      return {false, format("perturbed reward left the policy unchanged on instance %d", i)};
  }
  return {true, "100 instances, biconditional and offset invariance hold at 1e-9"};
}

// Check 7: the score-preserving relaxation never costs more than the full
// problem, and collapses to it when the constraint matrix is already the
// single preserved-score row.
CheckResult check_reduced_ordering() {
  pcm::Rng rng(17320);
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_equality = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + rng.next_u64() % 3;       // 2..4
    const std::size_t big_n = 8 + rng.next_u64() % 25;  // 8..32
    const auto ds = pcm::generate_synthetic(n, big_n, 1, pcm::mix_seed(9001, i));
    const auto target = pcm::random_flip_target(ds, 0.25, pcm::mix_seed(9002, i));
    const FeatureDiffMatrix phi = pcm::feature_diff(ds);
    const Vector reward_a = pcm::train_reward(phi, target.theta_a);
    const auto full = pcm::solve_pcm(ds, phi, target.theta_a);
    const auto reduced = pcm::solve_reduced(ds, phi, reward_a, target.theta_a);
    worst_excess = std::max(worst_excess, reduced.cost_continuous - full.cost_continuous);

    if (i < 10) {
      // Rebuild the instance with the preserved-score row as its whole
      // constraint matrix: the relaxation and the full problem coincide.
      Matrix row(1, big_n);
      const Matrix& f = phi.matrix();
      for (std::size_t k = 0; k < big_n; ++k) {
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) v += reward_a[j] * f(j, k);
        row(0, k) = v;
      }
      auto row_ds = dataset_from_phi(row, ds.theta_o, ds.m);
      const FeatureDiffMatrix row_phi = pcm::feature_diff(row_ds);
      const auto row_full = pcm::solve_pcm(row_ds, row_phi, target.theta_a);
      worst_equality = std::max(
          worst_equality, std::fabs(row_full.cost_continuous - reduced.cost_continuous));
    }
  }
  const bool pass = worst_excess <= 1e-8 && worst_equality <= 1e-9;
  return {pass, format("50 instances, max reduced excess %.2e, max single-row gap %.2e",
                       worst_excess, worst_equality)};
}

// Check 8: identical seeds give byte-identical dataset files and sweep CSV
// bodies (the wall-clock column is timing noise and is excluded).
CheckResult check_determinism(const fs::path& work_dir) {
  const auto ds1 = pcm::generate_synthetic(7, 40, 2, 123);
  const auto ds2 = pcm::generate_synthetic(7, 40, 2, 123);
  const fs::path file_a = work_dir / "det_a.pcm";
  const fs::path file_b = work_dir / "det_b.pcm";
  pcm::write_dataset(ds1, file_a.string());
  pcm::write_dataset(ds2, file_b.string());
  const bool datasets_equal = read_text(file_a) == read_text(file_b);

  pcm::SweepConfig cfg;
  cfg.n_values = {3};
  cfg.big_n_values = {10, 20};
  cfg.m_values = {1, 2};
  cfg.trials = 2;
  cfg.seed = 77;
  cfg.attack.p = 0.3;
  cfg.out_dir = (work_dir / "det_sweep_a").string();
  pcm::run_sweep(cfg);
  cfg.out_dir = (work_dir / "det_sweep_b").string();
  pcm::run_sweep(cfg);
  const bool csv_equal =
      mask_wall_column(read_text(work_dir / "det_sweep_a" / "results.csv")) ==
      mask_wall_column(read_text(work_dir / "det_sweep_b" / "results.csv"));

  const bool pass = datasets_equal && csv_equal;
  return {pass, format("dataset bytes identical: %s, CSV bodies identical: %s",
                       datasets_equal ? "yes" : "no", csv_equal ? "yes" : "no")};
}

}  // namespace

int main() {
  const fs::path work_dir = fs::temp_directory_path() / "pcm_acceptance";
  fs::remove_all(work_dir);
  fs::create_directories(work_dir);

  struct Check {
    const char* name;
    std::function<CheckResult()> run;
  };
  const std::vector<Check> checks = {
      {"bound sandwich", check_bound_sandwich},
      {"oracle equivalence", check_oracle_equivalence},
      {"effect preservation", check_effect_preservation},
      {"trend reproduction", [&] { return check_trend_reproduction(work_dir); }},
      {"loss derivatives", check_loss_derivatives},
      {"policy equivalence", check_policy_equivalence},
      {"reduced-problem ordering", check_reduced_ordering},
      {"determinism", [&] { return check_determinism(work_dir); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    CheckResult result;
    try {
      result = checks[i].run();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    if (!result.pass) ++failures;
    std::printf("[%zu/8] %-26s %s  (%s)\n", i + 1, checks[i].name,
                result.pass ? "PASS" : "FAIL", result.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(work_dir);
  if (failures > 0) std::printf("%d of 8 acceptance checks failed\n", failures);
  return failures == 0 ? 0 : 1;
}
