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
// Factorial sweep harness over synthetic datasets. Each cell derives its
// seed from the master seed and the cell coordinates (n, N, trial), so
// cells are reproducible in isolation and every granularity m sees the
// same data and attack. Rows stream to CSV in canonical cell order even
// when cells run on a worker pool, so a finished sweep's CSV is a pure
// function of its configuration except for the wall-clock column.

#ifndef PCM_EXPERIMENT_HPP_
#define PCM_EXPERIMENT_HPP_

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pcm/attack.hpp"
#include "pcm/dataset.hpp"
#include "pcm/errors.hpp"
#include "pcm/pcm.hpp"
#include "pcm/reward.hpp"
#include "pcm/rng.hpp"

namespace pcm {

// Ratio of the policy-level damage lost to discretization: deviation of the
// rounded attack from the exact attack, relative to the exact attack's
// deviation from clean training, all measured between trained models'
// preference vectors.
inline double performance_loss_rate(const FeatureDiffMatrix& phi, const Vector& theta_o,
                                    const Vector& theta_a, const Vector& theta_star_disc,
                                    const TrainConfig& cfg = {}) {
  const Vector pref_o = preference_vector(phi, train_reward(phi, theta_o, cfg));
  const Vector pref_a = preference_vector(phi, train_reward(phi, theta_a, cfg));
  const Vector pref_star = preference_vector(phi, train_reward(phi, theta_star_disc, cfg));
  double numerator = 0.0, denominator = 0.0;
  for (std::size_t i = 0; i < pref_o.size(); ++i) {
    numerator += std::fabs(pref_star[i] - pref_a[i]);
    denominator += std::fabs(pref_a[i] - pref_o[i]);
  }
  if (denominator <= 1e-12)
    throw NumericalError("performance loss rate undefined: the attack does not "
                         "change the trained preferences");
  return numerator / denominator;
}

enum class AttackKind { kRandomFlip, kFirstFeature };

struct AttackSpec {
  AttackKind kind = AttackKind::kRandomFlip;
  double p = 0.1;   // random flip probability
  double a = 0.25;  // first-feature quality-filter fraction
  double b = 0.1;   // first-feature flip fraction
};

struct SweepConfig {
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> big_n_values;
  std::vector<std::size_t> m_values;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  AttackSpec attack;
};

struct ExperimentRow {
  std::size_t n = 0, big_n = 0, m = 0, trial = 0;
  double naive_cost = 0.0;
  double minimized_cost_continuous = 0.0;
  double minimized_cost_discrete = 0.0;
  double lower_bound = 0.0;
  double upper_bound_term = 0.0;  // ||P d||_1
  double performance_loss_rate = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

inline const char* experiment_csv_header() {
  return "n,big_n,m,trial,naive_cost,minimized_cost_continuous,"
         "minimized_cost_discrete,lower_bound,upper_bound_term,"
         "performance_loss_rate,wall_ms";
}

inline std::string to_csv_line(const ExperimentRow& r) {
  char buf[320];
  std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g",
                r.n, r.big_n, r.m, r.trial, r.naive_cost, r.minimized_cost_continuous,
                r.minimized_cost_discrete, r.lower_bound, r.upper_bound_term,
                r.performance_loss_rate, r.wall_ms);
  return buf;
}

inline std::vector<ExperimentRow> read_rows_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ContractError("cannot open results file: " + path);
  std::string line;
  if (!std::getline(file, line)) throw ContractError(path + ": empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != experiment_csv_header())
    throw ContractError(path + ": unexpected CSV header");
  std::vector<ExperimentRow> rows;
  std::size_t line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 11)
      throw ContractError(path + ": wrong field count at line " + std::to_string(line_no));
    auto parse_u = [&](const std::string& s) -> std::size_t {
      return static_cast<std::size_t>(std::strtoull(s.c_str(), nullptr, 10));
    };
    auto parse_d = [&](const std::string& s) -> double {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str())
        throw ContractError(path + ": unparsable number at line " + std::to_string(line_no));
      return v;
    };
    ExperimentRow r;
    r.n = parse_u(fields[0]);
    r.big_n = parse_u(fields[1]);
    r.m = parse_u(fields[2]);
    r.trial = parse_u(fields[3]);
    r.naive_cost = parse_d(fields[4]);
    r.minimized_cost_continuous = parse_d(fields[5]);
    r.minimized_cost_discrete = parse_d(fields[6]);
    r.lower_bound = parse_d(fields[7]);
    r.upper_bound_term = parse_d(fields[8]);
    r.performance_loss_rate = parse_d(fields[9]);
    r.wall_ms = parse_d(fields[10]);
    rows.push_back(r);
  }
  return rows;
}

// Seed for one sweep cell. The granularity m is deliberately absent so all
// m variants of a cell share the dataset and the attack.
inline std::uint64_t cell_seed(std::uint64_t master, std::size_t n, std::size_t big_n,
                               std::size_t trial) {
  std::uint64_t h = mix_seed(0x70636DULL, n);
  h = mix_seed(h, big_n);
  h = mix_seed(h, trial);
  return master ^ h;
}

inline AttackTarget apply_attack(const PreferenceDataset& ds, const AttackSpec& spec,
                                 std::uint64_t seed) {
  if (spec.kind == AttackKind::kRandomFlip)
    return random_flip_target(ds, spec.p, seed);
  return first_feature_poison_target(ds, spec.a, spec.b);
}

inline void validate_sweep_config(const SweepConfig& cfg) {
  if (cfg.n_values.empty() || cfg.big_n_values.empty() || cfg.m_values.empty())
    throw ContractError("sweep grids must be nonempty");
  for (std::size_t v : cfg.n_values)
    if (v == 0) throw ContractError("feature dimensions must be positive");
  for (std::size_t v : cfg.big_n_values)
    if (v == 0) throw ContractError("data counts must be positive");
  for (std::size_t v : cfg.m_values)
    if (v == 0) throw ContractError("granularities must be positive");
  if (cfg.trials == 0) throw ContractError("trial count must be positive");
  if (cfg.out_dir.empty()) throw ContractError("sweep output directory is required");
  if (!(cfg.attack.p >= 0.0 && cfg.attack.p <= 1.0) ||
      !(cfg.attack.a >= 0.0 && cfg.attack.a <= 1.0) ||
      !(cfg.attack.b >= 0.0 && cfg.attack.b <= 1.0))
    throw ContractError("attack fractions must lie in [0,1]");
}

namespace detail {

struct CellCoords {
  std::size_t n, big_n, m, trial;
};

inline ExperimentRow run_cell(const SweepConfig& cfg, const CellCoords& cell) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t base = cell_seed(cfg.seed, cell.n, cell.big_n, cell.trial);
  const PreferenceDataset ds =
      generate_synthetic(cell.n, cell.big_n, cell.m, mix_seed(base, 1));
  const FeatureDiffMatrix phi = feature_diff(ds);
  const AttackTarget target = apply_attack(ds, cfg.attack, mix_seed(base, 2));

  const PcmSolution sol = solve_pcm(ds, phi, target.theta_a);

  ExperimentRow row;
  row.n = cell.n;
  row.big_n = cell.big_n;
  row.m = cell.m;
  row.trial = cell.trial;
  row.naive_cost = sol.naive_cost;
  row.minimized_cost_continuous = sol.cost_continuous;
  row.minimized_cost_discrete = sol.cost_discrete;
  row.lower_bound = sol.lower_bound;
  Vector d(ds.big_n);
  for (std::size_t i = 0; i < ds.big_n; ++i) d[i] = target.theta_a[i] - ds.theta_o[i];
  row.upper_bound_term = norm_l1(phi.project(d));

  if (sol.naive_cost > 0.0) {
    try {
      row.performance_loss_rate = performance_loss_rate(
          phi, ds.theta_o, target.theta_a, sol.theta_star_discrete);
    } catch (const NumericalError&) {
      // Attack indistinguishable from clean training: the rate is undefined
      // and the row records it as missing.
    }
  }
  const auto end = std::chrono::steady_clock::now();
  row.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return row;
}

}  // namespace detail

// Runs the full factorial (n x N x m x trial), streaming rows to
// out_dir/results.csv in canonical order. Returns the rows in the same
// order. progress, when given, receives one line per finished cell.
inline std::vector<ExperimentRow> run_sweep(const SweepConfig& cfg, std::size_t jobs = 1,
                                            std::ostream* progress = nullptr) {
  validate_sweep_config(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string csv_path = cfg.out_dir + "/results.csv";
  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw ContractError("cannot open results file for writing: " + csv_path);
  csv << experiment_csv_header() << "\n";
  csv.flush();

  std::vector<detail::CellCoords> cells;
  for (std::size_t n : cfg.n_values)
    for (std::size_t big_n : cfg.big_n_values)
      for (std::size_t m : cfg.m_values)
        for (std::size_t trial = 0; trial < cfg.trials; ++trial)
          cells.push_back({n, big_n, m, trial});

  std::vector<ExperimentRow> rows(cells.size());
  std::mutex write_mutex;
  std::map<std::size_t, const ExperimentRow*> pending;
  std::size_t next_to_write = 0;
  auto commit = [&](std::size_t index) {
    // Serialize in canonical order: hold rows back until their turn.
    std::lock_guard<std::mutex> lock(write_mutex);
    pending[index] = &rows[index];
    while (!pending.empty() && pending.begin()->first == next_to_write) {
      csv << to_csv_line(*pending.begin()->second) << "\n";
      csv.flush();
      pending.erase(pending.begin());
      ++next_to_write;
    }
    if (progress) {
      const auto& cell = cells[index];
      *progress << "cell " << (index + 1) << "/" << cells.size() << " n=" << cell.n
                << " N=" << cell.big_n << " m=" << cell.m << " trial=" << cell.trial
                << " done\n";
      progress->flush();
    }
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      rows[i] = detail::run_cell(cfg, cells[i]);
      commit(i);
    }
  } else {
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= cells.size()) return;
        try {
          rows[i] = detail::run_cell(cfg, cells[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          rows[i] = ExperimentRow{};
        }
        commit(i);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min(jobs, cells.size());
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  csv.close();
  return rows;
}

// Configuration files are flat key = value documents with one optional
// [attack] table; see the README for the schema.
inline SweepConfig parse_sweep_config(const std::string& text) {
  SweepConfig cfg;
  bool in_attack = false;
  bool saw_type = false;
  std::istringstream stream(text);
  std::string raw;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& message) -> void {
    throw ContractError("config line " + std::to_string(line_no) + ": " + message);
  };
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    if (first == std::string::npos) return std::string();
    return s.substr(first, last - first + 1);
  };
  auto parse_uint = [&](const std::string& s) -> std::uint64_t {
    char* end = nullptr;
    const auto v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') fail("expected an unsigned integer, got '" + s + "'");
    return v;
  };
  auto parse_double = [&](const std::string& s) -> double {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') fail("expected a number, got '" + s + "'");
    return v;
  };
  auto parse_uint_list = [&](const std::string& s) {
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail("expected a [..] list");
    std::vector<std::size_t> out;
    std::stringstream items(s.substr(1, s.size() - 2));
    std::string item;
    while (std::getline(items, item, ',')) {
      item = trim(item);
      if (item.empty()) fail("empty list element");
      out.push_back(static_cast<std::size_t>(parse_uint(item)));
    }
    if (out.empty()) fail("list must not be empty");
    return out;
  };
  auto parse_string = [&](const std::string& s) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"')
      fail("expected a double-quoted string");
    return s.substr(1, s.size() - 2);
  };

  while (std::getline(stream, raw)) {
    ++line_no;
    // Strip comments outside quotes.
    bool quoted = false;
    std::string line;
    for (char ch : raw) {
      if (ch == '"') quoted = !quoted;
      if (ch == '#' && !quoted) break;
      line.push_back(ch);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[attack]")
        in_attack = true;
      else
        fail("unknown table '" + line + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail("expected key = value");

    if (in_attack) {
      if (key == "type") {
        const std::string type = parse_string(value);
        if (type == "random_flip")
          cfg.attack.kind = AttackKind::kRandomFlip;
        else if (type == "first_feature")
          cfg.attack.kind = AttackKind::kFirstFeature;
        else
          fail("unknown attack type '" + type + "'");
        saw_type = true;
      } else if (key == "p") {
        cfg.attack.p = parse_double(value);
      } else if (key == "a") {
        cfg.attack.a = parse_double(value);
      } else if (key == "b") {
        cfg.attack.b = parse_double(value);
      } else {
        fail("unknown attack key '" + key + "'");
      }
      continue;
    }
    if (key == "n_values")
      cfg.n_values = parse_uint_list(value);
    else if (key == "big_n_values")
      cfg.big_n_values = parse_uint_list(value);
    else if (key == "m_values")
      cfg.m_values = parse_uint_list(value);
    else if (key == "trials")
      cfg.trials = static_cast<std::size_t>(parse_uint(value));
    else if (key == "seed")
      cfg.seed = parse_uint(value);
    else if (key == "out_dir")
      cfg.out_dir = parse_string(value);
    else
      fail("unknown key '" + key + "'");
  }
  if (in_attack && !saw_type)
    throw ContractError("config: [attack] table requires a type");
  validate_sweep_config(cfg);
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ContractError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_sweep_config(buffer.str());
}

}  // namespace pcm

#endif  // PCM_EXPERIMENT_HPP_
