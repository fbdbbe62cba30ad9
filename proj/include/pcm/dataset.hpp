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
// Preference datasets: N comparison pairs with n-dimensional features per
// response, a preference probability theta_o[i] in [0,1] per pair, and a
// label granularity m (each pair stands for m duplicated labeled copies).
//
// On-disk format (all integers and floats little-endian):
//   line 1: magic "PCM1"
//   line 2: one-line JSON header {"n":..,"N":..,"m":..,"seed":..}
//   payload: raw f64 features_y (N*n, row-major), features_z (N*n),
//            theta_o (N).

#ifndef PCM_DATASET_HPP_
#define PCM_DATASET_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcm/errors.hpp"
#include "pcm/feature_diff.hpp"
#include "pcm/matrix.hpp"
#include "pcm/rng.hpp"

namespace pcm {

struct PreferenceDataset {
  std::size_t n = 0;      // feature dimension
  std::size_t big_n = 0;  // number of comparison pairs
  std::size_t m = 1;      // label granularity (duplication factor)
  std::uint64_t seed = 0;
  Matrix features_y;  // N x n
  Matrix features_z;  // N x n
  Vector theta_o;     // N, entries in [0,1]
};

// Labels are +1/-1, one row of m labels per pair.
using LabelMatrix = std::vector<std::vector<std::int8_t>>;

struct LabeledDataset {
  PreferenceDataset base;
  LabelMatrix labels;
};

inline void validate_dataset(const PreferenceDataset& ds) {
  if (ds.n == 0 || ds.big_n == 0) throw ContractError("dataset dimensions must be positive");
  if (ds.m == 0) throw ContractError("label granularity must be positive");
  if (ds.features_y.rows() != ds.big_n || ds.features_y.cols() != ds.n ||
      ds.features_z.rows() != ds.big_n || ds.features_z.cols() != ds.n)
    throw ContractError("feature matrices do not match dataset dimensions");
  if (ds.theta_o.size() != ds.big_n)
    throw ContractError("preference vector does not match dataset size");
  for (double t : ds.theta_o)
    if (!(t >= 0.0 && t <= 1.0))
      throw ContractError("preference probabilities must lie in [0,1]");
}

// Synthetic data: every feature entry is an independent standard normal;
// draw order is features_y row-major, then features_z row-major. The clean
// preferences are all ones (the y response is always preferred).
inline PreferenceDataset generate_synthetic(std::size_t n, std::size_t big_n,
                                            std::size_t m, std::uint64_t seed) {
  if (n == 0 || big_n == 0 || m == 0)
    throw ContractError("synthetic dataset dimensions must be positive");
  PreferenceDataset ds;
  ds.n = n;
  ds.big_n = big_n;
  ds.m = m;
  ds.seed = seed;
  Rng rng(seed);
  ds.features_y = Matrix(big_n, n);
  ds.features_z = Matrix(big_n, n);
  for (std::size_t i = 0; i < big_n; ++i)
    for (std::size_t j = 0; j < n; ++j) ds.features_y(i, j) = rng.next_normal();
  for (std::size_t i = 0; i < big_n; ++i)
    for (std::size_t j = 0; j < n; ++j) ds.features_z(i, j) = rng.next_normal();
  ds.theta_o.assign(big_n, 1.0);
  return ds;
}

inline FeatureDiffMatrix feature_diff(const PreferenceDataset& ds) {
  validate_dataset(ds);
  Matrix phi(ds.n, ds.big_n);
  for (std::size_t i = 0; i < ds.big_n; ++i)
    for (std::size_t j = 0; j < ds.n; ++j)
      phi(j, i) = ds.features_y(i, j) - ds.features_z(i, j);
  return FeatureDiffMatrix(std::move(phi));
}

// Rounds every entry to the nearest multiple of 1/m, halves rounding up.
inline Vector discretize_theta(const Vector& theta, std::size_t m) {
  if (m == 0) throw ContractError("granularity must be positive");
  Vector out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double t = theta[i];
    if (!(t >= 0.0 && t <= 1.0))
      throw ContractError("discretization input outside [0,1]");
    out[i] = std::floor(t * static_cast<double>(m) + 0.5) / static_cast<double>(m);
  }
  return out;
}

// Expands a discretized preference vector into m labels per pair: the first
// m*theta[i] duplicates get +1, the rest -1. theta must be on the 1/m grid.
inline LabelMatrix assign_labels(const Vector& theta, std::size_t m) {
  if (m == 0) throw ContractError("granularity must be positive");
  LabelMatrix labels(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double scaled = theta[i] * static_cast<double>(m);
    const double rounded = std::floor(scaled + 0.5);
    if (std::fabs(scaled - rounded) > 1e-12 * std::max<double>(1.0, m) ||
        rounded < 0.0 || rounded > static_cast<double>(m))
      throw ContractError("preference value is not a multiple of 1/m");
    const auto positives = static_cast<std::size_t>(rounded);
    labels[i].assign(m, -1);
    for (std::size_t j = 0; j < positives; ++j) labels[i][j] = 1;
  }
  return labels;
}

inline LabeledDataset make_labeled(const PreferenceDataset& ds, const Vector& theta) {
  validate_dataset(ds);
  if (theta.size() != ds.big_n)
    throw ContractError("preference vector does not match dataset size");
  return {ds, assign_labels(theta, ds.m)};
}

inline std::size_t label_flip_count(const LabelMatrix& a, const LabelMatrix& b) {
  if (a.size() != b.size()) throw ContractError("label arrays differ in size");
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw ContractError("label arrays differ in width");
    for (std::size_t j = 0; j < a[i].size(); ++j)
      if (a[i][j] != b[i][j]) ++count;
  }
  return count;
}

namespace detail {

inline void append_f64_le(std::string& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  for (int byte = 0; byte < 8; ++byte)
    out.push_back(static_cast<char>((bits >> (8 * byte)) & 0xFF));
}

inline double read_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int byte = 0; byte < 8; ++byte)
    bits |= static_cast<std::uint64_t>(p[byte]) << (8 * byte);
  double value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

}  // namespace detail

inline std::string serialize_dataset(const PreferenceDataset& ds) {
  validate_dataset(ds);
  char header[160];
  std::snprintf(header, sizeof(header), "{\"n\":%zu,\"N\":%zu,\"m\":%zu,\"seed\":%llu}",
                ds.n, ds.big_n, ds.m, static_cast<unsigned long long>(ds.seed));
  std::string out;
  out.reserve(16 + std::strlen(header) + 8 * (2 * ds.big_n * ds.n + ds.big_n));
  out += "PCM1\n";
  out += header;
  out += '\n';
  for (double v : ds.features_y.data()) detail::append_f64_le(out, v);
  for (double v : ds.features_z.data()) detail::append_f64_le(out, v);
  for (double v : ds.theta_o) detail::append_f64_le(out, v);
  return out;
}

inline void write_dataset(const PreferenceDataset& ds, const std::string& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ContractError("cannot open dataset file for writing: " + path);
  const std::string bytes = serialize_dataset(ds);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw ContractError("failed writing dataset file: " + path);
}

inline PreferenceDataset parse_dataset(const std::string& bytes, const std::string& origin) {
  const std::string label = origin.empty() ? "dataset" : origin;
  std::size_t pos = bytes.find('\n');
  if (pos == std::string::npos || bytes.substr(0, pos) != "PCM1")
    throw ContractError(label + ": bad magic line, expected PCM1");
  const std::size_t header_start = pos + 1;
  const std::size_t header_end = bytes.find('\n', header_start);
  if (header_end == std::string::npos)
    throw ContractError(label + ": missing header line");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(header_start, header_end - header_start));
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(label + ": unparsable JSON header: " + e.what());
  }
  if (!header.contains("n") || !header.contains("N") || !header.contains("m") ||
      !header.contains("seed"))
    throw ContractError(label + ": header must contain n, N, m, seed");

  PreferenceDataset ds;
  ds.n = header["n"].get<std::size_t>();
  ds.big_n = header["N"].get<std::size_t>();
  ds.m = header["m"].get<std::size_t>();
  ds.seed = header["seed"].get<std::uint64_t>();
  if (ds.n == 0 || ds.big_n == 0 || ds.m == 0)
    throw ContractError(label + ": header dimensions must be positive");

  const std::size_t expected = 8 * (2 * ds.big_n * ds.n + ds.big_n);
  const std::size_t payload_start = header_end + 1;
  if (bytes.size() - payload_start != expected)
    throw ContractError(label + ": payload has " +
                        std::to_string(bytes.size() - payload_start) +
                        " bytes, expected " + std::to_string(expected));

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + payload_start);
  ds.features_y = Matrix(ds.big_n, ds.n);
  ds.features_z = Matrix(ds.big_n, ds.n);
  ds.theta_o.resize(ds.big_n);
  for (std::size_t i = 0; i < ds.big_n; ++i)
    for (std::size_t j = 0; j < ds.n; ++j, p += 8) ds.features_y(i, j) = detail::read_f64_le(p);
  for (std::size_t i = 0; i < ds.big_n; ++i)
    for (std::size_t j = 0; j < ds.n; ++j, p += 8) ds.features_z(i, j) = detail::read_f64_le(p);
  for (std::size_t i = 0; i < ds.big_n; ++i, p += 8) ds.theta_o[i] = detail::read_f64_le(p);
  try {
    validate_dataset(ds);
  } catch (const ContractError& e) {
    throw ContractError(label + ": payload invalid: " + e.what());
  }
  return ds;
}

inline PreferenceDataset read_dataset(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ContractError("cannot open dataset file: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_dataset(buffer.str(), path);
}

// Preference vectors travel as CSV with one value per line and an optional
// "theta" header.
inline void write_theta_csv(const Vector& theta, const std::string& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ContractError("cannot open vector file for writing: " + path);
  file << "theta\n";
  char buf[48];
  for (double v : theta) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    file << buf;
  }
  if (!file) throw ContractError("failed writing vector file: " + path);
}

inline Vector read_theta_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ContractError("cannot open vector file: " + path);
  Vector out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "theta") continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || (end && *end != '\0'))
      throw ContractError(path + ": unparsable value at line " + std::to_string(line_no));
    out.push_back(v);
  }
  if (out.empty()) throw ContractError(path + ": no values found");
  return out;
}

}  // namespace pcm

#endif  // PCM_DATASET_HPP_
