/*
 * Copyright 2026 The imbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Telemetry data model: column schema, labelled feature matrix, CSV ingest
// with NaN row-dropping, stratified three-way splits and a synthetic
// BER/OSNR testbed generator.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "imb/common.hpp"

namespace imb {

enum class FeatureKind { kContinuous, kCategoricalId, kTimestamp };

inline std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kContinuous: return "continuous";
    case FeatureKind::kCategoricalId: return "categorical-id";
    case FeatureKind::kTimestamp: return "timestamp";
  }
  return "?";
}

struct ColumnSchema {
  std::vector<std::string> names;
  std::string label_name = "failure";
  std::vector<FeatureKind> kinds;

  void validate() const {
    if (names.size() != kinds.size()) throw ConfigError("schema: names/kinds length mismatch");
    std::set<std::string> seen;
    bool has_continuous = false;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!seen.insert(names[i]).second) throw ConfigError("schema: duplicate column '" + names[i] + "'");
      if (names[i] == label_name) throw ConfigError("schema: label column listed as a feature");
      has_continuous |= kinds[i] == FeatureKind::kContinuous;
    }
    if (!has_continuous) throw ConfigError("schema: at least one continuous feature required");
  }

  static ColumnSchema all_continuous(std::vector<std::string> names, std::string label = "failure") {
    ColumnSchema s;
    s.kinds.assign(names.size(), FeatureKind::kContinuous);
    s.names = std::move(names);
    s.label_name = std::move(label);
    return s;
  }

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

// Guesses a schema from a CSV header: last column is the label, timestamp and
// device columns are recognised by name, everything else is continuous.
inline ColumnSchema infer_schema(const std::vector<std::string>& header) {
  if (header.size() < 2) throw DataError("csv header needs at least one feature and a label");
  ColumnSchema s;
  s.label_name = header.back();
  for (std::size_t i = 0; i + 1 < header.size(); ++i) {
    std::string lower = header[i];
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    FeatureKind kind = FeatureKind::kContinuous;
    if (lower == "timestamp" || lower == "time") {
      kind = FeatureKind::kTimestamp;
    } else if (lower == "type" || lower == "id" || lower == "device_type" || lower == "device_id") {
      kind = FeatureKind::kCategoricalId;
    }
    s.names.push_back(header[i]);
    s.kinds.push_back(kind);
  }
  return s;
}

struct ClassCounts {
  std::size_t normal = 0;
  std::size_t failure = 0;
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

// Feature matrix plus binary labels. Failure (label 1) is the minority class
// throughout the library; `schema` describes the columns of `x`.
struct Dataset {
  ColumnSchema schema;
  Matrix x;
  Labels y;

  std::size_t size() const { return y.size(); }
  std::size_t width() const { return x.cols(); }

  ClassCounts counts() const {
    ClassCounts c;
    for (int label : y) (label == 1 ? c.failure : c.normal)++;
    return c;
  }
  std::size_t n_majority() const { return counts().normal; }
  std::size_t n_minority() const { return counts().failure; }

  std::vector<std::size_t> indices_of(int label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == label) out.push_back(i);
    return out;
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset d;
    d.schema = schema;
    d.x = x.select_rows(indices);
    d.y.reserve(indices.size());
    for (auto i : indices) d.y.push_back(y[i]);
    return d;
  }

  void validate() const {
    if (x.rows() != y.size()) throw DataError("dataset: row/label count mismatch");
    if (x.cols() != schema.names.size()) throw DataError("dataset: width does not match schema");
    for (double v : x.data())
      if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
    for (int label : y)
      if (label != 0 && label != 1) throw DataError("dataset: non-binary label");
    if (n_minority() < 1) throw DataError("dataset: no minority (failure) rows");
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// ---------------------------------------------------------------------------
// CSV

struct LoadOptions {
  // Device type/ID columns are encoded but left out of the feature matrix
  // unless this is set.
  bool include_device_columns = false;
};

struct LoadResult {
  Dataset data;
  std::size_t dropped_rows = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "nan" || cell == "NaN" || cell == "NAN" || cell == "NA" || cell == "null";
}

inline std::optional<double> parse_double(const std::string& cell) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

}  // namespace detail

// Canonical numeric formatting used by every CSV writer: 9 significant digits.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline LoadResult load_csv(std::istream& in, const ColumnSchema& schema, const LoadOptions& options = {}) {
  if (schema.names.size() != schema.kinds.size()) throw ConfigError("schema: names/kinds length mismatch");
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty input");
  const auto header = detail::split_csv_line(line);
  std::vector<std::string> expected = schema.names;
  expected.push_back(schema.label_name);
  if (header != expected) throw DataError("csv: header does not match schema");

  std::vector<std::size_t> kept;
  ColumnSchema out_schema;
  out_schema.label_name = schema.label_name;
  for (std::size_t c = 0; c < schema.names.size(); ++c) {
    const auto kind = schema.kinds[c];
    if (kind == FeatureKind::kContinuous ||
        (kind == FeatureKind::kCategoricalId && options.include_device_columns)) {
      kept.push_back(c);
      out_schema.names.push_back(schema.names[c]);
      out_schema.kinds.push_back(kind);
    }
  }
  out_schema.validate();

  std::vector<std::map<std::string, int>> encoders(schema.names.size());
  LoadResult result;
  result.data.schema = out_schema;
  result.data.x = Matrix(0, kept.size());
  std::vector<double> row(kept.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != expected.size())
      throw DataError("csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(expected.size()));
    bool drop = false;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto& cell = cells[kept[k]];
      if (detail::is_missing(cell)) {
        drop = true;
        break;
      }
      if (schema.kinds[kept[k]] == FeatureKind::kCategoricalId) {
        auto& enc = encoders[kept[k]];
        auto [it, inserted] = enc.emplace(cell, static_cast<int>(enc.size()));
        row[k] = it->second;
        continue;
      }
      const auto value = detail::parse_double(cell);
      if (!value) throw DataError("csv: line " + std::to_string(line_no) + ": non-numeric value '" + cell + "'");
      if (std::isnan(*value)) {
        drop = true;
        break;
      }
      if (!std::isfinite(*value)) throw DataError("csv: line " + std::to_string(line_no) + ": infinite value");
      row[k] = *value;
    }
    const auto& label_cell = cells.back();
    int label = 0;
    if (detail::is_missing(label_cell)) {
      drop = true;
    } else {
      const auto value = detail::parse_double(label_cell);
      if (!value) throw DataError("csv: line " + std::to_string(line_no) + ": non-binary label");
      if (std::isnan(*value)) {
        drop = true;
      } else if (*value == 0.0 || *value == 1.0) {
        label = static_cast<int>(*value);
      } else {
        throw DataError("csv: line " + std::to_string(line_no) + ": non-binary label");
      }
    }
    if (drop) {
      ++result.dropped_rows;
      continue;
    }
    result.data.x.append_row(row);
    result.data.y.push_back(label);
  }
  if (result.data.n_minority() == 0) throw DataError("csv: no failure rows after cleaning");
  result.data.validate();
  return result;
}

inline LoadResult load_csv(const std::string& path, const ColumnSchema& schema, const LoadOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path + "'");
  return load_csv(in, schema, options);
}

// Reads only the header row, for schema inference.
inline std::vector<std::string> read_csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return detail::split_csv_line(line);
}

inline void write_csv(std::ostream& out, const Dataset& d) {
  for (const auto& name : d.schema.names) out << name << ',';
  out << d.schema.label_name << '\n';
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (double v : d.x.row(r)) out << format_number(v) << ',';
    out << d.y[r] << '\n';
  }
}

inline void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("csv: cannot write '" + path + "'");
  write_csv(out, d);
}

// ---------------------------------------------------------------------------
// Splits

struct SplitSpec {
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  bool stratified = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(train_frac > 0 && val_frac > 0 && test_frac > 0)) throw ConfigError("split fractions must be positive");
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) throw ConfigError("fractions do not sum to 1");
  }
};

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  std::vector<std::size_t> test_rows;
};

namespace detail {

// Sizes of the three parts for a group of n rows; every part gets >= 1.
inline std::array<std::size_t, 3> part_sizes(std::size_t n, const SplitSpec& s) {
  std::array<long long, 3> sz = {std::llround(s.train_frac * static_cast<double>(n)),
                                 std::llround(s.val_frac * static_cast<double>(n)), 0};
  sz[2] = static_cast<long long>(n) - sz[0] - sz[1];
  for (int guard = 0; guard < 8; ++guard) {
    auto small = std::min_element(sz.begin(), sz.end());
    if (*small >= 1) break;
    auto big = std::max_element(sz.begin(), sz.end());
    --*big;
    ++*small;
  }
  return {static_cast<std::size_t>(sz[0]), static_cast<std::size_t>(sz[1]), static_cast<std::size_t>(sz[2])};
}

}  // namespace detail

inline Split stratified_split(const Dataset& d, const SplitSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::array<std::vector<std::size_t>, 3> parts;
  auto assign = [&](std::vector<std::size_t> group) {
    if (group.size() < 3) throw DataError("class with fewer samples than parts");
    shuffle(group, rng);
    const auto sizes = detail::part_sizes(group.size(), spec);
    std::size_t pos = 0;
    for (int p = 0; p < 3; ++p) {
      parts[p].insert(parts[p].end(), group.begin() + pos, group.begin() + pos + sizes[p]);
      pos += sizes[p];
    }
  };
  if (spec.stratified) {
    assign(d.indices_of(0));
    assign(d.indices_of(1));
  } else {
    std::vector<std::size_t> all(d.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    assign(std::move(all));
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  Split s;
  s.train = d.subset(parts[0]);
  s.val = d.subset(parts[1]);
  s.test = d.subset(parts[2]);
  s.train_rows = std::move(parts[0]);
  s.val_rows = std::move(parts[1]);
  s.test_rows = std::move(parts[2]);
  return s;
}

// ---------------------------------------------------------------------------
// Synthetic testbed

struct GeneratorConfig {
  std::size_t n_normal = 7859;
  std::size_t n_failure = 194;
  double noise_scale = 1.0;
  // 0 = separable on osnr_rx, 1 = identical class-conditional means.
  double overlap = 0.5;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_failure < 2 || n_normal < n_failure) throw ConfigError("generator: need n_normal >= n_failure >= 2");
    if (!(noise_scale >= 0.0)) throw ConfigError("generator: noise_scale must be >= 0");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw ConfigError("generator: overlap must be in [0,1]");
  }

  static GeneratorConfig from_json(const nlohmann::json& j) {
    GeneratorConfig cfg;
    if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "n_normal") cfg.n_normal = value.get<std::size_t>();
      else if (key == "n_failure") cfg.n_failure = value.get<std::size_t>();
      else if (key == "noise_scale") cfg.noise_scale = value.get<double>();
      else if (key == "overlap") cfg.overlap = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else throw ConfigError("generator config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
  }

  nlohmann::ordered_json to_json() const {
    return {{"n_normal", n_normal}, {"n_failure", n_failure}, {"noise_scale", noise_scale},
            {"overlap", overlap}, {"seed", seed}};
  }
};

inline const std::vector<std::string>& telemetry_feature_names() {
  static const std::vector<std::string> names = {
      "ber_tx", "osnr_tx", "ber_rx", "osnr_rx", "oa1_in", "oa1_out",
      "oa2_in", "oa2_out", "oa3_in", "oa3_out", "oa4_in", "oa4_out"};
  return names;
}

namespace detail {

// Standard normal truncated to [-3, 3] by rejection.
inline double truncated_normal(Rng& rng) {
  double z;
  do {
    z = standard_normal(rng);
  } while (std::abs(z) > 3.0);
  return z;
}

}  // namespace detail

// Two-population telemetry model. Each row belongs to a lightpath whose OSNR
// offset (spread proportional to overlap) moves TX and RX OSNR together, so
// the failure signal is the TX-to-RX OSNR drop rather than either column
// alone. Normal and failure rows share every noise draw; failures are then
// shifted by an amount proportional to (1 - overlap): lower osnr_rx (and,
// through the BER/OSNR link, higher ber_rx) plus a small power drop on the
// amplifiers downstream of the fault. At overlap = 0 there is no lightpath
// spread, osnr_rx noise is truncated at +-3 sigma and the shift exceeds
// 6 sigma, so a single osnr_rx threshold separates the classes.
inline Dataset generate_synthetic(const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double s = cfg.noise_scale;
  const double sigma_rx = 1.5 * s;
  const double osnr_shift = (1.0 - cfg.overlap) * (6.5 * sigma_rx + 0.5);
  const double sigma_path = cfg.overlap * 9.0 * s;
  const double sigma_oa = 0.4 * s;
  const double oa_shift = (1.0 - cfg.overlap) * 1.2 * sigma_oa;

  Dataset d;
  d.schema = ColumnSchema::all_continuous(telemetry_feature_names());
  const std::size_t n = cfg.n_normal + cfg.n_failure;
  d.x = Matrix(n, 12);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool failure = i >= cfg.n_normal;
    auto row = d.x.row(i);
    const double path = sigma_path * standard_normal(rng);
    const double osnr_tx = 35.0 + path + 0.5 * s * standard_normal(rng);
    const double ber_tx = std::pow(10.0, -2.0 - 0.1 * (osnr_tx - 10.0) + 0.05 * s * standard_normal(rng));
    double osnr_rx = 22.0 + path + sigma_rx * detail::truncated_normal(rng);
    const double ber_rx_noise = 0.1 * s * standard_normal(rng);
    std::array<double, 8> oa{};
    for (int k = 0; k < 4; ++k) {
      oa[2 * k] = -18.0 + sigma_oa * standard_normal(rng);
      oa[2 * k + 1] = oa[2 * k] + 20.0 + 0.2 * s * standard_normal(rng);
    }
    if (failure) {
      osnr_rx -= osnr_shift;
      for (int k = 4; k < 8; ++k) oa[k] -= oa_shift;
    }
    const double ber_rx = std::pow(10.0, -2.0 - 0.2 * (osnr_rx - 10.0) + ber_rx_noise);
    row[0] = ber_tx;
    row[1] = osnr_tx;
    row[2] = ber_rx;
    row[3] = osnr_rx;
    for (int k = 0; k < 8; ++k) row[4 + k] = oa[k];
    d.y[i] = failure ? 1 : 0;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(order, rng);
  return d.subset(order);
}

// (mean_normal - mean_failure) / pooled std of one feature column.
inline double separation_statistic(const Dataset& d, std::size_t column) {
  double sum[2] = {0, 0}, sq[2] = {0, 0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int c = d.y[i];
    const double v = d.x(i, column);
    sum[c] += v;
    sq[c] += v * v;
    ++cnt[c];
  }
  if (cnt[0] < 2 || cnt[1] < 2) throw DataError("separation_statistic: need two rows per class");
  const double m0 = sum[0] / cnt[0], m1 = sum[1] / cnt[1];
  const double v0 = (sq[0] - cnt[0] * m0 * m0) / (cnt[0] - 1);
  const double v1 = (sq[1] - cnt[1] * m1 * m1) / (cnt[1] - 1);
  const double pooled = std::sqrt(((cnt[0] - 1) * v0 + (cnt[1] - 1) * v1) / (cnt[0] + cnt[1] - 2));
  return (m0 - m1) / pooled;
}

}  // namespace imb
