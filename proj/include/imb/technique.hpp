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

// Technique identifiers: <category>:<name>[?key=value&...], or "baseline".

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "imb/common.hpp"

namespace imb {

enum class Category { kBaseline, kPre, kIn, kPost };

inline std::string to_string(Category c) {
  switch (c) {
    case Category::kBaseline: return "baseline";
    case Category::kPre: return "pre";
    case Category::kIn: return "in";
    case Category::kPost: return "post";
  }
  return "?";
}

struct TechniqueInfo {
  Category category;
  std::string name;
  std::vector<std::string> keys;  // accepted parameters
  std::string summary;
};

inline const std::vector<TechniqueInfo>& technique_catalog() {
  static const std::vector<TechniqueInfo> catalog = {
      {Category::kBaseline, "baseline", {}, "random forest, threshold 0.5"},
      {Category::kPre, "ros", {"ratio"}, "random over-sampling of failures"},
      {Category::kPre, "rus", {"ratio"}, "random under-sampling of normal rows"},
      {Category::kPre, "smote", {"k", "ratio"}, "SMOTE interpolation between minority neighbors"},
      {Category::kPre, "adasyn", {"k", "ratio"}, "ADASYN, density-adaptive SMOTE"},
      {Category::kPre, "cluster_centroids", {"ratio", "clusters"}, "replace normal rows by k-means centroids"},
      {Category::kPre, "smote_tomek", {"k", "ratio"}, "SMOTE then Tomek-link cleaning"},
      {Category::kPre, "ctgan", {"ratio", "epochs"}, "conditional GAN synthetic failures"},
      {Category::kPre, "cvae", {"ratio", "epochs"}, "conditional VAE synthetic failures"},
      {Category::kPre, "massaging", {"ratio"}, "flip labels of top-ranked normal rows"},
      {Category::kPre, "perturbation", {"ratio", "noise"}, "jittered copies of failures"},
      {Category::kPre, "cluster_massaging", {"ratio", "clusters"}, "cluster-guided label flipping"},
      {Category::kIn, "cost_sensitive", {}, "inverse-frequency class weights in splits and leaves"},
      {Category::kIn, "bagging", {"members"}, "balanced bagging of forests"},
      {Category::kIn, "boosting", {"rounds"}, "AdaBoost over depth-3 forests"},
      {Category::kIn, "brf", {}, "balanced random forest"},
      {Category::kIn, "meta_learning", {"folds"}, "out-of-fold depth-2 tree probability as extra feature"},
      {Category::kPost, "threshold", {}, "threshold tuned for F1 on validation"},
      {Category::kPost, "cost_threshold", {"cfp", "cfn"}, "Bayes threshold cfp / (cfp + cfn)"},
      {Category::kPost, "reweight", {"w0", "w1", "t"}, "reweighted class probabilities"},
      {Category::kPost, "calibration", {"method"}, "isotonic or Platt calibration, threshold 0.5"},
      {Category::kPost, "sample_weighting", {}, "per-tree vote weights from validation F1"},
  };
  return catalog;
}

class TechniqueSpec {
 public:
  std::string id;  // as written
  Category category = Category::kBaseline;
  std::string name = "baseline";
  std::map<std::string, std::string> params;

  static TechniqueSpec parse(std::string_view text) {
    TechniqueSpec t;
    t.id = std::string(text);
    if (text == "baseline") return t;
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ConfigError("technique '" + t.id + "': expected <category>:<name>");
    const auto cat = text.substr(0, colon);
    if (cat == "pre")
      t.category = Category::kPre;
    else if (cat == "in")
      t.category = Category::kIn;
    else if (cat == "post")
      t.category = Category::kPost;
    else
      throw ConfigError("technique '" + t.id + "': unknown category '" + std::string(cat) + "'");
    auto rest = text.substr(colon + 1);
    const auto q = rest.find('?');
    t.name = std::string(rest.substr(0, q));
    const TechniqueInfo* info = nullptr;
    for (const auto& e : technique_catalog())
      if (e.category == t.category && e.name == t.name) info = &e;
    if (!info) throw ConfigError("technique '" + t.id + "': unknown technique");
    if (q == std::string_view::npos) return t;
    auto query = rest.substr(q + 1);
    if (query.empty()) throw ConfigError("technique '" + t.id + "': empty parameter list");
    while (!query.empty()) {
      const auto amp = query.find('&');
      const auto pair = query.substr(0, amp);
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos || eq == 0 || eq + 1 == pair.size())
        throw ConfigError("technique '" + t.id + "': malformed parameter '" + std::string(pair) + "'");
      std::string key(pair.substr(0, eq));
      if (std::find(info->keys.begin(), info->keys.end(), key) == info->keys.end())
        throw ConfigError("technique '" + t.id + "': unknown parameter '" + key + "'");
      if (!t.params.emplace(key, std::string(pair.substr(eq + 1))).second)
        throw ConfigError("technique '" + t.id + "': duplicate parameter '" + key + "'");
      if (amp == std::string_view::npos) break;
      query = query.substr(amp + 1);
      if (query.empty()) throw ConfigError("technique '" + t.id + "': trailing '&'");
    }
    return t;
  }

  bool has(const std::string& key) const { return params.count(key) > 0; }

  double number(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    const auto& s = it->second;
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
      throw ConfigError("technique '" + id + "': '" + key + "' is not a number");
    return v;
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    const auto& s = it->second;
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || v == 0)
      throw ConfigError("technique '" + id + "': '" + key + "' must be a positive integer");
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

// Default-parameter ids of every technique, baseline first.
inline std::vector<std::string> all_technique_ids() {
  std::vector<std::string> out;
  for (const auto& e : technique_catalog())
    out.push_back(e.category == Category::kBaseline ? e.name : to_string(e.category) + ":" + e.name);
  return out;
}

// "all" or a comma-separated list. Baseline is prepended when missing;
// duplicates are rejected.
inline std::vector<TechniqueSpec> parse_technique_list(std::string_view text) {
  std::vector<std::string> ids;
  if (text == "all") {
    ids = all_technique_ids();
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (item.empty()) throw ConfigError("technique list: empty entry");
      ids.emplace_back(item);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  std::vector<TechniqueSpec> specs;
  bool has_baseline = false;
  for (const auto& id : ids) {
    for (const auto& s : specs)
      if (s.id == id) throw ConfigError("technique list: duplicate '" + id + "'");
    specs.push_back(TechniqueSpec::parse(id));
    has_baseline = has_baseline || specs.back().category == Category::kBaseline;
  }
  if (!has_baseline) specs.insert(specs.begin(), TechniqueSpec::parse("baseline"));
  return specs;
}

}  // namespace imb
