// Copyright 2026 The fairex authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairex/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairex/error.hpp"

namespace fairex {

namespace {

// Rating values grouped by the axis ordinal (item or user) of each
// interaction, each profile sorted ascending.
std::vector<std::vector<double>> axis_profiles(const Dataset& dataset,
                                               Axis axis) {
  const size_t buckets = axis == Axis::item ? size_t(dataset.item_count())
                                            : size_t(dataset.user_count());
  std::vector<std::vector<double>> profiles(buckets);
  for (const Interaction& x : dataset.interactions) {
    const int ord = axis == Axis::item ? dataset.item_index.at(x.item)
                                       : dataset.user_index.at(x.user);
    profiles[size_t(ord)].push_back(x.rating);
  }
  for (auto& p : profiles) std::sort(p.begin(), p.end());
  return profiles;
}

}  // namespace

double percentile_of(double value, const std::vector<double>& sorted_profile,
                     TieRule tie_rule) {
  if (sorted_profile.empty()) {
    throw DomainError("percentile of a value in an empty profile");
  }
  const auto lb =
      std::lower_bound(sorted_profile.begin(), sorted_profile.end(), value);
  const auto ub =
      std::upper_bound(sorted_profile.begin(), sorted_profile.end(), value);
  size_t position;  // 1-based
  if (lb == ub) {
    // Value absent: both rules use the position it would be inserted at.
    position = size_t(lb - sorted_profile.begin()) + 1;
  } else if (tie_rule == TieRule::first) {
    position = size_t(lb - sorted_profile.begin()) + 1;
  } else {
    position = size_t(ub - sorted_profile.begin());
  }
  return 100.0 * double(position) / double(sorted_profile.size() + 1);
}

Dataset percentile_transform(const Dataset& dataset,
                             const TransformConfig& config) {
  if (config.kind != TransformKind::percentile) {
    throw DomainError("percentile_transform requires kind=percentile");
  }
  const std::vector<std::vector<double>> profiles =
      axis_profiles(dataset, config.axis);
  std::vector<Interaction> rows = dataset.interactions;
  for (Interaction& x : rows) {
    const int ord = config.axis == Axis::item ? dataset.item_index.at(x.item)
                                              : dataset.user_index.at(x.user);
    x.rating =
        percentile_of(x.rating, profiles[size_t(ord)], config.tie_rule);
  }
  return make_dataset(std::move(rows), {0.0, 100.0});
}

Dataset zscore_transform(const Dataset& dataset, Axis axis) {
  const std::vector<std::vector<double>> profiles =
      axis_profiles(dataset, axis);
  std::vector<double> mean(profiles.size(), 0.0);
  std::vector<double> sd(profiles.size(), 0.0);
  for (size_t i = 0; i < profiles.size(); ++i) {
    const std::vector<double>& p = profiles[i];
    if (p.empty()) continue;
    double m = 0.0;
    for (double v : p) m += v;
    m /= double(p.size());
    double var = 0.0;
    for (double v : p) var += (v - m) * (v - m);
    var /= double(p.size());
    mean[i] = m;
    sd[i] = std::sqrt(var);
  }
  std::vector<Interaction> rows = dataset.interactions;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (Interaction& x : rows) {
    const int ord = axis == Axis::item ? dataset.item_index.at(x.item)
                                       : dataset.user_index.at(x.user);
    const size_t i = size_t(ord);
    x.rating = sd[i] == 0.0 ? 0.0 : (x.rating - mean[i]) / sd[i];
    lo = any ? std::min(lo, x.rating) : x.rating;
    hi = any ? std::max(hi, x.rating) : x.rating;
    any = true;
  }
  return make_dataset(std::move(rows), {lo, hi});
}

Dataset apply_transform(const Dataset& dataset,
                        const TransformConfig& config) {
  switch (config.kind) {
    case TransformKind::identity:
      return dataset;
    case TransformKind::percentile:
      return percentile_transform(dataset, config);
    case TransformKind::zscore:
      return zscore_transform(dataset, config.axis);
  }
  throw DomainError("unknown transform kind");
}

}  // namespace fairex
