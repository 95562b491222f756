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

#pragma once

#include <vector>

#include "fairex/dataset.hpp"

namespace fairex {

enum class TransformKind { identity, percentile, zscore };
enum class Axis { item, user };
enum class TieRule { first, last };

struct TransformConfig {
  TransformKind kind = TransformKind::percentile;
  Axis axis = Axis::item;       // ignored for zscore-free kinds as noted
  TieRule tie_rule = TieRule::last;
};

// Rank-based percentile of `value` within `sorted_profile` (ascending):
// 100 * position / (|profile| + 1). Position under TieRule::first is the
// 1-based index of the first occurrence, under TieRule::last of the last
// occurrence; for a value absent from the profile both rules use its
// insertion position. Throws DomainError on an empty profile.
double percentile_of(double value, const std::vector<double>& sorted_profile,
                     TieRule tie_rule);

// Replaces every rating by its percentile within the axis profile (the
// item's full rating multiset when axis=item, the user's when axis=user).
// The output rating_scale is recorded as (0, 100); all values fall strictly
// inside it.
Dataset percentile_transform(const Dataset& dataset,
                             const TransformConfig& config);

// Replaces every rating by (r - mean(profile)) / sd(profile) with population
// standard deviation; a zero-sd profile maps to all zeros. The output
// rating_scale is the (min, max) of the transformed values.
Dataset zscore_transform(const Dataset& dataset, Axis axis);

// Dispatch over TransformConfig::kind; identity returns the input unchanged.
Dataset apply_transform(const Dataset& dataset, const TransformConfig& config);

}  // namespace fairex
