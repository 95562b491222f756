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

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fairex {

// One observed rating. The timestamp is carried through serialization but
// ignored by every algorithm.
struct Interaction {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::optional<int64_t> timestamp;
};

// Immutable rating collection with dense ordinal indices. Ordinals follow
// first appearance in the interaction sequence, which pins every downstream
// tie-break and seed derivation.
struct Dataset {
  std::vector<Interaction> interactions;
  std::unordered_map<std::string, int> user_index;  // id -> ordinal
  std::unordered_map<std::string, int> item_index;
  std::vector<std::string> users;  // ordinal -> id
  std::vector<std::string> items;
  std::pair<double, double> rating_scale{1.0, 5.0};

  int user_count() const { return static_cast<int>(users.size()); }
  int item_count() const { return static_cast<int>(items.size()); }

  // -1 when the identifier is unknown.
  int user_ordinal(const std::string& id) const;
  int item_ordinal(const std::string& id) const;

  // Interaction indices grouped by user/item ordinal, in sequence order.
  std::vector<std::vector<int>> by_user() const;
  std::vector<std::vector<int>> by_item() const;
};

// Builds a Dataset from interactions, assigning ordinals in first-appearance
// order. Throws DuplicateError on a repeated (user, item) pair and RangeError
// on a rating outside `scale`.
Dataset make_dataset(std::vector<Interaction> interactions,
                     std::pair<double, double> scale);

// Reads the canonical rating TSV: `user \t item \t rating [\t timestamp]`,
// UTF-8, LF endings, no header. Throws ParseError (with the 1-based line
// number), RangeError, or DuplicateError.
Dataset load_ratings(const std::string& path, std::pair<double, double> scale);

// Writes the canonical rating TSV. Ratings are printed in shortest
// round-trip form so load(write(d)) == d bit-exactly.
void write_ratings(const Dataset& dataset, const std::string& path);
std::string ratings_to_tsv(const Dataset& dataset);

// Item -> supplier association and its inverse.
struct SupplierMap {
  std::unordered_map<std::string, std::string> item_to_supplier;
  std::map<std::string, std::set<std::string>> supplier_to_items;

  // Supplier identifiers in deterministic (lexicographic) order.
  std::vector<std::string> suppliers() const;
};

// Reads `item \t supplier` lines. An item listed twice with different
// suppliers raises ConflictError.
SupplierMap load_supplier_map(const std::string& path);

// Same, then checks that every catalog item of `dataset` is covered
// (CoverageError listing the missing items otherwise).
SupplierMap load_supplier_map(const std::string& path, const Dataset& dataset);

// Item -> genre labels; weights per item are 1/|genres| so they sum to 1.
struct GenreMap {
  std::unordered_map<std::string, std::vector<std::string>> item_to_genres;
};

// Reads `item \t genre1|genre2|...` lines. Coverage is checked lazily by the
// metrics that need it, not here.
GenreMap load_genre_map(const std::string& path);

// User -> group label (e.g. protected/unprotected).
struct GroupAssignment {
  std::unordered_map<std::string, std::string> label_of;

  // Distinct labels in deterministic (lexicographic) order.
  std::vector<std::string> labels() const;
};

// Reads `user \t label` lines.
GroupAssignment load_group_assignment(const std::string& path);

// Train/test partition of a source dataset.
struct SplitPair {
  Dataset train;
  Dataset test;
  uint64_t seed = 0;
};

// Per-user random holdout. Each user contributes floor(test_fraction *
// profile_size) test interactions, raised to 1 when the profile has >= 5
// ratings and the floor is 0; users with a single rating stay entirely in
// train. Draws come from a generator seeded by (seed, user ordinal), so the
// split is reproducible and independent of user iteration order.
SplitPair split_holdout(const Dataset& dataset, double test_fraction,
                        uint64_t seed);

// Head/mid/tail popularity partition of the training catalog.
struct PopularityProfile {
  std::unordered_map<std::string, int> item_counts;
  std::set<std::string> head;
  std::set<std::string> mid;
  std::set<std::string> tail;
  std::set<std::string> longtail;  // mid + tail
};

// Head is the minimal prefix (by descending count, ties by ascending item
// ordinal) whose counts reach >= 20% of all train interactions; mid extends
// coverage to >= 80%; tail is the remainder.
PopularityProfile popularity_profile(const Dataset& train);

}  // namespace fairex
