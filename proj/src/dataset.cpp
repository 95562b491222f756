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

#include "fairex/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "fairex/error.hpp"
#include "fairex/numfmt.hpp"
#include "fairex/rng.hpp"

namespace fairex {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string read_file_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Iterates non-empty lines with 1-based numbering; a trailing newline does
// not produce a final empty line.
template <typename Fn>
void for_each_line(const std::string& text, Fn fn) {
  size_t start = 0;
  long long line_no = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) fn(line_no, line);
    if (end == text.size()) break;
    start = end + 1;
  }
}

}  // namespace

int Dataset::user_ordinal(const std::string& id) const {
  auto it = user_index.find(id);
  return it == user_index.end() ? -1 : it->second;
}

int Dataset::item_ordinal(const std::string& id) const {
  auto it = item_index.find(id);
  return it == item_index.end() ? -1 : it->second;
}

std::vector<std::vector<int>> Dataset::by_user() const {
  std::vector<std::vector<int>> out(users.size());
  for (int idx = 0; idx < static_cast<int>(interactions.size()); ++idx) {
    out[static_cast<size_t>(user_index.at(interactions[idx].user))].push_back(
        idx);
  }
  return out;
}

std::vector<std::vector<int>> Dataset::by_item() const {
  std::vector<std::vector<int>> out(items.size());
  for (int idx = 0; idx < static_cast<int>(interactions.size()); ++idx) {
    out[static_cast<size_t>(item_index.at(interactions[idx].item))].push_back(
        idx);
  }
  return out;
}

Dataset make_dataset(std::vector<Interaction> interactions,
                     std::pair<double, double> scale) {
  Dataset d;
  d.rating_scale = scale;
  d.interactions = std::move(interactions);
  std::unordered_set<int64_t> seen_pairs;
  seen_pairs.reserve(d.interactions.size() * 2);
  for (const Interaction& x : d.interactions) {
    if (x.user.empty() || x.item.empty()) {
      throw ParseError("empty user or item identifier");
    }
    if (!(x.rating >= scale.first && x.rating <= scale.second)) {
      throw RangeError("rating " + format_shortest(x.rating) +
                       " outside scale [" + format_shortest(scale.first) +
                       ", " + format_shortest(scale.second) + "] for pair (" +
                       x.user + ", " + x.item + ")");
    }
    auto [uit, unew] =
        d.user_index.try_emplace(x.user, static_cast<int>(d.users.size()));
    if (unew) d.users.push_back(x.user);
    auto [iit, inew] =
        d.item_index.try_emplace(x.item, static_cast<int>(d.items.size()));
    if (inew) d.items.push_back(x.item);
    const int64_t key =
        (static_cast<int64_t>(uit->second) << 32) | uint32_t(iit->second);
    if (!seen_pairs.insert(key).second) {
      throw DuplicateError("duplicate pair (" + x.user + ", " + x.item + ")");
    }
  }
  return d;
}

Dataset load_ratings(const std::string& path,
                     std::pair<double, double> scale) {
  const std::string text = read_file_or_throw(path);
  std::vector<Interaction> rows;
  for_each_line(text, [&](long long line_no, const std::string& line) {
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 3 && cols.size() != 4) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected 3 or 4 tab-separated fields, got " +
                       std::to_string(cols.size()));
    }
    Interaction x;
    x.user = cols[0];
    x.item = cols[1];
    if (x.user.empty() || x.item.empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": empty user or item identifier");
    }
    const auto rating = parse_double(cols[2]);
    if (!rating) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": unparseable rating '" + cols[2] + "'");
    }
    x.rating = *rating;
    if (cols.size() == 4) {
      const auto ts = parse_int(cols[3]);
      if (!ts) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": unparseable timestamp '" + cols[3] + "'");
      }
      x.timestamp = *ts;
    }
    rows.push_back(std::move(x));
  });
  return make_dataset(std::move(rows), scale);
}

std::string ratings_to_tsv(const Dataset& dataset) {
  std::string out;
  for (const Interaction& x : dataset.interactions) {
    out += x.user;
    out += '\t';
    out += x.item;
    out += '\t';
    out += format_shortest(x.rating);
    if (x.timestamp) {
      out += '\t';
      out += std::to_string(*x.timestamp);
    }
    out += '\n';
  }
  return out;
}

void write_ratings(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << ratings_to_tsv(dataset);
}

std::vector<std::string> SupplierMap::suppliers() const {
  std::vector<std::string> out;
  out.reserve(supplier_to_items.size());
  for (const auto& [s, _] : supplier_to_items) out.push_back(s);
  return out;
}

SupplierMap load_supplier_map(const std::string& path) {
  const std::string text = read_file_or_throw(path);
  SupplierMap map;
  for_each_line(text, [&](long long line_no, const std::string& line) {
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected `item<TAB>supplier`");
    }
    auto it = map.item_to_supplier.find(cols[0]);
    if (it != map.item_to_supplier.end()) {
      if (it->second != cols[1]) {
        throw ConflictError(path + ":" + std::to_string(line_no) + ": item '" +
                            cols[0] + "' assigned to both '" + it->second +
                            "' and '" + cols[1] + "'");
      }
      return;  // benign exact repeat
    }
    map.item_to_supplier.emplace(cols[0], cols[1]);
    map.supplier_to_items[cols[1]].insert(cols[0]);
  });
  return map;
}

SupplierMap load_supplier_map(const std::string& path,
                              const Dataset& dataset) {
  SupplierMap map = load_supplier_map(path);
  std::vector<std::string> missing;
  for (const std::string& item : dataset.items) {
    if (!map.item_to_supplier.count(item)) missing.push_back(item);
  }
  if (!missing.empty()) {
    std::string msg = path + ": no supplier for catalog item(s):";
    for (const std::string& m : missing) msg += " " + m;
    throw CoverageError(msg);
  }
  return map;
}

GenreMap load_genre_map(const std::string& path) {
  const std::string text = read_file_or_throw(path);
  GenreMap map;
  for_each_line(text, [&](long long line_no, const std::string& line) {
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected `item<TAB>genre1|genre2|...`");
    }
    std::vector<std::string> genres;
    size_t start = 0;
    for (;;) {
      const size_t pos = cols[1].find('|', start);
      const std::string g = pos == std::string::npos
                                ? cols[1].substr(start)
                                : cols[1].substr(start, pos - start);
      if (g.empty()) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": empty genre label");
      }
      genres.push_back(g);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (!map.item_to_genres.emplace(cols[0], std::move(genres)).second) {
      throw ConflictError(path + ":" + std::to_string(line_no) +
                          ": item '" + cols[0] + "' listed twice");
    }
  });
  return map;
}

std::vector<std::string> GroupAssignment::labels() const {
  std::set<std::string> distinct;
  for (const auto& [_, label] : label_of) distinct.insert(label);
  return std::vector<std::string>(distinct.begin(), distinct.end());
}

GroupAssignment load_group_assignment(const std::string& path) {
  const std::string text = read_file_or_throw(path);
  GroupAssignment groups;
  for_each_line(text, [&](long long line_no, const std::string& line) {
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected `user<TAB>label`");
    }
    auto it = groups.label_of.find(cols[0]);
    if (it != groups.label_of.end() && it->second != cols[1]) {
      throw ConflictError(path + ":" + std::to_string(line_no) + ": user '" +
                          cols[0] + "' assigned to both '" + it->second +
                          "' and '" + cols[1] + "'");
    }
    groups.label_of[cols[0]] = cols[1];
  });
  return groups;
}

SplitPair split_holdout(const Dataset& dataset, double test_fraction,
                        uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DomainError("test_fraction must be in (0, 1)");
  }
  const std::vector<std::vector<int>> profiles = dataset.by_user();
  std::vector<char> in_test(dataset.interactions.size(), 0);
  for (int u = 0; u < dataset.user_count(); ++u) {
    const std::vector<int>& profile = profiles[static_cast<size_t>(u)];
    const size_t size = profile.size();
    if (size <= 1) continue;  // single-rating users stay entirely in train
    size_t take = static_cast<size_t>(test_fraction * double(size));
    if (take == 0 && size >= 5) take = 1;
    if (take == 0) continue;
    // take < size always holds (fraction < 1), so the user stays in train.
    std::vector<int> order = profile;
    Rng rng(derive_seed(seed, {seed_stream::kSplit, uint64_t(u)}));
    rng.shuffle(order);
    for (size_t j = 0; j < take; ++j) in_test[size_t(order[j])] = 1;
  }
  std::vector<Interaction> train_rows, test_rows;
  for (size_t idx = 0; idx < dataset.interactions.size(); ++idx) {
    (in_test[idx] ? test_rows : train_rows).push_back(dataset.interactions[idx]);
  }
  SplitPair pair;
  pair.seed = seed;
  pair.train = make_dataset(std::move(train_rows), dataset.rating_scale);
  pair.test = make_dataset(std::move(test_rows), dataset.rating_scale);
  return pair;
}

PopularityProfile popularity_profile(const Dataset& train) {
  if (train.interactions.empty()) {
    throw DomainError("popularity profile of an empty dataset");
  }
  PopularityProfile profile;
  std::vector<long long> counts(size_t(train.item_count()), 0);
  for (const Interaction& x : train.interactions) {
    counts[size_t(train.item_index.at(x.item))]++;
  }
  for (int i = 0; i < train.item_count(); ++i) {
    profile.item_counts[train.items[size_t(i)]] =
        static_cast<int>(counts[size_t(i)]);
  }
  std::vector<int> order(size_t(train.item_count()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (counts[size_t(a)] != counts[size_t(b)])
      return counts[size_t(a)] > counts[size_t(b)];
    return a < b;
  });
  const long long total =
      static_cast<long long>(train.interactions.size());
  // Integer thresholds: cum >= 20% of total  <=>  5*cum >= total, and
  // cum >= 80%  <=>  5*cum >= 4*total. Avoids float boundary surprises.
  long long cum = 0;
  size_t pos = 0;
  for (; pos < order.size(); ++pos) {
    cum += counts[size_t(order[pos])];
    profile.head.insert(train.items[size_t(order[pos])]);
    if (5 * cum >= total) {
      ++pos;
      break;
    }
  }
  for (; pos < order.size() && 5 * cum < 4 * total; ++pos) {
    cum += counts[size_t(order[pos])];
    profile.mid.insert(train.items[size_t(order[pos])]);
  }
  for (; pos < order.size(); ++pos) {
    profile.tail.insert(train.items[size_t(order[pos])]);
  }
  profile.longtail = profile.mid;
  profile.longtail.insert(profile.tail.begin(), profile.tail.end());
  return profile;
}

}  // namespace fairex
