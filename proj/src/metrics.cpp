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

#include "fairex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fairex/error.hpp"
#include "fairex/numfmt.hpp"

namespace fairex {

namespace {

// Test profiles as item sets keyed by user.
std::unordered_map<std::string, std::unordered_set<std::string>> test_profiles(
    const Dataset& test) {
  std::unordered_map<std::string, std::unordered_set<std::string>> out;
  for (const Interaction& x : test.interactions) out[x.user].insert(x.item);
  return out;
}

int hits_in(const RecList& list,
            const std::unordered_set<std::string>& relevant) {
  int hits = 0;
  for (const RecEntry& e : list.entries) hits += relevant.count(e.item) ? 1 : 0;
  return hits;
}

// (head, mid, tail) share distribution of an item multiset. Items outside
// the partition (foreign to the train split) are ignored.
Distribution popularity_shares(const std::vector<std::string>& items,
                               const PopularityProfile& profile) {
  Distribution d;
  d.weights["head"] = 0.0;
  d.weights["mid"] = 0.0;
  d.weights["tail"] = 0.0;
  for (const std::string& item : items) {
    if (profile.head.count(item)) {
      d.weights["head"] += 1.0;
    } else if (profile.mid.count(item)) {
      d.weights["mid"] += 1.0;
    } else if (profile.tail.count(item)) {
      d.weights["tail"] += 1.0;
    }
  }
  return d;
}

std::vector<std::string> train_items_of_user(const Dataset& train,
                                             const std::string& user) {
  std::vector<std::string> out;
  for (const Interaction& x : train.interactions) {
    if (x.user == user) out.push_back(x.item);
  }
  return out;
}

}  // namespace

double Distribution::total() const {
  double t = 0.0;
  for (const auto& [_, w] : weights) t += w;
  return t;
}

Distribution Distribution::normalized() const {
  const double t = total();
  if (t <= 0.0) throw DomainError("cannot normalize a zero distribution");
  Distribution out;
  for (const auto& [k, w] : weights) out.weights[k] = w / t;
  return out;
}

RankingMetrics precision_recall(const RecBatch& batch, const Dataset& test) {
  if (test.interactions.empty()) throw DomainError("empty test set");
  const auto profiles = test_profiles(test);
  double precision_sum = 0.0;
  int precision_users = 0;
  double recall_sum = 0.0;
  int recall_users = 0;
  static const std::unordered_set<std::string> kEmpty;
  for (const RecList& list : batch.lists) {
    auto it = profiles.find(list.user);
    const auto& relevant = it == profiles.end() ? kEmpty : it->second;
    const int hits = hits_in(list, relevant);
    if (!list.entries.empty()) {
      precision_sum += double(hits) / double(list.entries.size());
      ++precision_users;
    }
    if (!relevant.empty()) {
      recall_sum += double(hits) / double(relevant.size());
      ++recall_users;
    }
  }
  RankingMetrics out;
  out.precision = precision_users ? precision_sum / precision_users : 0.0;
  out.recall = recall_users ? recall_sum / recall_users : 0.0;
  return out;
}

double ndcg(const RecBatch& batch, const Dataset& test) {
  if (test.interactions.empty()) throw DomainError("empty test set");
  const auto profiles = test_profiles(test);
  double sum = 0.0;
  int users = 0;
  for (const RecList& list : batch.lists) {
    auto it = profiles.find(list.user);
    if (it == profiles.end() || it->second.empty()) continue;
    double dcg = 0.0;
    for (size_t j = 0; j < list.entries.size(); ++j) {
      if (it->second.count(list.entries[j].item)) {
        // Gain 2^1 - 1 = 1 for a hit, discounted by ln(position + 1).
        dcg += 1.0 / std::log(double(j + 1) + 1.0);
      }
    }
    const size_t ideal =
        std::min(list.entries.size(), it->second.size());
    double idcg = 0.0;
    for (size_t j = 1; j <= ideal; ++j) idcg += 1.0 / std::log(double(j) + 1.0);
    if (idcg > 0.0) {
      sum += dcg / idcg;
      ++users;
    }
  }
  return users ? sum / users : 0.0;
}

ErrorMetrics error_metrics(
    const std::map<std::pair<std::string, std::string>, double>& predictions,
    const Dataset& test) {
  if (test.interactions.empty()) throw DomainError("empty test set");
  double abs_sum = 0.0, sq_sum = 0.0;
  std::map<std::string, std::pair<double, int>> per_user;  // (abs sum, count)
  for (const Interaction& x : test.interactions) {
    auto it = predictions.find({x.user, x.item});
    if (it == predictions.end()) {
      throw CoverageError("no prediction for pair (" + x.user + ", " + x.item +
                          ")");
    }
    const double err = it->second - x.rating;
    abs_sum += std::fabs(err);
    sq_sum += err * err;
    auto& [s, c] = per_user[x.user];
    s += std::fabs(err);
    ++c;
  }
  const double n = double(test.interactions.size());
  ErrorMetrics out;
  out.mae = abs_sum / n;
  out.rmse = std::sqrt(sq_sum / n);
  double umae_sum = 0.0;
  for (const auto& [_, sc] : per_user) umae_sum += sc.first / double(sc.second);
  out.umae = umae_sum / double(per_user.size());
  return out;
}

Distribution visibility(const RecBatch& batch, Scope scope,
                        const SupplierMap* suppliers) {
  if (scope == Scope::supplier && !suppliers) {
    throw DomainError("supplier visibility requires a supplier map");
  }
  const double users = double(batch.lists.size());
  if (users == 0.0) throw DomainError("visibility of an empty batch");
  Distribution iv;
  for (const RecList& list : batch.lists) {
    std::unordered_set<std::string> seen;
    for (const RecEntry& e : list.entries) {
      if (seen.insert(e.item).second) iv.weights[e.item] += 1.0;
    }
  }
  for (auto& [_, w] : iv.weights) w /= users;
  if (scope == Scope::item) return iv;
  Distribution sv;
  for (const auto& [item, w] : iv.weights) {
    auto it = suppliers->item_to_supplier.find(item);
    if (it == suppliers->item_to_supplier.end()) {
      throw CoverageError("no supplier for item " + item);
    }
    sv.weights[it->second] += w;
  }
  return sv;
}

Distribution add_zero_members(Distribution dist,
                              const std::vector<std::string>& keys) {
  for (const std::string& k : keys) dist.weights.try_emplace(k, 0.0);
  return dist;
}

double aggregate_diversity(const RecBatch& batch,
                           const std::vector<std::string>& catalog, int alpha,
                           Scope scope, const SupplierMap* suppliers) {
  if (alpha < 1) throw DomainError("alpha must be >= 1");
  if (catalog.empty()) throw DomainError("empty catalog");
  if (scope == Scope::supplier && !suppliers) {
    throw DomainError("supplier diversity requires a supplier map");
  }
  std::unordered_map<std::string, int> count;
  for (const RecList& list : batch.lists) {
    std::unordered_set<std::string> seen;
    for (const RecEntry& e : list.entries) {
      if (!seen.insert(e.item).second) continue;
      if (scope == Scope::item) {
        count[e.item]++;
      } else {
        auto it = suppliers->item_to_supplier.find(e.item);
        if (it == suppliers->item_to_supplier.end()) {
          throw CoverageError("no supplier for item " + e.item);
        }
        count[it->second]++;
      }
    }
  }
  int covered = 0;
  for (const std::string& key : catalog) {
    auto it = count.find(key);
    if (it != count.end() && it->second >= alpha) ++covered;
  }
  return double(covered) / double(catalog.size());
}

std::optional<double> longtail_coverage(const RecBatch& batch,
                                        const PopularityProfile& profile) {
  if (profile.longtail.empty()) return std::nullopt;
  std::unordered_set<std::string> seen;
  for (const RecList& list : batch.lists) {
    for (const RecEntry& e : list.entries) {
      if (profile.longtail.count(e.item)) seen.insert(e.item);
    }
  }
  return double(seen.size()) / double(profile.longtail.size());
}

std::optional<double> gini(const Distribution& normalized_dist) {
  const size_t n = normalized_dist.weights.size();
  if (n < 2) return std::nullopt;
  if (std::fabs(normalized_dist.total() - 1.0) > 1e-9) {
    throw DomainError("gini requires a normalized distribution");
  }
  std::vector<double> w;
  w.reserve(n);
  for (const auto& [_, v] : normalized_dist.weights) w.push_back(v);
  std::sort(w.begin(), w.end());
  double g = 0.0;
  for (size_t k = 1; k <= n; ++k) {
    g += (2.0 * double(k) - double(n) - 1.0) * w[k - 1];
  }
  return g / double(n - 1);
}

double entropy(const Distribution& normalized_dist) {
  if (std::fabs(normalized_dist.total() - 1.0) > 1e-9) {
    throw DomainError("entropy requires a normalized distribution");
  }
  double h = 0.0;
  for (const auto& [_, w] : normalized_dist.weights) {
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

std::vector<std::optional<double>> visibility_shift(
    const RecBatch& base, const RecBatch& reranked, Scope scope,
    const SupplierMap* suppliers, const std::vector<std::string>& universe,
    int bins) {
  if (bins < 1) throw DomainError("bins must be >= 1");
  if (universe.empty()) throw DomainError("empty universe");
  int n = reranked.list_size;
  for (const RecList& list : reranked.lists) {
    n = std::max(n, int(list.entries.size()));
  }
  if (n < 1) throw DomainError("reranked batch has no entries");
  // Comparison at equal list size: the base batch counts only through its
  // top-n prefix.
  RecBatch truncated;
  truncated.list_size = n;
  for (const RecList& list : base.lists) {
    RecList cut;
    cut.user = list.user;
    const size_t take = std::min(size_t(n), list.entries.size());
    cut.entries.assign(list.entries.begin(), list.entries.begin() + long(take));
    truncated.lists.push_back(std::move(cut));
  }
  const Distribution base_vis =
      add_zero_members(visibility(truncated, scope, suppliers), universe);
  const Distribution rer_vis =
      add_zero_members(visibility(reranked, scope, suppliers), universe);
  // Sort by descending base visibility, ties by universe position.
  std::vector<size_t> order(universe.size());
  for (size_t i = 0; i < universe.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const double va = base_vis.weights.at(universe[a]);
    const double vb = base_vis.weights.at(universe[b]);
    if (va != vb) return va > vb;
    return a < b;
  });
  const size_t total = universe.size();
  const size_t quot = total / size_t(bins);
  const size_t rem = total % size_t(bins);
  std::vector<std::optional<double>> shifts;
  size_t pos = 0;
  for (int b = 0; b < bins; ++b) {
    const size_t size = quot + (size_t(b) < rem ? 1 : 0);
    if (size == 0) {
      shifts.push_back(std::nullopt);
      continue;
    }
    double gb = 0.0, gr = 0.0;
    for (size_t j = 0; j < size; ++j) {
      const std::string& key = universe[order[pos + j]];
      gb += base_vis.weights.at(key);
      gr += rer_vis.weights.at(key);
    }
    pos += size;
    gb /= double(size);
    gr /= double(size);
    if (gb == 0.0) {
      shifts.push_back(std::nullopt);
    } else {
      shifts.push_back((gr - gb) / gb);
    }
  }
  return shifts;
}

Distribution genre_distribution(const std::vector<std::string>& items,
                                const GenreMap& genres) {
  Distribution d;
  for (const std::string& item : items) {
    auto it = genres.item_to_genres.find(item);
    if (it == genres.item_to_genres.end() || it->second.empty()) {
      throw CoverageError("no genres for item " + item);
    }
    const double w = 1.0 / double(it->second.size());
    for (const std::string& g : it->second) d.weights[g] += w;
  }
  return d;
}

double kld(const Distribution& p, const Distribution& q, double smooth_alpha) {
  if (smooth_alpha < 0.0) throw DomainError("smoothing alpha must be >= 0");
  const Distribution pn = p.normalized();
  const Distribution qn = q.normalized();
  double sum = 0.0;
  for (const auto& [k, pk] : pn.weights) {
    if (pk <= 0.0) continue;
    auto it = qn.weights.find(k);
    const double qk = it == qn.weights.end() ? 0.0 : it->second;
    const double smoothed = (1.0 - smooth_alpha) * qk + smooth_alpha * pk;
    if (smoothed <= 0.0) {
      throw DomainError("KLD undefined: zero smoothed mass at key " + k);
    }
    sum += pk * std::log(pk / smoothed);
  }
  return sum;
}

PerUserMetric miscalibration(const Dataset& train, const RecBatch& batch,
                             const GenreMap& genres, double smooth_alpha) {
  PerUserMetric out;
  std::unordered_map<std::string, std::vector<std::string>> profile_items;
  for (const Interaction& x : train.interactions) {
    profile_items[x.user].push_back(x.item);
  }
  double sum = 0.0;
  for (const RecList& list : batch.lists) {
    auto it = profile_items.find(list.user);
    if (it == profile_items.end() || list.entries.empty()) continue;
    std::vector<std::string> rec_items;
    rec_items.reserve(list.entries.size());
    for (const RecEntry& e : list.entries) rec_items.push_back(e.item);
    const Distribution p = genre_distribution(it->second, genres);
    const Distribution q = genre_distribution(rec_items, genres);
    const double v = kld(p, q, smooth_alpha);
    out.per_user[list.user] = v;
    sum += v;
  }
  out.mean = out.per_user.empty() ? 0.0 : sum / double(out.per_user.size());
  return out;
}

PerUserMetric upd(const Dataset& train, const RecBatch& batch,
                  const PopularityProfile& profile, double smooth_alpha) {
  PerUserMetric out;
  std::unordered_map<std::string, std::vector<std::string>> profile_items;
  for (const Interaction& x : train.interactions) {
    profile_items[x.user].push_back(x.item);
  }
  double sum = 0.0;
  for (const RecList& list : batch.lists) {
    auto it = profile_items.find(list.user);
    if (it == profile_items.end() || list.entries.empty()) continue;
    std::vector<std::string> rec_items;
    rec_items.reserve(list.entries.size());
    for (const RecEntry& e : list.entries) rec_items.push_back(e.item);
    const Distribution p = popularity_shares(it->second, profile);
    const Distribution q = popularity_shares(rec_items, profile);
    if (p.total() <= 0.0 || q.total() <= 0.0) continue;
    const double v = kld(p, q, smooth_alpha);
    out.per_user[list.user] = v;
    sum += v;
  }
  out.mean = out.per_user.empty() ? 0.0 : sum / double(out.per_user.size());
  return out;
}

double spd(const RecBatch& batch, const Dataset& test,
           const GroupAssignment& groups) {
  if (test.interactions.empty()) throw DomainError("empty test set");
  const auto profiles = test_profiles(test);
  double sums[2] = {0.0, 0.0};  // [0] unprotected, [1] protected
  int counts[2] = {0, 0};
  static const std::unordered_set<std::string> kEmpty;
  for (const RecList& list : batch.lists) {
    auto git = groups.label_of.find(list.user);
    if (git == groups.label_of.end() || list.entries.empty()) continue;
    int slot;
    if (git->second == "unprotected") {
      slot = 0;
    } else if (git->second == "protected") {
      slot = 1;
    } else {
      continue;
    }
    auto pit = profiles.find(list.user);
    const auto& relevant = pit == profiles.end() ? kEmpty : pit->second;
    sums[slot] +=
        double(hits_in(list, relevant)) / double(list.entries.size());
    counts[slot]++;
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw DomainError("spd requires non-empty unprotected and protected groups");
  }
  return sums[0] / counts[0] - sums[1] / counts[1];
}

std::optional<double> bias_disparity(const Dataset& train,
                                     const RecBatch& batch,
                                     const std::set<std::string>& group_users,
                                     const std::set<std::string>& category,
                                     int catalog_size) {
  if (category.empty()) throw DomainError("empty category");
  if (catalog_size < 1) throw DomainError("catalog_size must be >= 1");
  long long train_on_category = 0, train_total = 0;
  for (const Interaction& x : train.interactions) {
    if (!group_users.count(x.user)) continue;
    ++train_total;
    if (category.count(x.item)) ++train_on_category;
  }
  long long rec_on_category = 0, rec_total = 0;
  for (const RecList& list : batch.lists) {
    if (!group_users.count(list.user)) continue;
    for (const RecEntry& e : list.entries) {
      ++rec_total;
      if (category.count(e.item)) ++rec_on_category;
    }
  }
  if (train_total == 0 || rec_total == 0) return std::nullopt;
  const double p_c = double(category.size()) / double(catalog_size);
  const double b_t = (double(train_on_category) / double(train_total)) / p_c;
  const double b_r = (double(rec_on_category) / double(rec_total)) / p_c;
  if (b_t == 0.0) return std::nullopt;
  return (b_r - b_t) / b_t;
}

double average_disparity(const Dataset& train, const RecBatch& batch,
                         const std::set<std::string>& unprotected_users,
                         const std::set<std::string>& protected_users,
                         const std::vector<std::set<std::string>>& categories) {
  if (categories.empty()) throw DomainError("no categories");
  auto count_train = [&](const std::set<std::string>& users,
                         const std::set<std::string>& category) {
    long long c = 0;
    for (const Interaction& x : train.interactions) {
      if (users.count(x.user) && category.count(x.item)) ++c;
    }
    return c;
  };
  auto count_rec = [&](const std::set<std::string>& users,
                       const std::set<std::string>& category) {
    long long c = 0;
    for (const RecList& list : batch.lists) {
      if (!users.count(list.user)) continue;
      for (const RecEntry& e : list.entries) {
        if (category.count(e.item)) ++c;
      }
    }
    return c;
  };
  double sum = 0.0;
  for (const std::set<std::string>& c : categories) {
    const double delta_u =
        double(count_rec(unprotected_users, c) - count_train(unprotected_users, c));
    const double delta_p =
        double(count_rec(protected_users, c) - count_train(protected_users, c));
    sum += std::fabs(delta_u - delta_p);
  }
  return sum / double(categories.size());
}

double profile_anomaly(const Dataset& train, const std::string& user) {
  if (train.user_ordinal(user) < 0) throw DomainError("unknown user: " + user);
  std::unordered_map<std::string, std::pair<double, int>> item_stats;
  for (const Interaction& x : train.interactions) {
    auto& [s, c] = item_stats[x.item];
    s += x.rating;
    ++c;
  }
  double sum = 0.0;
  int count = 0;
  for (const Interaction& x : train.interactions) {
    if (x.user != user) continue;
    const auto& [s, c] = item_stats.at(x.item);
    sum += std::fabs(x.rating - s / double(c));
    ++count;
  }
  return count ? sum / double(count) : 0.0;
}

double profile_entropy(const Dataset& train, const std::string& user) {
  if (train.user_ordinal(user) < 0) throw DomainError("unknown user: " + user);
  Distribution values;
  for (const Interaction& x : train.interactions) {
    if (x.user == user) values.weights[format_shortest(x.rating)] += 1.0;
  }
  return entropy(values.normalized());
}

void MetricsReport::add(const std::string& scope, const std::string& metric,
                        double value) {
  for (const Record& r : records) {
    if (r.scope == scope && r.metric == metric) {
      throw DomainError("duplicate metric " + scope + "/" + metric);
    }
  }
  records.push_back({scope, metric, value});
}

std::optional<double> MetricsReport::find(const std::string& scope,
                                          const std::string& metric) const {
  for (const Record& r : records) {
    if (r.scope == scope && r.metric == metric) return r.value;
  }
  return std::nullopt;
}

std::string MetricsReport::to_tsv() const {
  std::string out;
  for (const Record& r : records) {
    out += r.scope;
    out += '\t';
    out += r.metric;
    out += '\t';
    out += format_fixed(r.value, 6);
    out += '\n';
  }
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const Record& r : records) j[r.scope][r.metric] = r.value;
  return j.dump(2) + "\n";
}

MetricsReport build_report(const ReportInputs& in) {
  if (!in.train || !in.test || !in.batch) {
    throw DomainError("report requires train, test, and batch");
  }
  MetricsReport report;
  const RankingMetrics rm = precision_recall(*in.batch, *in.test);
  report.add("ranking", "precision", rm.precision);
  report.add("ranking", "recall", rm.recall);
  report.add("ranking", "ndcg", ndcg(*in.batch, *in.test));
  if (in.predictions) {
    const ErrorMetrics em = error_metrics(*in.predictions, *in.test);
    report.add("error", "mae", em.mae);
    report.add("error", "rmse", em.rmse);
    report.add("error", "umae", em.umae);
  }

  const std::vector<std::string>& catalog = in.train->items;
  for (int alpha : in.alphas) {
    report.add("item", "ia_" + std::to_string(alpha),
               aggregate_diversity(*in.batch, catalog, alpha, Scope::item,
                                   nullptr));
  }
  const PopularityProfile profile = popularity_profile(*in.train);
  if (const auto lt = longtail_coverage(*in.batch, profile)) {
    report.add("item", "longtail_coverage", *lt);
  }
  const Distribution item_vis =
      add_zero_members(visibility(*in.batch, Scope::item, nullptr), catalog);
  if (item_vis.total() > 0.0) {
    const Distribution norm = item_vis.normalized();
    if (const auto g = gini(norm)) report.add("item", "gini", *g);
    report.add("item", "entropy", entropy(norm));
  }
  if (in.base) {
    const auto shifts = visibility_shift(*in.base, *in.batch, Scope::item,
                                         nullptr, catalog);
    for (size_t b = 0; b < shifts.size(); ++b) {
      if (shifts[b]) {
        report.add("item", "ivs_bin" + std::to_string(b + 1), *shifts[b]);
      }
    }
  }

  if (in.suppliers) {
    const std::vector<std::string> sup_catalog = in.suppliers->suppliers();
    for (int alpha : in.alphas) {
      report.add("supplier", "sa_" + std::to_string(alpha),
                 aggregate_diversity(*in.batch, sup_catalog, alpha,
                                     Scope::supplier, in.suppliers));
    }
    const Distribution sup_vis = add_zero_members(
        visibility(*in.batch, Scope::supplier, in.suppliers), sup_catalog);
    if (sup_vis.total() > 0.0) {
      const Distribution norm = sup_vis.normalized();
      if (const auto g = gini(norm)) report.add("supplier", "gini", *g);
      report.add("supplier", "entropy", entropy(norm));
    }
    if (in.base) {
      const auto shifts = visibility_shift(*in.base, *in.batch,
                                           Scope::supplier, in.suppliers,
                                           sup_catalog);
      for (size_t b = 0; b < shifts.size(); ++b) {
        if (shifts[b]) {
          report.add("supplier", "svs_bin" + std::to_string(b + 1),
                     *shifts[b]);
        }
      }
    }
  }

  if (in.genres) {
    const PerUserMetric mc =
        miscalibration(*in.train, *in.batch, *in.genres, in.smooth_alpha);
    if (!mc.per_user.empty()) report.add("user", "miscalibration", mc.mean);
  }
  const PerUserMetric u = upd(*in.train, *in.batch, profile, in.smooth_alpha);
  if (!u.per_user.empty()) report.add("user", "upd", u.mean);

  if (in.groups) {
    std::set<std::string> unprot, prot;
    for (const auto& [user, label] : in.groups->label_of) {
      if (label == "unprotected") unprot.insert(user);
      if (label == "protected") prot.insert(user);
    }
    if (!unprot.empty() && !prot.empty()) {
      report.add("user", "spd", spd(*in.batch, *in.test, *in.groups));
      const std::set<std::string> head(profile.head.begin(),
                                       profile.head.end());
      const std::set<std::string> longtail(profile.longtail.begin(),
                                           profile.longtail.end());
      std::vector<std::pair<std::string, const std::set<std::string>*>> cats =
          {{"head", &head}, {"longtail", &longtail}};
      for (const auto& [group_name, users] :
           std::vector<std::pair<std::string, const std::set<std::string>*>>{
               {"unprotected", &unprot}, {"protected", &prot}}) {
        for (const auto& [cat_name, cat] : cats) {
          if (cat->empty()) continue;
          if (const auto bd = bias_disparity(*in.train, *in.batch, *users,
                                             *cat, in.train->item_count())) {
            report.add("group", "bd_" + group_name + "_" + cat_name, *bd);
          }
        }
      }
      std::vector<std::set<std::string>> cat_sets;
      for (const auto& [_, cat] : cats) {
        if (!cat->empty()) cat_sets.push_back(*cat);
      }
      if (!cat_sets.empty()) {
        report.add("group", "average_disparity",
                   average_disparity(*in.train, *in.batch, unprot, prot,
                                     cat_sets));
      }
    }
  }
  return report;
}

}  // namespace fairex
