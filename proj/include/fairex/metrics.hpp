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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairex/dataset.hpp"
#include "fairex/recommend.hpp"

namespace fairex {

// Non-negative weights over string keys. Normalized form sums to 1.
struct Distribution {
  std::map<std::string, double> weights;

  double total() const;
  // Throws DomainError when the total is zero.
  Distribution normalized() const;
};

enum class Scope { item, supplier };

struct RankingMetrics {
  double precision = 0.0;
  double recall = 0.0;
};

// precision = mean over users of hits/|L_u|; recall = mean over users with a
// non-empty test profile of hits/|P_u_test|. Throws DomainError on an empty
// test set.
RankingMetrics precision_recall(const RecBatch& batch, const Dataset& test);

// Mean nDCG over users with a non-empty test profile. Gain 2^hit - 1,
// discount ln(position + 1); the ideal DCG places hits in the first
// min(|L_u|, |P_u_test|) positions. Natural logarithm.
double ndcg(const RecBatch& batch, const Dataset& test);

struct ErrorMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double umae = 0.0;
};

// Standard error formulas over the test pairs; UMAE averages per-user MAE.
// Throws CoverageError when a test pair has no prediction.
ErrorMetrics error_metrics(
    const std::map<std::pair<std::string, std::string>, double>& predictions,
    const Dataset& test);

// User-fraction visibility: IV(i) = (#lists containing i) / |U|;
// SV(s) sums IV over the supplier's items. Keys are those observed in the
// batch; extend with add_zero_members before concentration metrics.
Distribution visibility(const RecBatch& batch, Scope scope,
                        const SupplierMap* suppliers);

// Inserts weight 0 for every key not already present.
Distribution add_zero_members(Distribution dist,
                              const std::vector<std::string>& keys);

// Fraction of `catalog` keys recommended at least `alpha` times across all
// lists. Item appearances count once per list; a supplier appears once per
// appearance of any of its items.
double aggregate_diversity(const RecBatch& batch,
                           const std::vector<std::string>& catalog, int alpha,
                           Scope scope, const SupplierMap* suppliers);

// Fraction of long-tail items appearing at least once; absent when the
// long tail is empty.
std::optional<double> longtail_coverage(const RecBatch& batch,
                                        const PopularityProfile& profile);

// Gini index of a normalized distribution over N >= 2 members (zero-weight
// members included by the caller): (1/(N-1)) * sum_k (2k - N - 1) w_k with
// weights ascending. Absent when N < 2.
std::optional<double> gini(const Distribution& normalized_dist);

// Shannon entropy -sum w ln w of a normalized distribution; 0 ln 0 = 0.
double entropy(const Distribution& normalized_dist);

// Relative visibility change per group after re-ranking. Groups are
// `bins` equal-size bins of `universe` keys sorted by descending visibility
// in the base batch (truncated to the reranked list size), ties by ascending
// universe position; a remainder spreads over the earliest bins. Shift is
// (GV_reranked - GV_base)/GV_base over mean member visibility; groups with
// zero base visibility (or no members) are absent.
std::vector<std::optional<double>> visibility_shift(
    const RecBatch& base, const RecBatch& reranked, Scope scope,
    const SupplierMap* suppliers, const std::vector<std::string>& universe,
    int bins = 10);

// KL divergence sum_k p_k ln(p_k / q~_k) with q~ = (1-alpha) q + alpha p.
// Inputs are normalized internally; terms with p_k = 0 contribute 0. Throws
// DomainError when some p_k > 0 meets q~_k = 0.
double kld(const Distribution& p, const Distribution& q, double smooth_alpha);

// Genre distribution of an item multiset; each item spreads weight
// 1/|genres| over its labels. Throws CoverageError on an uncovered item.
Distribution genre_distribution(const std::vector<std::string>& items,
                                const GenreMap& genres);

struct PerUserMetric {
  std::map<std::string, double> per_user;
  double mean = 0.0;
};

// Per-user KLD between the genre distribution of the train profile and of
// the recommendation list (items weigh 1/|genres| per genre). Users absent
// from the batch, or with empty lists, are skipped.
PerUserMetric miscalibration(const Dataset& train, const RecBatch& batch,
                             const GenreMap& genres, double smooth_alpha);

// Per-user KLD between (head, mid, tail) shares of the train profile and of
// the recommendation list.
PerUserMetric upd(const Dataset& train, const RecBatch& batch,
                  const PopularityProfile& profile, double smooth_alpha);

// Mean per-user precision of the unprotected group minus the protected
// group. Group labels must be exactly "unprotected" and "protected"; throws
// DomainError when either group has no users in the batch.
double spd(const RecBatch& batch, const Dataset& test,
           const GroupAssignment& groups);

// Bias disparity BD = (B_R - B_T)/B_T where B = PR(G,C)/P(C),
// PR is the group's interaction share on category C (train for B_T, lists
// for B_R) and P(C) = |C|/catalog_size. Absent when B_T = 0 or a share is
// undefined.
std::optional<double> bias_disparity(const Dataset& train,
                                     const RecBatch& batch,
                                     const std::set<std::string>& group_users,
                                     const std::set<std::string>& category,
                                     int catalog_size);

// (1/|C|) sum_c |(N_R(G_U,c) - N_T(G_U,c)) - (N_R(G_P,c) - N_T(G_P,c))|
// over raw interaction counts.
double average_disparity(const Dataset& train, const RecBatch& batch,
                         const std::set<std::string>& unprotected_users,
                         const std::set<std::string>& protected_users,
                         const std::vector<std::set<std::string>>& categories);

// Mean over the user's train items of |r_ui - mean rating of the item|.
double profile_anomaly(const Dataset& train, const std::string& user);

// Entropy of the empirical distribution over the profile's distinct rating
// values (natural log).
double profile_entropy(const Dataset& train, const std::string& user);

// Ordered (scope, metric, value) records with unique names per scope.
struct MetricsReport {
  struct Record {
    std::string scope;
    std::string metric;
    double value = 0.0;
  };
  std::vector<Record> records;

  void add(const std::string& scope, const std::string& metric, double value);
  std::optional<double> find(const std::string& scope,
                             const std::string& metric) const;
  // TSV `scope<TAB>metric<TAB>value`, 6 decimals, in insertion order.
  std::string to_tsv() const;
  // One JSON object: {scope: {metric: value}}.
  std::string to_json() const;
};

// Everything the full evaluation stage may consume. Optional inputs switch
// their metric families on; undefined values stay out of the report.
struct ReportInputs {
  const Dataset* train = nullptr;
  const Dataset* test = nullptr;
  const RecBatch* batch = nullptr;
  const RecBatch* base = nullptr;  // long lists, enables visibility shift
  const SupplierMap* suppliers = nullptr;
  const GenreMap* genres = nullptr;
  const GroupAssignment* groups = nullptr;
  const std::map<std::pair<std::string, std::string>, double>* predictions =
      nullptr;
  std::vector<int> alphas = {1};
  double smooth_alpha = 0.01;
};

MetricsReport build_report(const ReportInputs& in);

}  // namespace fairex
