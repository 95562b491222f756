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
//
// End-to-end acceptance checks: exact worked examples, oracle cross-checks,
// directional re-ranking effects, metric identities, a feedback-loop run,
// and byte-level pipeline determinism through the CLI binary (argv[1]).
// One PASS/FAIL line per check; the exit status is the failure count.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fairex/dataset.hpp"
#include "fairex/error.hpp"
#include "fairex/fairmatch.hpp"
#include "fairex/metrics.hpp"
#include "fairex/recommend.hpp"
#include "fairex/rerank_baselines.hpp"
#include "fairex/rng.hpp"
#include "fairex/simulate.hpp"
#include "fairex/transform.hpp"
#include "oracles/maxflow_oracle.hpp"

namespace fs = std::filesystem;
using namespace fairex;

namespace {

using Failures = std::vector<std::string>;

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

void expect(Failures& f, bool ok, const std::string& message) {
  if (!ok) f.push_back(message);
}

std::string item_name(const char* prefix, int width, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

std::string join(const std::vector<double>& values, const char* pattern) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += " ";
    out += fmt(pattern, values[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared fixtures.

// Per-user long lists: t weighted draws without replacement from a Zipf
// catalog of `universe` items; the sampling order doubles as the relevance
// order, so heads align across users while tails stay personal.
RecBatch long_lists(int users, int universe, int t, double exponent,
                    uint64_t seed) {
  std::vector<double> weight(static_cast<size_t>(universe), 0.0);
  for (int i = 0; i < universe; ++i)
    weight[static_cast<size_t>(i)] = std::pow(i + 1, -exponent);
  Rng rng(seed);
  RecBatch batch;
  batch.list_size = t;
  for (int u = 0; u < users; ++u) {
    RecList list;
    list.user = "u" + std::to_string(u);
    std::vector<bool> used(static_cast<size_t>(universe), false);
    for (int j = 0; j < t; ++j) {
      double total = 0.0;
      for (int i = 0; i < universe; ++i)
        if (!used[static_cast<size_t>(i)]) total += weight[static_cast<size_t>(i)];
      double draw = rng.uniform_real() * total;
      int pick = -1;
      for (int i = 0; i < universe; ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        draw -= weight[static_cast<size_t>(i)];
        if (draw <= 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (int i = universe - 1; i >= 0; --i)
          if (!used[static_cast<size_t>(i)]) {
            pick = i;
            break;
          }
      }
      used[static_cast<size_t>(pick)] = true;
      list.entries.push_back({item_name("m", 2, pick), double(t - j)});
    }
    batch.lists.push_back(std::move(list));
  }
  return batch;
}

// Held-out relevance profiles skewed toward the top of each long list:
// `top` uniform draws from ranks 1..15 and `deep` draws from ranks 16..t.
Dataset test_profiles(const RecBatch& batch, int top, int deep,
                      uint64_t seed) {
  Rng rng(seed);
  std::vector<Interaction> xs;
  for (const RecList& list : batch.lists) {
    std::vector<int> head_ranks, tail_ranks;
    for (int r = 0; r < 15; ++r) head_ranks.push_back(r);
    for (int r = 15; r < static_cast<int>(list.entries.size()); ++r)
      tail_ranks.push_back(r);
    rng.shuffle(head_ranks);
    rng.shuffle(tail_ranks);
    for (int k = 0; k < top; ++k)
      xs.push_back({list.user,
                    list.entries[static_cast<size_t>(head_ranks[static_cast<size_t>(k)])].item,
                    5.0, std::nullopt});
    for (int k = 0; k < deep; ++k)
      xs.push_back({list.user,
                    list.entries[static_cast<size_t>(tail_ranks[static_cast<size_t>(k)])].item,
                    5.0, std::nullopt});
  }
  return make_dataset(std::move(xs), {1.0, 5.0});
}

std::vector<std::string> universe_ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(item_name("m", 2, i));
  return out;
}

double gini_of(const RecBatch& batch, Scope scope, const SupplierMap* sup,
               const std::vector<std::string>& keys) {
  return gini(add_zero_members(visibility(batch, scope, sup), keys)
                  .normalized())
      .value();
}

// Skewed rating data: per-user Zipf draws without replacement over `items`
// catalog entries, ratings synthesized around the scale midpoint.
Dataset zipf_profiles(int users, int items, double exponent, int profile_size,
                      uint64_t seed) {
  std::vector<double> weight(static_cast<size_t>(items), 0.0);
  for (int i = 0; i < items; ++i)
    weight[static_cast<size_t>(i)] = std::pow(i + 1, -exponent);
  Rng rng(seed);
  std::vector<Interaction> xs;
  for (int u = 0; u < users; ++u) {
    std::vector<bool> used(static_cast<size_t>(items), false);
    const std::string user = "u" + std::to_string(u);
    for (int k = 0; k < profile_size; ++k) {
      double total = 0.0;
      for (int i = 0; i < items; ++i)
        if (!used[static_cast<size_t>(i)]) total += weight[static_cast<size_t>(i)];
      double draw = rng.uniform_real() * total;
      int pick = -1;
      for (int i = 0; i < items; ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        draw -= weight[static_cast<size_t>(i)];
        if (draw <= 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (int i = items - 1; i >= 0; --i)
          if (!used[static_cast<size_t>(i)]) {
            pick = i;
            break;
          }
      }
      used[static_cast<size_t>(pick)] = true;
      const double rating =
          std::max(1.0, std::min(5.0, std::round(3.5 + rng.normal())));
      xs.push_back({user, item_name("i", 3, pick), rating, std::nullopt});
    }
  }
  return make_dataset(std::move(xs), {1.0, 5.0});
}

GenreMap genre_cover(int items) {
  static const char* kNames[4] = {"drama", "comedy", "action", "scifi"};
  GenreMap genres;
  for (int i = 0; i < items; ++i)
    genres.item_to_genres[item_name("i", 3, i)] = {kNames[i % 4]};
  return genres;
}

// ---------------------------------------------------------------------------
// Check 1: percentile transform worked examples.

Failures check_percentile() {
  Failures f;

  const std::vector<double> alice = {1, 1, 2, 2, 3, 3, 3, 4, 5};
  const std::vector<double> alice_pct = {20, 20, 40, 40, 70, 70, 70, 80, 90};
  const std::vector<double> bob = {3, 3, 4, 4, 4, 5, 5, 5, 5};
  const std::vector<double> bob_pct = {20, 20, 50, 50, 50, 90, 90, 90, 90};
  {
    std::vector<Interaction> xs;
    for (size_t i = 0; i < alice.size(); ++i)
      xs.push_back({"alice", "a" + std::to_string(i), alice[i], std::nullopt});
    for (size_t i = 0; i < bob.size(); ++i)
      xs.push_back({"bob", "b" + std::to_string(i), bob[i], std::nullopt});
    const Dataset data = make_dataset(std::move(xs), {1.0, 5.0});
    TransformConfig tc;
    tc.kind = TransformKind::percentile;
    tc.axis = Axis::user;
    tc.tie_rule = TieRule::last;
    const Dataset out = percentile_transform(data, tc);
    for (size_t i = 0; i < alice.size(); ++i)
      expect(f, out.interactions[i].rating == alice_pct[i],
             fmt("user-axis percentile [%zu]: %g != %g", i,
                 out.interactions[i].rating, alice_pct[i]));
    for (size_t i = 0; i < bob.size(); ++i) {
      const size_t k = alice.size() + i;
      expect(f, out.interactions[k].rating == bob_pct[i],
             fmt("user-axis percentile [%zu]: %g != %g", k,
                 out.interactions[k].rating, bob_pct[i]));
    }
    expect(f, out.rating_scale == std::make_pair(0.0, 100.0),
           "transformed scale is not (0, 100)");
  }

  const std::vector<double> item_a = {1, 3, 3, 4};
  const std::vector<double> item_a_last = {20, 60, 60, 80};
  const std::vector<double> item_a_first = {20, 40, 40, 80};
  const std::vector<double> item_b = {3, 3, 4, 4, 4, 4, 4, 5, 5};
  const std::vector<double> item_b_last = {20, 20, 70, 70, 70, 70, 70, 90, 90};
  {
    std::vector<Interaction> xs;
    for (size_t i = 0; i < item_a.size(); ++i)
      xs.push_back({"u" + std::to_string(i), "A", item_a[i], std::nullopt});
    for (size_t i = 0; i < item_b.size(); ++i)
      xs.push_back({"v" + std::to_string(i), "B", item_b[i], std::nullopt});
    const Dataset data = make_dataset(std::move(xs), {1.0, 5.0});
    TransformConfig tc;
    tc.kind = TransformKind::percentile;
    tc.axis = Axis::item;
    tc.tie_rule = TieRule::last;
    const Dataset last = percentile_transform(data, tc);
    for (size_t i = 0; i < item_a.size(); ++i)
      expect(f, last.interactions[i].rating == item_a_last[i],
             fmt("item-axis last percentile A[%zu]: %g != %g", i,
                 last.interactions[i].rating, item_a_last[i]));
    for (size_t i = 0; i < item_b.size(); ++i) {
      const size_t k = item_a.size() + i;
      expect(f, last.interactions[k].rating == item_b_last[i],
             fmt("item-axis last percentile B[%zu]: %g != %g", i,
                 last.interactions[k].rating, item_b_last[i]));
    }
    tc.tie_rule = TieRule::first;
    const Dataset first = percentile_transform(data, tc);
    for (size_t i = 0; i < item_a.size(); ++i)
      expect(f, first.interactions[i].rating == item_a_first[i],
             fmt("item-axis first percentile A[%zu]: %g != %g", i,
                 first.interactions[i].rating, item_a_first[i]));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Check 2: terminal capacity arithmetic.

Failures check_capacities() {
  Failures f;
  const TerminalCaps caps = terminal_capacities(100, 5, 8);
  expect(f, caps.c_eq_left == 20,
         fmt("c_eq over 5 left nodes: %lld != 20", caps.c_eq_left));
  expect(f, caps.c_eq_right == 13,
         fmt("c_eq over 8 right nodes: %lld != 13", caps.c_eq_right));
  expect(f, caps.source_cap == 13,
         fmt("source capacity: %lld != 13", caps.source_cap));
  expect(f, caps.sink_cap == 20,
         fmt("sink-side capacity: %lld != 20", caps.sink_cap));
  return f;
}

// ---------------------------------------------------------------------------
// Check 3: push-relabel flow value vs an augmenting-path oracle.

FlowNetwork random_network(Rng& rng) {
  const int left = 1 + static_cast<int>(rng.below(5));
  const int right = 1 + static_cast<int>(rng.below(5));
  FlowNetwork net;
  for (int l = 0; l < left; ++l) net.left_items.push_back("i" + std::to_string(l));
  for (int r = 0; r < right; ++r) net.right_users.push_back("u" + std::to_string(r));
  net.adj.resize(static_cast<size_t>(net.node_count()));
  for (int l = 0; l < left; ++l)
    net.add_edge(net.source(), net.left_node(l), 1 + static_cast<long long>(rng.below(20)));
  for (int l = 0; l < left; ++l)
    for (int r = 0; r < right; ++r) {
      if (rng.uniform_real() >= 0.6) continue;
      const int adj_index = static_cast<int>(net.adj[static_cast<size_t>(net.left_node(l))].size());
      net.add_edge(net.left_node(l), net.right_node(r), 1 + static_cast<long long>(rng.below(20)));
      net.middle.push_back({l, r, 1, adj_index});
    }
  for (int r = 0; r < right; ++r)
    net.add_edge(net.right_node(r), net.sink(), 1 + static_cast<long long>(rng.below(20)));
  return net;
}

std::vector<std::vector<long long>> capacity_matrix(const FlowNetwork& net) {
  const size_t n = static_cast<size_t>(net.node_count());
  std::vector<std::vector<long long>> cap(n, std::vector<long long>(n, 0));
  for (size_t from = 0; from < n; ++from)
    for (const FlowNetwork::Edge& e : net.adj[from])
      cap[from][static_cast<size_t>(e.to)] += e.cap;
  return cap;
}

Failures check_flow_oracle() {
  Failures f;
  Rng rng(905);
  for (int trial = 0; trial < 100; ++trial) {
    FlowNetwork net = random_network(rng);
    const auto cap = capacity_matrix(net);
    const long long expected =
        testing::maxflow_oracle(cap, net.source(), net.sink());
    const long long got = push_relabel_max_flow(net);
    expect(f, got == expected,
           fmt("trial %d: push-relabel %lld != oracle %lld", trial, got,
               expected));
    if (f.size() > 4) break;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Checks 4, 5, 10: re-ranking directional effects on the Zipf fixture.

struct RerankFixture {
  RecBatch base;
  Dataset test;
  RecBatch topn;
  RecBatch fm_item;
  std::vector<std::string> catalog;
  FairMatchConfig config;
};

RerankFixture make_rerank_fixture() {
  RerankFixture fx;
  fx.base = long_lists(10, 60, 30, 1.5, 42);
  fx.test = test_profiles(fx.base, 4, 2, 43);
  fx.catalog = universe_ids(60);
  fx.topn = rerank_topn(fx.base, 10);
  fx.config.variant = FairMatchConfig::Variant::item;
  fx.config.lambda = 0.5;
  fx.config.beta = 1.0;
  fx.config.long_list_size = 30;
  fx.config.final_size = 10;
  fx.fm_item = fairmatch_rerank(fx.base, nullptr, fx.config);
  return fx;
}

Failures check_item_rerank() {
  Failures f;
  const RerankFixture fx = make_rerank_fixture();
  const double gini_top = gini_of(fx.topn, Scope::item, nullptr, fx.catalog);
  const double gini_fm = gini_of(fx.fm_item, Scope::item, nullptr, fx.catalog);
  expect(f, gini_fm < gini_top,
         fmt("item gini did not strictly drop: %.4f vs top-n %.4f", gini_fm,
             gini_top));
  const double ia_top =
      aggregate_diversity(fx.topn, fx.catalog, 1, Scope::item, nullptr);
  const double ia_fm =
      aggregate_diversity(fx.fm_item, fx.catalog, 1, Scope::item, nullptr);
  expect(f, ia_fm > ia_top,
         fmt("1-IA did not strictly rise: %.4f vs top-n %.4f", ia_fm, ia_top));
  const double prec_top = precision_recall(fx.topn, fx.test).precision;
  const double prec_fm = precision_recall(fx.fm_item, fx.test).precision;
  expect(f, prec_top - prec_fm <= 0.15,
         fmt("precision loss %.4f exceeds 0.15 (top-n %.4f, re-ranked %.4f)",
             prec_top - prec_fm, prec_top, prec_fm));
  return f;
}

Failures check_supplier_rerank() {
  Failures f;
  const RerankFixture fx = make_rerank_fixture();

  // One supplier owns the catalog head plus the two rarest items; nine more
  // split the rest evenly.
  SupplierMap suppliers;
  std::vector<std::string> supplier_ids;
  for (int s = 0; s < 10; ++s) supplier_ids.push_back("s" + std::to_string(s));
  for (int i = 0; i < 60; ++i) {
    const int s = (i < 6 || i >= 58) ? 0 : 1 + (i - 6) % 9;
    const std::string item = item_name("m", 2, i);
    suppliers.item_to_supplier[item] = supplier_ids[static_cast<size_t>(s)];
    suppliers.supplier_to_items[supplier_ids[static_cast<size_t>(s)]].insert(item);
  }

  FairMatchConfig config = fx.config;
  config.variant = FairMatchConfig::Variant::supplier;
  const RecBatch fm_sup = fairmatch_rerank(fx.base, &suppliers, config);

  const double g_top = gini_of(fx.topn, Scope::supplier, &suppliers, supplier_ids);
  const double g_item = gini_of(fx.fm_item, Scope::supplier, &suppliers, supplier_ids);
  const double g_sup = gini_of(fm_sup, Scope::supplier, &suppliers, supplier_ids);
  expect(f, g_sup < g_item,
         fmt("supplier gini: supplier-variant %.4f not below item-variant %.4f",
             g_sup, g_item));
  expect(f, g_item < g_top,
         fmt("supplier gini: item-variant %.4f not below top-n %.4f", g_item,
             g_top));
  return f;
}

Failures check_reverse_rerank() {
  Failures f;
  const RerankFixture fx = make_rerank_fixture();
  const RecBatch reverse = rerank_reverse(fx.base, 10);
  const double prec_top = precision_recall(fx.topn, fx.test).precision;
  const double prec_rev = precision_recall(reverse, fx.test).precision;
  expect(f, prec_rev <= prec_top + 1e-12,
         fmt("reverse precision %.4f exceeds top-n %.4f", prec_rev, prec_top));
  const double ia_top =
      aggregate_diversity(fx.topn, fx.catalog, 1, Scope::item, nullptr);
  const double ia_rev =
      aggregate_diversity(reverse, fx.catalog, 1, Scope::item, nullptr);
  expect(f, ia_rev >= ia_top - 1e-12,
         fmt("reverse 1-IA %.4f below top-n %.4f", ia_rev, ia_top));
  return f;
}

// ---------------------------------------------------------------------------
// Check 6: feedback-loop bias amplification.

Failures check_feedback_loop() {
  Failures f;
  const Dataset source = zipf_profiles(200, 100, 1.2, 4, 42);
  const GenreMap genres = genre_cover(100);

  SimConfig config;
  config.iterations = 5;
  config.list_size = 10;
  config.accept_exponent = -0.02;
  config.algorithm = Algorithm::mostpopular;
  config.seed = 42;

  const IterationLog log =
      run_feedback_loop(source, genres, GroupAssignment{}, config);

  std::vector<double> rec_pop, one_ia, predicted, realized;
  for (const IterationRecord& rec : log.records) {
    rec_pop.push_back(rec.mean_rec_pop);
    one_ia.push_back(rec.one_ia);
    predicted.push_back(rec.predicted_increment);
    realized.push_back(rec.realized_increment);
  }

  for (size_t t = 1; t < rec_pop.size(); ++t)
    expect(f, rec_pop[t] >= rec_pop[t - 1] - 1e-12,
           fmt("mean recommended popularity dips at round %zu: [%s]", t + 1,
               join(rec_pop, "%.4f").c_str()));
  for (size_t t = 1; t < one_ia.size(); ++t)
    expect(f, one_ia[t] <= one_ia[t - 1] + 1e-12,
           fmt("1-IA rises at round %zu: [%s]", t + 1,
               join(one_ia, "%.4f").c_str()));
  for (size_t t = 0; t < predicted.size(); ++t) {
    const bool within =
        realized[t] == 0.0
            ? predicted[t] == 0.0
            : std::fabs(predicted[t] - realized[t]) <=
                  0.05 * std::fabs(realized[t]);
    expect(f, within,
           fmt("round %zu: predicted increment %.6f vs realized %.6f "
               "(off by %.1f%%)",
               t + 1, predicted[t], realized[t],
               realized[t] == 0.0
                   ? 100.0
                   : 100.0 * std::fabs(predicted[t] - realized[t]) /
                         std::fabs(realized[t])));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Check 7: metric identities and properties.

Failures check_metric_identities() {
  Failures f;

  {
    Distribution uniform;
    for (int i = 0; i < 7; ++i)
      uniform.weights["k" + std::to_string(i)] = 1.0 / 7.0;
    expect(f, std::fabs(gini(uniform).value()) <= 1e-9,
           fmt("gini(uniform) = %.12f, not 0", gini(uniform).value()));

    Distribution onehot;
    onehot.weights["a"] = 1.0;
    for (int i = 0; i < 4; ++i) onehot.weights["z" + std::to_string(i)] = 0.0;
    expect(f, std::fabs(gini(onehot).value() - 1.0) <= 1e-9,
           fmt("gini(one-hot) = %.12f, not 1", gini(onehot).value()));

    Distribution uniform8;
    for (int i = 0; i < 8; ++i)
      uniform8.weights["k" + std::to_string(i)] = 1.0 / 8.0;
    expect(f, std::fabs(entropy(uniform8) - std::log(8.0)) <= 1e-9,
           fmt("entropy(uniform over 8) = %.12f, not ln 8", entropy(uniform8)));

    Distribution p;
    p.weights = {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}};
    expect(f, std::fabs(kld(p, p, 0.01)) <= 1e-12,
           fmt("KLD(p, p) = %.15f, not 0", kld(p, p, 0.01)));
  }

  {
    RecBatch batch;
    batch.list_size = 5;
    std::vector<Interaction> hits, misses;
    for (int u = 0; u < 3; ++u) {
      RecList list;
      list.user = "p" + std::to_string(u);
      for (int j = 0; j < 5; ++j) {
        list.entries.push_back({item_name("i", 2, j), double(5 - j)});
        hits.push_back({list.user, item_name("i", 2, j), 5.0, std::nullopt});
        misses.push_back({list.user, item_name("z", 2, j), 5.0, std::nullopt});
      }
      batch.lists.push_back(std::move(list));
    }
    const Dataset all_hits = make_dataset(std::move(hits), {1.0, 5.0});
    const Dataset no_hits = make_dataset(std::move(misses), {1.0, 5.0});
    expect(f, std::fabs(ndcg(batch, all_hits) - 1.0) <= 1e-12,
           fmt("nDCG(all hits) = %.12f, not 1", ndcg(batch, all_hits)));
    expect(f, ndcg(batch, no_hits) == 0.0,
           fmt("nDCG(no hits) = %.12f, not 0", ndcg(batch, no_hits)));
  }

  Rng rng(4242);
  std::vector<std::string> catalog;
  for (int i = 0; i < 25; ++i) catalog.push_back(item_name("k", 2, i));
  for (int trial = 0; trial < 50; ++trial) {
    const int users = 3 + static_cast<int>(rng.below(6));
    const int n = 4 + static_cast<int>(rng.below(4));
    RecBatch batch;
    batch.list_size = n;
    std::vector<Interaction> test_rows;
    int64_t hits = 0;
    for (int u = 0; u < users; ++u) {
      std::vector<int> order;
      for (int i = 0; i < 25; ++i) order.push_back(i);
      rng.shuffle(order);
      RecList list;
      list.user = "p" + std::to_string(u);
      for (int j = 0; j < n; ++j)
        list.entries.push_back({catalog[static_cast<size_t>(order[static_cast<size_t>(j)])],
                                double(n - j)});
      rng.shuffle(order);
      for (int j = 0; j < 4; ++j) {
        const std::string& item = catalog[static_cast<size_t>(order[static_cast<size_t>(j)])];
        test_rows.push_back({list.user, item, 5.0, std::nullopt});
        for (const RecEntry& e : list.entries)
          if (e.item == item) ++hits;
      }
      batch.lists.push_back(std::move(list));
    }

    double previous = 2.0;
    for (int alpha = 1; alpha <= 6; ++alpha) {
      const double ia =
          aggregate_diversity(batch, catalog, alpha, Scope::item, nullptr);
      expect(f, ia <= previous + 1e-12,
             fmt("trial %d: alpha-IA rises from %.4f to %.4f at alpha=%d",
                 trial, previous, ia, alpha));
      previous = ia;
    }

    const Dataset test = make_dataset(std::move(test_rows), {1.0, 5.0});
    const double precision = precision_recall(batch, test).precision;
    expect(f,
           std::fabs(precision * n * users - double(hits)) <= 1e-6,
           fmt("trial %d: precision*n*users = %.6f, hits = %lld", trial,
               precision * n * users, static_cast<long long>(hits)));
    if (f.size() > 6) break;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Check 8: factorization gradient vs central finite differences.

Failures check_gradient() {
  Failures f;
  std::vector<Interaction> xs;
  const double ratings[3][3] = {{5, 3, 1}, {4, 2, 5}, {1, 5, 3}};
  for (int u = 0; u < 3; ++u)
    for (int i = 0; i < 3; ++i)
      xs.push_back({"x" + std::to_string(u), "y" + std::to_string(i),
                    ratings[u][i], std::nullopt});
  const Dataset train = make_dataset(std::move(xs), {1.0, 5.0});
  const double reg = 0.1;

  ModelParams model = train_biasedmf(train, 2, 3, 0.01, reg, 9);
  const BiasedMfGradient grad = biasedmf_gradient(model, train, reg);

  double max_rel = 0.0;
  std::string worst;
  auto probe = [&](double* param, double analytic, const std::string& name) {
    const double saved = *param;
    const double h = 1e-5 * std::max(1.0, std::fabs(saved));
    *param = saved + h;
    const double up = biasedmf_loss(model, train, reg);
    *param = saved - h;
    const double down = biasedmf_loss(model, train, reg);
    *param = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel = std::fabs(analytic - fd) /
                       std::max({std::fabs(analytic), std::fabs(fd), 1e-6});
    if (rel > max_rel) {
      max_rel = rel;
      worst = fmt("%s: analytic %.10f vs fd %.10f", name.c_str(), analytic, fd);
    }
  };

  for (size_t u = 0; u < model.bu.size(); ++u)
    probe(&model.bu[u], grad.bu[u], fmt("bu[%zu]", u));
  for (size_t i = 0; i < model.bi.size(); ++i)
    probe(&model.bi[i], grad.bi[i], fmt("bi[%zu]", i));
  for (size_t u = 0; u < model.P.size(); ++u)
    for (size_t k = 0; k < model.P[u].size(); ++k)
      probe(&model.P[u][k], grad.P[u][k], fmt("P[%zu][%zu]", u, k));
  for (size_t i = 0; i < model.Q.size(); ++i)
    for (size_t k = 0; k < model.Q[i].size(); ++k)
      probe(&model.Q[i][k], grad.Q[i][k], fmt("Q[%zu][%zu]", i, k));

  expect(f, max_rel < 1e-4,
         fmt("max relative gradient error %.3e at %s", max_rel, worst.c_str()));
  return f;
}

// ---------------------------------------------------------------------------
// Check 9: byte-identical pipeline reruns through the CLI binary.

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      out[fs::relative(entry.path(), dir).string()] = read_file(entry.path());
  return out;
}

Failures check_determinism(const std::string& binary) {
  Failures f;
  const fs::path work =
      fs::temp_directory_path() /
      ("fairex_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  {
    // 30 users x 12 Zipf draws over 40 items.
    std::vector<double> weight(40, 0.0);
    for (int i = 0; i < 40; ++i) weight[static_cast<size_t>(i)] = std::pow(i + 1, -1.1);
    Rng rng(777);
    std::ofstream out(work / "ratings.tsv", std::ios::binary);
    for (int u = 0; u < 30; ++u) {
      std::vector<bool> used(40, false);
      for (int k = 0; k < 12; ++k) {
        double total = 0.0;
        for (int i = 0; i < 40; ++i)
          if (!used[static_cast<size_t>(i)]) total += weight[static_cast<size_t>(i)];
        double draw = rng.uniform_real() * total;
        int pick = -1;
        for (int i = 0; i < 40; ++i) {
          if (used[static_cast<size_t>(i)]) continue;
          draw -= weight[static_cast<size_t>(i)];
          if (draw <= 0.0) {
            pick = i;
            break;
          }
        }
        if (pick < 0) {
          for (int i = 39; i >= 0; --i)
            if (!used[static_cast<size_t>(i)]) {
              pick = i;
              break;
            }
        }
        used[static_cast<size_t>(pick)] = true;
        const int rating = static_cast<int>(
            std::max(1.0, std::min(5.0, std::round(3.5 + rng.normal()))));
        out << "u" << u << "\t" << item_name("m", 2, pick) << "\t" << rating
            << "\n";
      }
    }
  }

  {
    std::ofstream out(work / "config.json", std::ios::binary);
    out << R"({
  "ratings": "ratings.tsv",
  "scale": [1, 5],
  "seed": 7,
  "split": {"test_fraction": 0.2},
  "transform": {"kind": "percentile", "axis": "item", "tie_rule": "last"},
  "recommend": {
    "algorithm": "biasedmf",
    "list_size": 30,
    "input": "train_transformed.tsv",
    "scale": [0, 100],
    "factors": 4,
    "epochs": 10,
    "learn_rate": 0.01,
    "regularization": 0.05,
    "predictions": true,
    "test": "test.tsv"
  },
  "rerank": {
    "method": "fairmatch",
    "variant": "item",
    "lambda": 0.5,
    "beta": 0.5,
    "final_size": 10
  },
  "eval": {"train": "train.tsv", "test": "test.tsv"}
}
)";
  }

  const std::vector<std::string> stages = {"split", "transform", "recommend",
                                           "rerank", "eval"};
  auto run_pipeline = [&](const std::string& out_dir, int threads) -> bool {
    for (const std::string& stage : stages) {
      std::string cmd = "cd '" + work.string() + "' && '" + binary + "' " +
                        stage + " --config config.json --out " + out_dir;
      if (threads > 0) cmd += " --threads " + std::to_string(threads);
      cmd += " > stage.log 2>&1";
      const int rc = std::system(cmd.c_str());
      const int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
      if (code != 0) {
        f.push_back(fmt("stage %s into %s exited %d: %s", stage.c_str(),
                        out_dir.c_str(), code,
                        read_file(work / "stage.log").substr(0, 200).c_str()));
        return false;
      }
    }
    return true;
  };

  if (!run_pipeline("out_a", 0) || !run_pipeline("out_b", 0) ||
      !run_pipeline("out_c", 4)) {
    fs::remove_all(work);
    return f;
  }

  const auto a = snapshot(work / "out_a");
  const auto b = snapshot(work / "out_b");
  const auto c = snapshot(work / "out_c");
  expect(f, !a.empty(), "pipeline produced no output files");

  auto compare = [&](const std::map<std::string, std::string>& lhs,
                     const std::map<std::string, std::string>& rhs,
                     const char* label) {
    for (const auto& [name, contents] : lhs) {
      auto it = rhs.find(name);
      if (it == rhs.end())
        f.push_back(fmt("%s: %s missing from rerun", label, name.c_str()));
      else if (it->second != contents)
        f.push_back(fmt("%s: %s differs between runs", label, name.c_str()));
    }
    for (const auto& [name, contents] : rhs)
      if (!lhs.count(name))
        f.push_back(fmt("%s: unexpected extra file %s", label, name.c_str()));
  };
  compare(a, b, "seed rerun");
  compare(a, c, "1 vs 4 threads");

  fs::remove_all(work);
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-fairex-binary>\n");
    return 2;
  }
  const std::string binary = fs::absolute(argv[1]).string();

  struct Check {
    const char* name;
    double budget_seconds;
    std::function<Failures()> run;
  };
  const std::vector<Check> checks = {
      {"percentile transform worked examples", 1.0, check_percentile},
      {"re-rank capacity arithmetic", 1.0, check_capacities},
      {"push-relabel vs augmenting-path oracle", 5.0, check_flow_oracle},
      {"item-variant re-ranking direction", 10.0, check_item_rerank},
      {"supplier-variant re-ranking direction", 10.0, check_supplier_rerank},
      {"feedback-loop bias amplification", 60.0, check_feedback_loop},
      {"metric identities and properties", 5.0, check_metric_identities},
      {"factorization gradient check", 1.0, check_gradient},
      {"pipeline determinism", 30.0, [&] { return check_determinism(binary); }},
      {"reverse re-ranker sanity", 5.0, check_reverse_rerank},
  };

  int failed = 0;
  for (size_t k = 0; k < checks.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Failures failures;
    try {
      failures = checks[k].run();
    } catch (const std::exception& e) {
      failures.push_back(std::string("unexpected exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (seconds > checks[k].budget_seconds)
      failures.push_back(fmt("exceeded time budget: %.2fs > %.0fs", seconds,
                             checks[k].budget_seconds));
    std::printf("%2zu %s %-42s (%.2fs)\n", k + 1,
                failures.empty() ? "PASS" : "FAIL", checks[k].name, seconds);
    for (const std::string& message : failures)
      std::printf("      - %s\n", message.c_str());
    if (!failures.empty()) ++failed;
  }
  std::printf("%d/%zu checks passed\n",
              static_cast<int>(checks.size()) - failed, checks.size());
  return failed;
}
