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

#include "fairex/fairmatch.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <unordered_set>

#include "fairex/error.hpp"

namespace fairex {

namespace {

// Working middle edge during iteration; rank is frozen from the original
// batch, degrees are recomputed from whatever edges survive.
struct WorkEdge {
  std::string item;
  std::string user;
  int rank = 0;
};

void validate_config(const FairMatchConfig& config) {
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) {
    throw DomainError("fairmatch lambda must be in [0, 1]");
  }
  if (!(config.beta > 0.0 && config.beta <= 1.0)) {
    throw DomainError("fairmatch beta must be in (0, 1]");
  }
  if (config.final_size < 1 || config.final_size >= config.long_list_size) {
    throw DomainError("fairmatch requires 1 <= n < t");
  }
}

// Builds a flow network from surviving edges. Left/right node order follows
// the original batch's deterministic orderings.
FlowNetwork build_from_edges(const std::vector<WorkEdge>& edges,
                             const std::unordered_map<std::string, int>& item_ord,
                             const std::unordered_map<std::string, int>& user_ord) {
  std::set<std::pair<int, std::string>> items, users;
  for (const WorkEdge& e : edges) {
    items.emplace(item_ord.at(e.item), e.item);
    users.emplace(user_ord.at(e.user), e.user);
  }
  FlowNetwork net;
  std::unordered_map<std::string, int> left_pos, right_pos;
  for (const auto& [_, id] : items) {
    left_pos.emplace(id, net.left_items.size());
    net.left_items.push_back(id);
  }
  for (const auto& [_, id] : users) {
    right_pos.emplace(id, net.right_users.size());
    net.right_users.push_back(id);
  }
  net.adj.assign(size_t(net.node_count()), {});
  for (int l = 0; l < net.left_count(); ++l) {
    net.add_edge(net.source(), net.left_node(l), 0);
  }
  for (const WorkEdge& e : edges) {
    const int l = left_pos.at(e.item);
    const int r = right_pos.at(e.user);
    FlowNetwork::MiddleEdge me;
    me.left = l;
    me.right = r;
    me.rank = e.rank;
    me.adj_index = static_cast<int>(net.adj[size_t(net.left_node(l))].size());
    net.middle.push_back(me);
    net.add_edge(net.left_node(l), net.right_node(r), 0);
  }
  for (int r = 0; r < net.right_count(); ++r) {
    net.add_edge(net.right_node(r), net.sink(), 0);
  }
  return net;
}

std::vector<WorkEdge> edges_of_batch(const RecBatch& batch) {
  std::vector<WorkEdge> edges;
  for (const RecList& list : batch.lists) {
    for (size_t j = 0; j < list.entries.size(); ++j) {
      edges.push_back(
          {list.entries[j].item, list.user, static_cast<int>(j) + 1});
    }
  }
  return edges;
}

std::unordered_map<std::string, int> batch_user_ordinal(const RecBatch& batch) {
  std::unordered_map<std::string, int> ord;
  for (const RecList& list : batch.lists) {
    ord.try_emplace(list.user, static_cast<int>(ord.size()));
  }
  return ord;
}

}  // namespace

void FlowNetwork::add_edge(int from, int to, long long cap) {
  Edge fwd;
  fwd.to = to;
  fwd.cap = cap;
  fwd.rev = static_cast<int>(adj[size_t(to)].size());
  Edge bwd;
  bwd.to = from;
  bwd.cap = 0;
  bwd.rev = static_cast<int>(adj[size_t(from)].size());
  adj[size_t(from)].push_back(fwd);
  adj[size_t(to)].push_back(bwd);
}

std::unordered_map<std::string, int> item_visibility(const RecBatch& batch) {
  std::unordered_map<std::string, int> vis;
  for (const RecList& list : batch.lists) {
    std::unordered_set<std::string> seen;
    for (const RecEntry& e : list.entries) {
      if (seen.insert(e.item).second) vis[e.item]++;
    }
  }
  return vis;
}

std::unordered_map<std::string, int> batch_item_ordinal(const RecBatch& batch) {
  std::unordered_map<std::string, int> ord;
  for (const RecList& list : batch.lists) {
    for (const RecEntry& e : list.entries) {
      ord.try_emplace(e.item, static_cast<int>(ord.size()));
    }
  }
  return ord;
}

FlowNetwork build_graph(const RecBatch& batch) {
  const std::vector<WorkEdge> edges = edges_of_batch(batch);
  if (edges.empty()) throw DomainError("fairmatch graph of an empty batch");
  return build_from_edges(edges, batch_item_ordinal(batch),
                          batch_user_ordinal(batch));
}

TerminalCaps terminal_capacities(long long c_t, int left_count,
                                 int right_count) {
  if (left_count < 1 || right_count < 1) {
    throw DomainError("terminal capacities need non-empty node sets");
  }
  TerminalCaps caps;
  caps.c_eq_left = (c_t + left_count - 1) / left_count;
  caps.c_eq_right = (c_t + right_count - 1) / right_count;
  const long long g = std::gcd(caps.c_eq_left, caps.c_eq_right);
  if (g > 0) {
    // Both quotients are exact, so the ceilings in the definition collapse.
    caps.source_cap = std::min(caps.c_eq_left, caps.c_eq_right) / g;
    caps.sink_cap = caps.c_eq_left / g;
  }
  return caps;
}

void compute_weights(FlowNetwork& net, const SupplierMap* suppliers,
                     const FairMatchConfig& config) {
  if (net.middle.empty()) throw DomainError("graph has no middle edges");
  if (config.variant == FairMatchConfig::Variant::supplier && !suppliers) {
    throw DomainError("supplier variant requires a supplier map");
  }
  std::vector<long long> degree(size_t(net.left_count()), 0);
  for (const FlowNetwork::MiddleEdge& e : net.middle) degree[size_t(e.left)]++;

  // Visibility per left node: own degree, or the degree sum over the
  // supplier's items present in this (possibly shrunken) graph.
  std::vector<double> vis(size_t(net.left_count()), 0.0);
  if (config.variant == FairMatchConfig::Variant::item) {
    for (int l = 0; l < net.left_count(); ++l) {
      vis[size_t(l)] = double(degree[size_t(l)]);
    }
  } else {
    std::unordered_map<std::string, long long> supplier_degree;
    for (int l = 0; l < net.left_count(); ++l) {
      auto it = suppliers->item_to_supplier.find(net.left_items[size_t(l)]);
      if (it == suppliers->item_to_supplier.end()) {
        throw CoverageError("no supplier for item " + net.left_items[size_t(l)]);
      }
      supplier_degree[it->second] += degree[size_t(l)];
    }
    for (int l = 0; l < net.left_count(); ++l) {
      vis[size_t(l)] = double(
          supplier_degree.at(suppliers->item_to_supplier.at(net.left_items[size_t(l)])));
    }
  }
  double vmin = vis[0], vmax = vis[0];
  for (const FlowNetwork::MiddleEdge& e : net.middle) {
    vmin = std::min(vmin, vis[size_t(e.left)]);
    vmax = std::max(vmax, vis[size_t(e.left)]);
  }
  const double t = double(config.long_list_size);
  auto normalized = [&](double v) {
    // Same range as rank: [1, t]. A constant visibility maps to 1.
    if (vmax == vmin) return 1.0;
    return 1.0 + (v - vmin) * (t - 1.0) / (vmax - vmin);
  };
  long long c_t = 0;
  for (const FlowNetwork::MiddleEdge& e : net.middle) {
    const double w = config.lambda * double(e.rank) +
                     (1.0 - config.lambda) * normalized(vis[size_t(e.left)]);
    // Round up; the epsilon keeps exact integers (e.g. lambda=1) stable.
    const long long cap = static_cast<long long>(std::ceil(w - 1e-9));
    net.adj[size_t(net.left_node(e.left))][size_t(e.adj_index)].cap = cap;
    c_t += cap;
  }
  const TerminalCaps caps =
      terminal_capacities(c_t, net.left_count(), net.right_count());
  for (int l = 0; l < net.left_count(); ++l) {
    // Source edges were added first, one per left node, in left order.
    net.adj[size_t(net.source())][size_t(l)].cap = caps.source_cap;
  }
  for (int r = 0; r < net.right_count(); ++r) {
    // The right->sink edge is the last one added at each right node.
    auto& edges = net.adj[size_t(net.right_node(r))];
    edges.back().cap = caps.sink_cap;
  }
}

long long push_relabel_max_flow(FlowNetwork& net) {
  const int n = net.node_count();
  const int s = net.source();
  const int t = net.sink();
  net.label.assign(size_t(n), 0);
  net.excess.assign(size_t(n), 0);
  for (auto& edges : net.adj) {
    for (FlowNetwork::Edge& e : edges) e.flow = 0;
  }
  net.label[size_t(s)] = n;  // n == |I| + |U| + 2
  for (int l = 0; l < net.left_count(); ++l) {
    net.label[size_t(net.left_node(l))] = 2;
  }
  for (int r = 0; r < net.right_count(); ++r) {
    net.label[size_t(net.right_node(r))] = 1;
  }
  net.label[size_t(t)] = 0;

  std::deque<int> queue;
  std::vector<char> queued(size_t(n), 0);
  auto push = [&](int u, FlowNetwork::Edge& e) {
    const long long delta = std::min(net.excess[size_t(u)], e.cap - e.flow);
    e.flow += delta;
    net.adj[size_t(e.to)][size_t(e.rev)].flow -= delta;
    net.excess[size_t(u)] -= delta;
    net.excess[size_t(e.to)] += delta;
    if (e.to != s && e.to != t && !queued[size_t(e.to)] &&
        net.excess[size_t(e.to)] > 0) {
      queued[size_t(e.to)] = 1;
      queue.push_back(e.to);
    }
  };
  // Saturating push on every source edge.
  for (FlowNetwork::Edge& e : net.adj[size_t(s)]) {
    net.excess[size_t(s)] += e.cap;  // so push() moves the full capacity
    push(s, e);
  }
  std::vector<size_t> arc(size_t(n), 0);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    queued[size_t(u)] = 0;
    auto& edges = net.adj[size_t(u)];
    while (net.excess[size_t(u)] > 0) {
      if (arc[size_t(u)] == edges.size()) {
        // Relabel: one above the lowest residual neighbor.
        int min_label = -1;
        for (const FlowNetwork::Edge& e : edges) {
          if (e.cap - e.flow > 0) {
            if (min_label < 0 || net.label[size_t(e.to)] < min_label) {
              min_label = net.label[size_t(e.to)];
            }
          }
        }
        if (min_label < 0) break;  // isolated node; cannot occur with excess
        net.label[size_t(u)] = min_label + 1;
        arc[size_t(u)] = 0;
        continue;
      }
      FlowNetwork::Edge& e = edges[arc[size_t(u)]];
      if (e.cap - e.flow > 0 &&
          net.label[size_t(u)] == net.label[size_t(e.to)] + 1) {
        push(u, e);
      } else {
        ++arc[size_t(u)];
      }
    }
  }
  return net.excess[size_t(t)];
}

std::vector<int> select_candidates(const FlowNetwork& net) {
  std::vector<int> selected;
  const int threshold = net.node_count();  // |I| + |U| + 2
  for (int l = 0; l < net.left_count(); ++l) {
    if (net.label[size_t(net.left_node(l))] >= threshold) selected.push_back(l);
  }
  return selected;
}

CandidateSet fairmatch_iterate(const RecBatch& batch,
                               const SupplierMap* suppliers,
                               const FairMatchConfig& config) {
  validate_config(config);
  const auto item_ord = batch_item_ordinal(batch);
  const auto user_ord = batch_user_ordinal(batch);
  CandidateSet out;
  out.visibility = item_visibility(batch);
  std::vector<WorkEdge> edges = edges_of_batch(batch);
  while (!edges.empty()) {
    FlowNetwork net = build_from_edges(edges, item_ord, user_ord);
    compute_weights(net, suppliers, config);
    push_relabel_max_flow(net);
    const std::vector<int> selected = select_candidates(net);
    if (selected.empty()) break;
    std::unordered_set<std::string> harvested;
    for (int l : selected) harvested.insert(net.left_items[size_t(l)]);
    std::vector<WorkEdge> remaining;
    remaining.reserve(edges.size());
    for (const WorkEdge& e : edges) {
      if (harvested.count(e.item)) {
        out.pairs.emplace_back(e.item, e.user);
      } else {
        remaining.push_back(e);
      }
    }
    edges = std::move(remaining);
    // Right nodes isolated by the removal drop out automatically on the
    // next build, since nodes are derived from surviving edges.
  }
  return out;
}

RecBatch reconstruct_lists(const RecBatch& batch,
                           const CandidateSet& candidates,
                           const FairMatchConfig& config) {
  validate_config(config);
  const int n = config.final_size;
  const auto vis = item_visibility(batch);
  const auto item_ord = batch_item_ordinal(batch);
  auto vis_of = [&](const std::string& item) {
    auto it = vis.find(item);
    return it == vis.end() ? 0 : it->second;
  };
  // Candidate items per user, deduplicated.
  std::unordered_map<std::string, std::vector<std::string>> cand_of;
  {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& [item, user] : candidates.pairs) {
      if (seen.emplace(item, user).second) cand_of[user].push_back(item);
    }
  }
  RecBatch out;
  out.list_size = n;
  for (const RecList& list : batch.lists) {
    const size_t prefix_len = std::min(size_t(n), list.entries.size());
    std::vector<std::string> cand;
    if (auto it = cand_of.find(list.user); it != cand_of.end()) {
      cand = it->second;
    }
    std::sort(cand.begin(), cand.end(),
              [&](const std::string& a, const std::string& b) {
                if (vis_of(a) != vis_of(b)) return vis_of(a) < vis_of(b);
                return item_ord.at(a) < item_ord.at(b);
              });
    // floor(beta*n) with a representation-error guard (0.3 * 10 must be 3).
    size_t m = size_t(std::floor(config.beta * double(n) + 1e-9));
    m = std::min({m, cand.size(), size_t(n), prefix_len});

    // Prefix positions sorted ascending by visibility; drops come from the
    // bottom of this order (the most visible). Ties keep the more relevant
    // entry dropped last.
    std::vector<size_t> by_vis(prefix_len);
    std::iota(by_vis.begin(), by_vis.end(), size_t(0));
    std::sort(by_vis.begin(), by_vis.end(), [&](size_t a, size_t b) {
      const int va = vis_of(list.entries[a].item);
      const int vb = vis_of(list.entries[b].item);
      if (va != vb) return va < vb;
      return a < b;
    });
    // If candidates overlap the surviving prefix there may be fewer
    // appendable items than drops; shrink the drop count until they match
    // so the list keeps its length.
    size_t d = m;
    std::vector<char> dropped(prefix_len, 0);
    std::vector<std::string> appendable;
    for (;;) {
      std::fill(dropped.begin(), dropped.end(), 0);
      for (size_t j = 0; j < d; ++j) dropped[by_vis[prefix_len - 1 - j]] = 1;
      std::unordered_set<std::string> surviving;
      for (size_t j = 0; j < prefix_len; ++j) {
        if (!dropped[j]) surviving.insert(list.entries[j].item);
      }
      appendable.clear();
      for (const std::string& c : cand) {
        if (appendable.size() == d) break;
        if (!surviving.count(c)) appendable.push_back(c);
      }
      if (appendable.size() == d) break;
      d = appendable.size();
    }
    RecList rebuilt;
    rebuilt.user = list.user;
    for (size_t j = 0; j < prefix_len; ++j) {
      if (!dropped[j]) rebuilt.entries.push_back(list.entries[j]);
    }
    // Appended candidates carry their long-list score; order is the rerank
    // order (ascending visibility), not score order.
    std::unordered_map<std::string, double> long_score;
    for (const RecEntry& e : list.entries) long_score.emplace(e.item, e.score);
    for (const std::string& c : appendable) {
      auto it = long_score.find(c);
      rebuilt.entries.push_back({c, it == long_score.end() ? 0.0 : it->second});
    }
    out.lists.push_back(std::move(rebuilt));
  }
  return out;
}

RecBatch fairmatch_rerank(const RecBatch& batch, const SupplierMap* suppliers,
                          const FairMatchConfig& config) {
  return reconstruct_lists(batch, fairmatch_iterate(batch, suppliers, config),
                           config);
}

}  // namespace fairex
