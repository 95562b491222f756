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

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairex/dataset.hpp"
#include "fairex/recommend.hpp"

namespace fairex {

struct FairMatchConfig {
  enum class Variant { item, supplier };
  Variant variant = Variant::item;
  double lambda = 0.5;       // relevance/visibility trade-off, in [0, 1]
  double beta = 0.5;         // replaced fraction of the final list, in (0, 1]
  int long_list_size = 50;   // t
  int final_size = 10;       // n, must be < t
};

// Bipartite recommendation graph with source/sink and push-relabel state.
// Node numbering: 0 = source, 1..L = left (items), L+1..L+R = right (users),
// L+R+1 = sink.
struct FlowNetwork {
  struct Edge {
    int to = 0;
    long long cap = 0;
    long long flow = 0;
    int rev = 0;  // index of the reverse edge in adj[to]
  };
  struct MiddleEdge {
    int left = 0;       // left position
    int right = 0;      // right position
    int rank = 0;       // 1-based rank of the item in the user's long list
    int adj_index = 0;  // index of the forward edge in adj[left_node(left)]
  };

  std::vector<std::string> left_items;   // left position -> item id
  std::vector<std::string> right_users;  // right position -> user id
  std::vector<std::vector<Edge>> adj;
  std::vector<MiddleEdge> middle;
  std::vector<int> label;
  std::vector<long long> excess;

  int left_count() const { return static_cast<int>(left_items.size()); }
  int right_count() const { return static_cast<int>(right_users.size()); }
  int node_count() const { return left_count() + right_count() + 2; }
  int source() const { return 0; }
  int sink() const { return node_count() - 1; }
  int left_node(int pos) const { return 1 + pos; }
  int right_node(int pos) const { return 1 + left_count() + pos; }

  // Adds a forward edge and its zero-capacity reverse.
  void add_edge(int from, int to, long long cap);
};

// Items and users harvested across FairMatch iterations.
struct CandidateSet {
  // (item, user) pairs, each one an edge of the original graph.
  std::vector<std::pair<std::string, std::string>> pairs;
  // Long-list visibility (number of long lists containing the item) for
  // every item of the originating batch.
  std::unordered_map<std::string, int> visibility;
};

// Number of long lists containing each item of the batch.
std::unordered_map<std::string, int> item_visibility(const RecBatch& batch);

// Deterministic item ordering for graph construction and tie-breaks:
// first appearance scanning lists in batch order, each list top-down.
std::unordered_map<std::string, int> batch_item_ordinal(const RecBatch& batch);

// Builds the bipartite graph of a batch: one left node per distinct
// recommended item, one right node per user with a non-empty list, a middle
// edge per (item in L_u, u), and terminal edges with capacities unset.
// Throws DomainError on a batch with no entries.
FlowNetwork build_graph(const RecBatch& batch);

// Capacity arithmetic shared by compute_weights:
// C_eq(I) = ceil(C_T/|I|), C_eq(U) = ceil(C_T/|U|), g = gcd of the two,
// source cap = min(C_eq(I), C_eq(U))/g, sink-side cap = C_eq(I)/g.
struct TerminalCaps {
  long long c_eq_left = 0;
  long long c_eq_right = 0;
  long long source_cap = 0;
  long long sink_cap = 0;
};
TerminalCaps terminal_capacities(long long c_t, int left_count,
                                 int right_count);

// Sets every capacity of `net`. Middle edge (i, u) weight is
// lambda * rank_iu + (1 - lambda) * vis, with vis the item degree (item
// variant) or the degree sum over the item's supplier siblings (supplier
// variant), min-max normalized to [1, t]; weights round up to integers.
// Terminal capacities follow terminal_capacities over C_T = sum of middle
// capacities. The supplier variant requires `suppliers`.
void compute_weights(FlowNetwork& net, const SupplierMap* suppliers,
                     const FairMatchConfig& config);

// FIFO push-relabel. Initial labels: source = |I|+|U|+2, left nodes 2,
// right nodes 1, sink 0, with a saturating push on every source edge.
// Returns the max-flow value; final labels and excess stay on the network.
long long push_relabel_max_flow(FlowNetwork& net);

// Left positions whose final label is >= |I|+|U|+2: nodes that returned
// excess toward the source, i.e. low visibility and high relevance.
std::vector<int> select_candidates(const FlowNetwork& net);

// Runs {compute_weights -> push_relabel -> select_candidates} rounds,
// removing each harvested subgraph (selected left nodes, their edges, and
// right nodes left isolated) until a round harvests nothing.
CandidateSet fairmatch_iterate(const RecBatch& batch,
                               const SupplierMap* suppliers,
                               const FairMatchConfig& config);

// Rebuilds final lists of size n: from the top-n prefix of each long list,
// the m = min(floor(beta*n), |I_C(u)|, n) most-visible items are replaced by
// the user's least-visible harvested candidates. Surviving prefix keeps its
// relevance order; appended candidates follow in ascending visibility. When
// appendable candidates run short (already present in the surviving prefix),
// fewer items are dropped so the list keeps its size.
RecBatch reconstruct_lists(const RecBatch& batch,
                           const CandidateSet& candidates,
                           const FairMatchConfig& config);

// fairmatch_iterate + reconstruct_lists.
RecBatch fairmatch_rerank(const RecBatch& batch, const SupplierMap* suppliers,
                          const FairMatchConfig& config);

}  // namespace fairex
