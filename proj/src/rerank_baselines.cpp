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

#include "fairex/rerank_baselines.hpp"

#include <algorithm>
#include <numeric>

#include "fairex/error.hpp"
#include "fairex/rng.hpp"

namespace fairex {

RecBatch rerank_topn(const RecBatch& batch, int n) {
  if (n < 1) throw DomainError("rerank size must be >= 1");
  RecBatch out;
  out.list_size = n;
  for (const RecList& list : batch.lists) {
    RecList cut;
    cut.user = list.user;
    const size_t take = std::min(size_t(n), list.entries.size());
    cut.entries.assign(list.entries.begin(),
                       list.entries.begin() + long(take));
    out.lists.push_back(std::move(cut));
  }
  return out;
}

RecBatch rerank_reverse(const RecBatch& batch, int n) {
  if (n < 1) throw DomainError("rerank size must be >= 1");
  RecBatch out;
  out.list_size = n;
  for (const RecList& list : batch.lists) {
    RecList rev;
    rev.user = list.user;
    const size_t take = std::min(size_t(n), list.entries.size());
    rev.entries.assign(list.entries.end() - long(take), list.entries.end());
    std::reverse(rev.entries.begin(), rev.entries.end());
    out.lists.push_back(std::move(rev));
  }
  return out;
}

RecBatch rerank_random(const RecBatch& batch, int n, uint64_t seed) {
  if (n < 1) throw DomainError("rerank size must be >= 1");
  RecBatch out;
  out.list_size = n;
  for (size_t u = 0; u < batch.lists.size(); ++u) {
    const RecList& list = batch.lists[u];
    std::vector<size_t> order(list.entries.size());
    std::iota(order.begin(), order.end(), size_t(0));
    Rng rng(derive_seed(seed, {seed_stream::kRerank, uint64_t(u)}));
    rng.shuffle(order);
    RecList picked;
    picked.user = list.user;
    const size_t take = std::min(size_t(n), list.entries.size());
    for (size_t j = 0; j < take; ++j) {
      picked.entries.push_back(list.entries[order[j]]);
    }
    out.lists.push_back(std::move(picked));
  }
  return out;
}

}  // namespace fairex
