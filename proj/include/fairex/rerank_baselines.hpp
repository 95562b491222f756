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

#include "fairex/recommend.hpp"

namespace fairex {

// Plain truncation to the top-n prefix of each long list.
RecBatch rerank_topn(const RecBatch& batch, int n);

// Extreme-case baseline: the last n entries of each long list, reversed, so
// the least relevant entry leads. Entry scores are carried unchanged; order
// is the rerank order.
RecBatch rerank_reverse(const RecBatch& batch, int n);

// Extreme-case baseline: n entries sampled without replacement from each
// long list, using a generator seeded by (seed, user ordinal) where the
// ordinal is the list's position in the batch.
RecBatch rerank_random(const RecBatch& batch, int n, uint64_t seed);

}  // namespace fairex
