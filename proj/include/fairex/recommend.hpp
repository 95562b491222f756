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
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairex/dataset.hpp"

namespace fairex {

enum class Algorithm { mostpopular, userknn, itemknn, biasedmf };
enum class Similarity { pearson, cosine };

// One scored recommendation list, entries in descending score.
struct RecEntry {
  std::string item;
  double score = 0.0;
};

struct RecList {
  std::string user;
  std::vector<RecEntry> entries;
};

// Per-user lists, ordered by the producing dataset's user ordinals.
// list_size is the nominal size t; individual lists may be shorter when a
// user has fewer unseen items.
struct RecBatch {
  std::vector<RecList> lists;
  int list_size = 0;

  // Index of a user's list, -1 if absent.
  int find(const std::string& user) const;
};

// Learned state for all four baselines. Fields outside the active algorithm
// are left empty.
struct ModelParams {
  Algorithm algorithm = Algorithm::mostpopular;

  // mostpopular: train interaction count per item ordinal.
  std::vector<double> item_counts;

  // knn (shared by both axes; for itemknn "axis" reads as item).
  int k = 50;
  Similarity similarity = Similarity::cosine;
  // Per axis ordinal: positive-similarity neighbors sorted by descending
  // similarity, ties by ascending ordinal.
  std::vector<std::vector<std::pair<int, double>>> neighbors;
  std::vector<double> axis_means;  // full-profile mean per axis ordinal

  // Train ratings in lookup form: (other-ordinal, rating), sorted by ordinal.
  std::vector<std::vector<std::pair<int, double>>> ratings_by_user;
  std::vector<std::vector<std::pair<int, double>>> ratings_by_item;

  // biasedmf
  double mu = 0.0;
  std::vector<double> bu, bi;
  std::vector<std::vector<double>> P, Q;
  int factors = 0;
  double global_mean = 0.0;  // fallback for unseen identifiers
};

struct Prediction {
  double score = 0.0;
  // True when the score fell back to a profile mean because no
  // positive-similarity neighbor rated the target.
  bool no_neighbor = false;
};

// score(u, i) = train interaction count of i; user-independent.
ModelParams train_mostpopular(const Dataset& train);

// Neighborhood model: r^(u,i) = mean_u + sum over the top-k positive-
// similarity raters of i of (r_vi - mean_v) * sim(u,v) / sum sim(u,v).
// Similarities are computed over co-rated items; fewer than 2 co-rated
// items gives similarity 0.
ModelParams train_userknn(const Dataset& train, int k, Similarity similarity);

// Mirror of train_userknn with item neighborhoods:
// r^(u,i) = mean_i + sum over top-k similar items rated by u.
ModelParams train_itemknn(const Dataset& train, int k, Similarity similarity);

// Biased matrix factorization, r^ = mu + b_u + b_i + p_u . q_i, trained by
// SGD on squared error with L2 regularization. Factors initialize from a
// seeded uniform(-0.01, 0.01); each epoch visits interactions in a
// permutation derived from (seed, epoch). Throws DivergenceError naming the
// epoch if the running loss turns non-finite.
ModelParams train_biasedmf(const Dataset& train, int factors, int epochs,
                           double learn_rate, double reg, uint64_t seed);

// Full-batch objective used by the gradient check:
//   sum over observed (u,i) of (r - r^)^2
//   + reg * sum over observed (u,i) of (b_u^2 + b_i^2 + |p_u|^2 + |q_i|^2).
double biasedmf_loss(const ModelParams& model, const Dataset& train,
                     double reg);

struct BiasedMfGradient {
  std::vector<double> bu, bi;
  std::vector<std::vector<double>> P, Q;
};

// Analytic gradient of biasedmf_loss with respect to every learned
// parameter (mu is a constant, not a parameter).
BiasedMfGradient biasedmf_gradient(const ModelParams& model,
                                   const Dataset& train, double reg);

// Raw (unclamped) predicted score; ordinals may be -1 for unseen ids, in
// which case profile-mean or global-mean fallbacks apply.
Prediction predict(const ModelParams& model, const Dataset& train,
                   int user_ord, int item_ord);

// Prediction clamped to the train rating scale, for error metrics.
double predict_clamped(const ModelParams& model, const Dataset& train,
                       const std::string& user, const std::string& item);

// Top-t unseen items for one user by descending raw score, ties by
// ascending item ordinal. Shorter than t when unseen items run out.
RecList recommend_topk(const ModelParams& model, const Dataset& train,
                       const std::string& user, int t);

// Lists for every train user, in user-ordinal order. `threads` splits the
// per-user scoring; output is identical for any thread count.
RecBatch recommend_batch(const ModelParams& model, const Dataset& train,
                         int t, int threads = 1);

// RecBatch TSV: `user \t item \t rank \t score`, rank 1-based, score with 6
// decimals. Reading infers list_size as the longest list.
std::string recbatch_to_tsv(const RecBatch& batch);
void write_recbatch(const RecBatch& batch, const std::string& path);
RecBatch load_recbatch(const std::string& path);

}  // namespace fairex
