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
#include <string>
#include <vector>

#include "fairex/dataset.hpp"
#include "fairex/recommend.hpp"
#include "fairex/rng.hpp"

namespace fairex {

// Closed-loop simulation settings. Each iteration re-splits the current
// data 80/20, retrains the recommender, lets every user accept one
// recommended item, and appends the synthesized rating.
struct SimConfig {
  int iterations = 5;        // T >= 1
  int list_size = 10;        // n
  double accept_exponent = -0.1;  // alpha < 0, rank decay of acceptance
  Algorithm algorithm = Algorithm::mostpopular;
  Similarity similarity = Similarity::cosine;
  int neighbors = 50;        // knn
  int factors = 20;          // biasedmf
  int epochs = 20;
  double learn_rate = 0.005;
  double regularization = 0.02;
  uint64_t seed = 0;
  double rating_min = 1.0;   // clamp bounds for synthesized ratings
  double rating_max = 5.0;
  int threads = 1;
};

// One closed-loop round. Popularity is measured under the iteration-t
// counts: pop_t(i) = |interactions of i in D^t| / |U|. Optional fields stay
// empty when their inputs (group labels) are missing.
struct IterationRecord {
  int t = 0;
  int64_t dataset_size = 0;      // |D^t|
  double mean_train_pop = 0.0;   // mean of pop_t over D^t interactions
  double mean_rec_pop = 0.0;     // mean of pop_t over recommended entries
  double theta = 0.0;            // mean_rec_pop - mean_train_pop
  double one_ia = 0.0;           // share of catalog recommended at least once
  int64_t accepted = 0;          // K, interactions appended to D^{t+1}
  double predicted_increment = 0.0;  // K * theta / (|D^t| + K)
  // Realized shift of the same quantity the prediction models: the mean of
  // pop_t over D^{t+1} minus mean_train_pop. Keeping the iteration-t
  // popularity measure on both sides isolates what the acceptance step
  // added from the count inflation it caused.
  double realized_increment = 0.0;
  std::map<std::string, double> taste_shift;  // per user, KLD(initial||now)
  double taste_shift_mean = 0.0;
  std::optional<double> intergroup_kld;  // KLD(unprotected || protected)
  // KLD(initial population genre distribution || group profile at t).
  std::map<std::string, double> group_vs_initial;
};

struct IterationLog {
  std::vector<IterationRecord> records;  // indexed 1..T in order
};

// Normalized rank-decay acceptance weights for an n-item list:
// prob(rank k) = e^(alpha k) / sum_j e^(alpha j), k 1-based.
std::vector<double> acceptance_probabilities(int n, double alpha);

// Samples one entry index from `list` under acceptance_probabilities.
// Throws DomainError on an empty list or alpha >= 0.
int acceptance_select(const RecList& list, double alpha, Rng& rng);

struct EstimatedRating {
  double rating = 0.0;
  bool fallback = false;  // user or item unseen, used round(global mean)
};

// omega = mean(u's ratings) + sd(u's ratings) * mean(i's ratings) + eta with
// eta ~ N(0,1); population sd.
double estimate_rating_omega(double user_mean, double user_sd,
                             double item_mean, double eta);

// round(omega) clamped into [lo, hi].
double clamp_rating(double omega, double lo, double hi);

// Synthesized integer rating for (user, item) from the profile statistics in
// `data`. Unknown user or item falls back to round(global mean), flagged.
EstimatedRating estimate_rating(const std::string& user,
                                const std::string& item, const Dataset& data,
                                Rng& rng, double lo, double hi);

// Runs the closed loop for config.iterations rounds and logs one record per
// round. Genre KLDs smooth with alpha = 0.01; the taste-shift baseline is
// each user's D^1 profile, so every round-1 value is exactly 0. A training
// failure aborts with the iteration index in the message.
IterationLog run_feedback_loop(const Dataset& source, const GenreMap& genres,
                               const GroupAssignment& groups,
                               const SimConfig& config);

struct AmplificationPoint {
  int t = 0;
  double mean_train_pop = 0.0;
  double mean_rec_pop = 0.0;
  double theta = 0.0;
  double predicted_increment = 0.0;
  double realized_increment = 0.0;
};

// Popularity trajectory of a finished run, one point per iteration.
std::vector<AmplificationPoint> amplification_curve(const IterationLog& log);

// One row per iteration with a fixed header; optional cells print empty.
std::string iteration_log_to_tsv(const IterationLog& log);

}  // namespace fairex
