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

#include "fairex/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "fairex/error.hpp"
#include "fairex/metrics.hpp"
#include "fairex/numfmt.hpp"

namespace fairex {

namespace {

constexpr double kGenreSmoothing = 0.01;

void validate(const SimConfig& config) {
  if (config.iterations < 1) throw DomainError("iterations must be >= 1");
  if (config.list_size < 1) throw DomainError("list size must be >= 1");
  if (!(config.accept_exponent < 0.0)) {
    throw DomainError("acceptance exponent must be negative");
  }
  if (!(config.rating_min < config.rating_max)) {
    throw DomainError("rating scale must satisfy min < max");
  }
}

ModelParams train_model(const Dataset& train, const SimConfig& config,
                        uint64_t seed) {
  switch (config.algorithm) {
    case Algorithm::mostpopular:
      return train_mostpopular(train);
    case Algorithm::userknn:
      return train_userknn(train, config.neighbors, config.similarity);
    case Algorithm::itemknn:
      return train_itemknn(train, config.neighbors, config.similarity);
    case Algorithm::biasedmf:
      return train_biasedmf(train, config.factors, config.epochs,
                            config.learn_rate, config.regularization, seed);
  }
  throw DomainError("unknown algorithm");
}

// pop_t(i) = interaction count of i in `data` / |U|, as a map over items.
std::unordered_map<std::string, double> popularity_of(const Dataset& data) {
  std::unordered_map<std::string, double> pop;
  for (const Interaction& x : data.interactions) pop[x.item] += 1.0;
  const double users = double(data.user_count());
  for (auto& [_, v] : pop) v /= users;
  return pop;
}

double mean_interaction_pop(
    const std::vector<Interaction>& interactions,
    const std::unordered_map<std::string, double>& pop) {
  if (interactions.empty()) return 0.0;
  double sum = 0.0;
  for (const Interaction& x : interactions) {
    auto it = pop.find(x.item);
    if (it != pop.end()) sum += it->second;
  }
  return sum / double(interactions.size());
}

// Genre distribution of each user's profile in `data`.
std::map<std::string, Distribution> user_genre_profiles(
    const Dataset& data, const GenreMap& genres) {
  std::unordered_map<std::string, std::vector<std::string>> items;
  for (const Interaction& x : data.interactions) {
    items[x.user].push_back(x.item);
  }
  std::map<std::string, Distribution> out;
  for (const auto& [user, profile] : items) {
    out[user] = genre_distribution(profile, genres);
  }
  return out;
}

Distribution group_genre_profile(const Dataset& data, const GenreMap& genres,
                                 const GroupAssignment& groups,
                                 const std::string& label) {
  std::vector<std::string> items;
  for (const Interaction& x : data.interactions) {
    auto it = groups.label_of.find(x.user);
    if (it != groups.label_of.end() && it->second == label) {
      items.push_back(x.item);
    }
  }
  return genre_distribution(items, genres);
}

}  // namespace

std::vector<double> acceptance_probabilities(int n, double alpha) {
  if (n < 1) throw DomainError("list must be non-empty");
  if (!(alpha < 0.0)) throw DomainError("acceptance exponent must be negative");
  std::vector<double> probs(static_cast<size_t>(n), 0.0);
  double total = 0.0;
  for (int k = 1; k <= n; ++k) {
    probs[size_t(k - 1)] = std::exp(alpha * double(k));
    total += probs[size_t(k - 1)];
  }
  for (double& p : probs) p /= total;
  return probs;
}

int acceptance_select(const RecList& list, double alpha, Rng& rng) {
  const auto probs = acceptance_probabilities(int(list.entries.size()), alpha);
  const double draw = rng.uniform_real();
  double cumulative = 0.0;
  for (size_t k = 0; k < probs.size(); ++k) {
    cumulative += probs[k];
    if (draw < cumulative) return int(k);
  }
  return int(probs.size()) - 1;  // guard against rounding at draw ~ 1
}

double estimate_rating_omega(double user_mean, double user_sd,
                             double item_mean, double eta) {
  return user_mean + user_sd * item_mean + eta;
}

double clamp_rating(double omega, double lo, double hi) {
  return std::max(std::min(std::round(omega), hi), lo);
}

EstimatedRating estimate_rating(const std::string& user,
                                const std::string& item, const Dataset& data,
                                Rng& rng, double lo, double hi) {
  if (data.interactions.empty()) throw DomainError("empty dataset");
  double user_sum = 0.0, user_sq = 0.0, item_sum = 0.0, global_sum = 0.0;
  int64_t user_n = 0, item_n = 0;
  for (const Interaction& x : data.interactions) {
    global_sum += x.rating;
    if (x.user == user) {
      user_sum += x.rating;
      user_sq += x.rating * x.rating;
      ++user_n;
    }
    if (x.item == item) {
      item_sum += x.rating;
      ++item_n;
    }
  }
  if (user_n == 0 || item_n == 0) {
    const double global_mean = global_sum / double(data.interactions.size());
    return {clamp_rating(global_mean, lo, hi), true};
  }
  const double user_mean = user_sum / double(user_n);
  const double variance =
      std::max(0.0, user_sq / double(user_n) - user_mean * user_mean);
  const double omega = estimate_rating_omega(
      user_mean, std::sqrt(variance), item_sum / double(item_n), rng.normal());
  return {clamp_rating(omega, lo, hi), false};
}

IterationLog run_feedback_loop(const Dataset& source, const GenreMap& genres,
                               const GroupAssignment& groups,
                               const SimConfig& config) {
  validate(config);
  if (source.interactions.empty()) throw DomainError("empty dataset");

  // Baselines for the taste-shift and homogenization trajectories.
  const std::map<std::string, Distribution> initial_profiles =
      user_genre_profiles(source, genres);
  std::vector<std::string> initial_items;
  initial_items.reserve(source.interactions.size());
  for (const Interaction& x : source.interactions) {
    initial_items.push_back(x.item);
  }
  const Distribution initial_population =
      genre_distribution(initial_items, genres);

  bool has_both_groups = false;
  {
    bool unprot = false, prot = false;
    for (const Interaction& x : source.interactions) {
      auto it = groups.label_of.find(x.user);
      if (it == groups.label_of.end()) continue;
      unprot = unprot || it->second == "unprotected";
      prot = prot || it->second == "protected";
    }
    has_both_groups = unprot && prot;
  }

  IterationLog log;
  Dataset current = source;
  for (int t = 1; t <= config.iterations; ++t) {
    IterationRecord rec;
    rec.t = t;
    rec.dataset_size = int64_t(current.interactions.size());

    SplitPair split;
    ModelParams model;
    RecBatch batch;
    try {
      split = split_holdout(current, 0.2,
                            derive_seed(config.seed,
                                        {seed_stream::kSplit, uint64_t(t)}));
      model = train_model(split.train, config,
                          derive_seed(config.seed,
                                      {seed_stream::kModel, uint64_t(t)}));
      batch = recommend_batch(model, split.train, config.list_size,
                              config.threads);
    } catch (const Error& e) {
      throw Error("iteration " + std::to_string(t) + ": " + e.what());
    }

    const auto pop = popularity_of(current);
    rec.mean_train_pop = mean_interaction_pop(current.interactions, pop);
    {
      double sum = 0.0;
      int64_t entries = 0;
      for (const RecList& list : batch.lists) {
        for (const RecEntry& e : list.entries) {
          auto it = pop.find(e.item);
          if (it != pop.end()) sum += it->second;
          ++entries;
        }
      }
      rec.mean_rec_pop = entries ? sum / double(entries) : 0.0;
    }
    rec.theta = rec.mean_rec_pop - rec.mean_train_pop;
    rec.one_ia =
        aggregate_diversity(batch, current.items, 1, Scope::item, nullptr);

    // Acceptance pass: every user picks one recommended item; the pair is
    // appended only when it is new to the profile.
    std::unordered_map<std::string, std::unordered_set<std::string>> profiles;
    for (const Interaction& x : current.interactions) {
      profiles[x.user].insert(x.item);
    }
    std::vector<Interaction> appended;
    for (const RecList& list : batch.lists) {
      if (list.entries.empty()) continue;
      const int user_ord = current.user_ordinal(list.user);
      Rng rng(derive_seed(config.seed, {seed_stream::kAcceptance, uint64_t(t),
                                        uint64_t(user_ord)}));
      const int pick = acceptance_select(list, config.accept_exponent, rng);
      const std::string& item = list.entries[size_t(pick)].item;
      const EstimatedRating estimate = estimate_rating(
          list.user, item, current, rng, config.rating_min, config.rating_max);
      if (!profiles[list.user].count(item)) {
        appended.push_back({list.user, item, estimate.rating, std::nullopt});
      }
    }
    rec.accepted = int64_t(appended.size());

    std::vector<Interaction> next = current.interactions;
    next.insert(next.end(), appended.begin(), appended.end());
    rec.predicted_increment =
        double(rec.accepted) * rec.theta /
        (double(rec.dataset_size) + double(rec.accepted));
    rec.realized_increment =
        mean_interaction_pop(next, pop) - rec.mean_train_pop;

    // Trajectory KLDs on the pre-append data D^t.
    const auto profiles_now = user_genre_profiles(current, genres);
    double shift_sum = 0.0;
    for (const auto& [user, dist] : profiles_now) {
      auto it = initial_profiles.find(user);
      if (it == initial_profiles.end()) continue;
      const double v = kld(it->second, dist, kGenreSmoothing);
      rec.taste_shift[user] = v;
      shift_sum += v;
    }
    rec.taste_shift_mean =
        rec.taste_shift.empty() ? 0.0
                                : shift_sum / double(rec.taste_shift.size());
    if (has_both_groups) {
      const Distribution unprot =
          group_genre_profile(current, genres, groups, "unprotected");
      const Distribution prot =
          group_genre_profile(current, genres, groups, "protected");
      rec.intergroup_kld = kld(unprot, prot, kGenreSmoothing);
      rec.group_vs_initial["unprotected"] =
          kld(initial_population, unprot, kGenreSmoothing);
      rec.group_vs_initial["protected"] =
          kld(initial_population, prot, kGenreSmoothing);
    }
    log.records.push_back(std::move(rec));

    current = make_dataset(std::move(next), current.rating_scale);
  }
  return log;
}

std::vector<AmplificationPoint> amplification_curve(const IterationLog& log) {
  std::vector<AmplificationPoint> curve;
  curve.reserve(log.records.size());
  for (const IterationRecord& rec : log.records) {
    curve.push_back({rec.t, rec.mean_train_pop, rec.mean_rec_pop, rec.theta,
                     rec.predicted_increment, rec.realized_increment});
  }
  return curve;
}

std::string iteration_log_to_tsv(const IterationLog& log) {
  std::string out =
      "t\tdataset_size\tmean_train_pop\tmean_rec_pop\ttheta\tone_ia\t"
      "accepted\tpredicted_increment\trealized_increment\ttaste_shift_mean\t"
      "intergroup_kld\tkld_initial_vs_unprotected\tkld_initial_vs_protected\n";
  for (const IterationRecord& rec : log.records) {
    out += std::to_string(rec.t);
    out += '\t';
    out += std::to_string(rec.dataset_size);
    for (double v : {rec.mean_train_pop, rec.mean_rec_pop, rec.theta,
                     rec.one_ia}) {
      out += '\t';
      out += format_fixed(v, 6);
    }
    out += '\t';
    out += std::to_string(rec.accepted);
    for (double v : {rec.predicted_increment, rec.realized_increment,
                     rec.taste_shift_mean}) {
      out += '\t';
      out += format_fixed(v, 6);
    }
    out += '\t';
    if (rec.intergroup_kld) out += format_fixed(*rec.intergroup_kld, 6);
    for (const char* label : {"unprotected", "protected"}) {
      out += '\t';
      auto it = rec.group_vs_initial.find(label);
      if (it != rec.group_vs_initial.end()) out += format_fixed(it->second, 6);
    }
    out += '\n';
  }
  return out;
}

}  // namespace fairex
