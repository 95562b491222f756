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

#include "fairex/recommend.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "fairex/error.hpp"
#include "fairex/numfmt.hpp"
#include "fairex/rng.hpp"

namespace fairex {

namespace {

// (other-ordinal, rating) lists per axis ordinal, sorted by other-ordinal.
std::vector<std::vector<std::pair<int, double>>> rating_lists(
    const Dataset& train, bool by_user) {
  const size_t buckets =
      by_user ? size_t(train.user_count()) : size_t(train.item_count());
  std::vector<std::vector<std::pair<int, double>>> out(buckets);
  for (const Interaction& x : train.interactions) {
    const int u = train.user_index.at(x.user);
    const int i = train.item_index.at(x.item);
    if (by_user) {
      out[size_t(u)].emplace_back(i, x.rating);
    } else {
      out[size_t(i)].emplace_back(u, x.rating);
    }
  }
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

double lookup_rating(const std::vector<std::pair<int, double>>& sorted,
                     int ordinal, bool* found) {
  auto it = std::lower_bound(
      sorted.begin(), sorted.end(), ordinal,
      [](const std::pair<int, double>& e, int o) { return e.first < o; });
  if (it != sorted.end() && it->first == ordinal) {
    *found = true;
    return it->second;
  }
  *found = false;
  return 0.0;
}

double profile_mean(const std::vector<std::pair<int, double>>& profile) {
  if (profile.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [_, r] : profile) s += r;
  return s / double(profile.size());
}

// Similarity between two axis profiles over their co-rated set. Fewer than
// 2 co-rated entries, or a zero denominator, gives 0.
double pair_similarity(const std::vector<std::pair<int, double>>& a,
                       const std::vector<std::pair<int, double>>& b,
                       double mean_a, double mean_b, Similarity kind) {
  size_t ia = 0, ib = 0;
  int co = 0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia].first < b[ib].first) {
      ++ia;
    } else if (a[ia].first > b[ib].first) {
      ++ib;
    } else {
      const double ra = a[ia].second;
      const double rb = b[ib].second;
      ++co;
      if (kind == Similarity::pearson) {
        dot += (ra - mean_a) * (rb - mean_b);
        na += (ra - mean_a) * (ra - mean_a);
        nb += (rb - mean_b) * (rb - mean_b);
      } else {
        dot += ra * rb;
        na += ra * ra;
        nb += rb * rb;
      }
      ++ia;
      ++ib;
    }
  }
  if (co < 2) return 0.0;
  const double denom = std::sqrt(na) * std::sqrt(nb);
  if (denom == 0.0) return 0.0;
  return dot / denom;
}

// Shared KNN trainer; axis profiles are user profiles for userknn and item
// profiles for itemknn.
ModelParams train_knn(const Dataset& train, int k, Similarity similarity,
                      Algorithm algorithm) {
  if (k < 1) throw DomainError("k must be >= 1");
  ModelParams model;
  model.algorithm = algorithm;
  model.k = k;
  model.similarity = similarity;
  model.ratings_by_user = rating_lists(train, true);
  model.ratings_by_item = rating_lists(train, false);
  const auto& axis = algorithm == Algorithm::userknn ? model.ratings_by_user
                                                     : model.ratings_by_item;
  const size_t n = axis.size();
  model.axis_means.resize(n);
  for (size_t a = 0; a < n; ++a) model.axis_means[a] = profile_mean(axis[a]);
  model.neighbors.assign(n, {});
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = a + 1; b < n; ++b) {
      const double sim = pair_similarity(axis[a], axis[b], model.axis_means[a],
                                         model.axis_means[b], similarity);
      if (sim > 0.0) {
        model.neighbors[a].emplace_back(int(b), sim);
        model.neighbors[b].emplace_back(int(a), sim);
      }
    }
  }
  for (auto& nb : model.neighbors) {
    std::sort(nb.begin(), nb.end(),
              [](const std::pair<int, double>& x,
                 const std::pair<int, double>& y) {
                if (x.second != y.second) return x.second > y.second;
                return x.first < y.first;
              });
  }
  double total = 0.0;
  for (const Interaction& x : train.interactions) total += x.rating;
  model.global_mean =
      train.interactions.empty() ? 0.0
                                 : total / double(train.interactions.size());
  return model;
}

Prediction predict_knn(const ModelParams& model, int axis_ord,
                       int target_ord) {
  // userknn: axis = user, target = item; itemknn: the transpose.
  const auto& target_raters = model.algorithm == Algorithm::userknn
                                  ? model.ratings_by_item
                                  : model.ratings_by_user;
  Prediction out;
  if (axis_ord < 0) {
    out.score = model.global_mean;
    out.no_neighbor = true;
    return out;
  }
  const double base = model.axis_means[size_t(axis_ord)];
  double num = 0.0, den = 0.0;
  int used = 0;
  if (target_ord >= 0) {
    const auto& raters = target_raters[size_t(target_ord)];
    for (const auto& [v, sim] : model.neighbors[size_t(axis_ord)]) {
      if (used == model.k) break;
      bool found = false;
      const double r = lookup_rating(raters, v, &found);
      if (!found) continue;
      num += (r - model.axis_means[size_t(v)]) * sim;
      den += sim;
      ++used;
    }
  }
  if (used == 0) {
    out.score = base;
    out.no_neighbor = true;
    return out;
  }
  out.score = base + num / den;
  return out;
}

}  // namespace

int RecBatch::find(const std::string& user) const {
  for (int i = 0; i < int(lists.size()); ++i) {
    if (lists[size_t(i)].user == user) return i;
  }
  return -1;
}

ModelParams train_mostpopular(const Dataset& train) {
  if (train.interactions.empty()) {
    throw DomainError("mostpopular on an empty dataset");
  }
  ModelParams model;
  model.algorithm = Algorithm::mostpopular;
  model.item_counts.assign(size_t(train.item_count()), 0.0);
  for (const Interaction& x : train.interactions) {
    model.item_counts[size_t(train.item_index.at(x.item))] += 1.0;
  }
  return model;
}

ModelParams train_userknn(const Dataset& train, int k, Similarity similarity) {
  return train_knn(train, k, similarity, Algorithm::userknn);
}

ModelParams train_itemknn(const Dataset& train, int k, Similarity similarity) {
  return train_knn(train, k, similarity, Algorithm::itemknn);
}

ModelParams train_biasedmf(const Dataset& train, int factors, int epochs,
                           double learn_rate, double reg, uint64_t seed) {
  if (factors < 1) throw DomainError("factors must be >= 1");
  if (!(learn_rate > 0.0) || !(reg > 0.0) || epochs < 0) {
    throw DomainError("biasedmf hyperparameters must be positive");
  }
  ModelParams model;
  model.algorithm = Algorithm::biasedmf;
  model.factors = factors;
  const size_t nu = size_t(train.user_count());
  const size_t ni = size_t(train.item_count());
  double total = 0.0;
  for (const Interaction& x : train.interactions) total += x.rating;
  model.mu = train.interactions.empty()
                 ? 0.0
                 : total / double(train.interactions.size());
  model.global_mean = model.mu;
  model.bu.assign(nu, 0.0);
  model.bi.assign(ni, 0.0);
  model.P.assign(nu, std::vector<double>(size_t(factors), 0.0));
  model.Q.assign(ni, std::vector<double>(size_t(factors), 0.0));
  Rng init(derive_seed(seed, {0}));
  for (auto& row : model.P) {
    for (double& v : row) v = init.uniform_real(-0.01, 0.01);
  }
  for (auto& row : model.Q) {
    for (double& v : row) v = init.uniform_real(-0.01, 0.01);
  }
  std::vector<int> user_ord(train.interactions.size());
  std::vector<int> item_ord(train.interactions.size());
  for (size_t idx = 0; idx < train.interactions.size(); ++idx) {
    user_ord[idx] = train.user_index.at(train.interactions[idx].user);
    item_ord[idx] = train.item_index.at(train.interactions[idx].item);
  }
  std::vector<int> visit(train.interactions.size());
  std::iota(visit.begin(), visit.end(), 0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng perm(derive_seed(seed, {1, uint64_t(epoch)}));
    perm.shuffle(visit);
    for (int idx : visit) {
      const size_t u = size_t(user_ord[size_t(idx)]);
      const size_t i = size_t(item_ord[size_t(idx)]);
      std::vector<double>& p = model.P[u];
      std::vector<double>& q = model.Q[i];
      double pred = model.mu + model.bu[u] + model.bi[i];
      for (int f = 0; f < factors; ++f) pred += p[size_t(f)] * q[size_t(f)];
      const double e = train.interactions[size_t(idx)].rating - pred;
      model.bu[u] += learn_rate * (e - reg * model.bu[u]);
      model.bi[i] += learn_rate * (e - reg * model.bi[i]);
      for (int f = 0; f < factors; ++f) {
        const double pf = p[size_t(f)];
        const double qf = q[size_t(f)];
        p[size_t(f)] += learn_rate * (e * qf - reg * pf);
        q[size_t(f)] += learn_rate * (e * pf - reg * qf);
      }
    }
    const double loss = biasedmf_loss(model, train, reg);
    if (!std::isfinite(loss)) {
      throw DivergenceError("biasedmf diverged at epoch " +
                            std::to_string(epoch));
    }
  }
  return model;
}

double biasedmf_loss(const ModelParams& model, const Dataset& train,
                     double reg) {
  double loss = 0.0;
  for (const Interaction& x : train.interactions) {
    const size_t u = size_t(train.user_index.at(x.user));
    const size_t i = size_t(train.item_index.at(x.item));
    double pred = model.mu + model.bu[u] + model.bi[i];
    double pn = 0.0, qn = 0.0;
    for (int f = 0; f < model.factors; ++f) {
      pred += model.P[u][size_t(f)] * model.Q[i][size_t(f)];
      pn += model.P[u][size_t(f)] * model.P[u][size_t(f)];
      qn += model.Q[i][size_t(f)] * model.Q[i][size_t(f)];
    }
    const double e = x.rating - pred;
    loss += e * e;
    loss += reg * (model.bu[u] * model.bu[u] + model.bi[i] * model.bi[i] +
                   pn + qn);
  }
  return loss;
}

BiasedMfGradient biasedmf_gradient(const ModelParams& model,
                                   const Dataset& train, double reg) {
  BiasedMfGradient g;
  g.bu.assign(model.bu.size(), 0.0);
  g.bi.assign(model.bi.size(), 0.0);
  g.P.assign(model.P.size(),
             std::vector<double>(size_t(model.factors), 0.0));
  g.Q.assign(model.Q.size(),
             std::vector<double>(size_t(model.factors), 0.0));
  for (const Interaction& x : train.interactions) {
    const size_t u = size_t(train.user_index.at(x.user));
    const size_t i = size_t(train.item_index.at(x.item));
    double pred = model.mu + model.bu[u] + model.bi[i];
    for (int f = 0; f < model.factors; ++f) {
      pred += model.P[u][size_t(f)] * model.Q[i][size_t(f)];
    }
    const double e = x.rating - pred;
    g.bu[u] += -2.0 * e + 2.0 * reg * model.bu[u];
    g.bi[i] += -2.0 * e + 2.0 * reg * model.bi[i];
    for (int f = 0; f < model.factors; ++f) {
      g.P[u][size_t(f)] += -2.0 * e * model.Q[i][size_t(f)] +
                           2.0 * reg * model.P[u][size_t(f)];
      g.Q[i][size_t(f)] += -2.0 * e * model.P[u][size_t(f)] +
                           2.0 * reg * model.Q[i][size_t(f)];
    }
  }
  return g;
}

Prediction predict(const ModelParams& model, const Dataset& train,
                   int user_ord, int item_ord) {
  (void)train;
  Prediction out;
  switch (model.algorithm) {
    case Algorithm::mostpopular:
      out.score = item_ord >= 0 ? model.item_counts[size_t(item_ord)] : 0.0;
      return out;
    case Algorithm::userknn:
      return predict_knn(model, user_ord, item_ord);
    case Algorithm::itemknn:
      return predict_knn(model, item_ord, user_ord);
    case Algorithm::biasedmf: {
      double s = model.mu;
      if (user_ord >= 0) s += model.bu[size_t(user_ord)];
      if (item_ord >= 0) s += model.bi[size_t(item_ord)];
      if (user_ord >= 0 && item_ord >= 0) {
        for (int f = 0; f < model.factors; ++f) {
          s += model.P[size_t(user_ord)][size_t(f)] *
               model.Q[size_t(item_ord)][size_t(f)];
        }
      }
      out.score = s;
      return out;
    }
  }
  throw DomainError("unknown algorithm");
}

double predict_clamped(const ModelParams& model, const Dataset& train,
                       const std::string& user, const std::string& item) {
  const Prediction p =
      predict(model, train, train.user_ordinal(user), train.item_ordinal(item));
  return std::clamp(p.score, train.rating_scale.first,
                    train.rating_scale.second);
}

RecList recommend_topk(const ModelParams& model, const Dataset& train,
                       const std::string& user, int t) {
  const int u = train.user_ordinal(user);
  if (u < 0) throw DomainError("unknown user: " + user);
  std::vector<char> seen(size_t(train.item_count()), 0);
  for (const Interaction& x : train.interactions) {
    if (train.user_index.at(x.user) == u) {
      seen[size_t(train.item_index.at(x.item))] = 1;
    }
  }
  std::vector<std::pair<double, int>> scored;  // (score, item ordinal)
  scored.reserve(size_t(train.item_count()));
  for (int i = 0; i < train.item_count(); ++i) {
    if (seen[size_t(i)]) continue;
    scored.emplace_back(predict(model, train, u, i).score, i);
  }
  std::sort(scored.begin(), scored.end(),
            [](const std::pair<double, int>& a,
               const std::pair<double, int>& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  RecList list;
  list.user = user;
  const size_t take = std::min(size_t(t), scored.size());
  list.entries.reserve(take);
  for (size_t j = 0; j < take; ++j) {
    list.entries.push_back(
        {train.items[size_t(scored[j].second)], scored[j].first});
  }
  return list;
}

RecBatch recommend_batch(const ModelParams& model, const Dataset& train,
                         int t, int threads) {
  RecBatch batch;
  batch.list_size = t;
  const int nu = train.user_count();
  batch.lists.resize(size_t(nu));
  // Per-user seen sets come from one pass instead of recommend_topk's
  // per-user scan; scoring itself is pure so any schedule gives identical
  // output, assembled by user ordinal.
  const std::vector<std::vector<int>> profiles = train.by_user();
  auto score_user = [&](int u) {
    std::vector<char> seen(size_t(train.item_count()), 0);
    for (int idx : profiles[size_t(u)]) {
      seen[size_t(train.item_index.at(train.interactions[size_t(idx)].item))] =
          1;
    }
    std::vector<std::pair<double, int>> scored;
    scored.reserve(size_t(train.item_count()));
    for (int i = 0; i < train.item_count(); ++i) {
      if (seen[size_t(i)]) continue;
      scored.emplace_back(predict(model, train, u, i).score, i);
    }
    std::sort(scored.begin(), scored.end(),
              [](const std::pair<double, int>& a,
                 const std::pair<double, int>& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    RecList list;
    list.user = train.users[size_t(u)];
    const size_t take = std::min(size_t(t), scored.size());
    for (size_t j = 0; j < take; ++j) {
      list.entries.push_back(
          {train.items[size_t(scored[j].second)], scored[j].first});
    }
    batch.lists[size_t(u)] = std::move(list);
  };
  const int workers = std::max(1, std::min(threads, nu));
  if (workers == 1) {
    for (int u = 0; u < nu; ++u) score_user(u);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const int u = next.fetch_add(1);
          if (u >= nu) return;
          score_user(u);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }
  return batch;
}

std::string recbatch_to_tsv(const RecBatch& batch) {
  std::string out;
  for (const RecList& list : batch.lists) {
    for (size_t j = 0; j < list.entries.size(); ++j) {
      out += list.user;
      out += '\t';
      out += list.entries[j].item;
      out += '\t';
      out += std::to_string(j + 1);
      out += '\t';
      out += format_fixed(list.entries[j].score, 6);
      out += '\n';
    }
  }
  return out;
}

void write_recbatch(const RecBatch& batch, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << recbatch_to_tsv(batch);
}

RecBatch load_recbatch(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  RecBatch batch;
  std::unordered_map<std::string, size_t> list_of;
  size_t start = 0;
  long long line_no = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      std::vector<std::string> cols;
      size_t s = 0;
      for (;;) {
        const size_t pos = line.find('\t', s);
        if (pos == std::string::npos) {
          cols.push_back(line.substr(s));
          break;
        }
        cols.push_back(line.substr(s, pos - s));
        s = pos + 1;
      }
      if (cols.size() != 4) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": expected `user<TAB>item<TAB>rank<TAB>score`");
      }
      const auto rank = parse_int(cols[2]);
      const auto score = parse_double(cols[3]);
      if (!rank || !score) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": unparseable rank or score");
      }
      auto [it, is_new] = list_of.try_emplace(cols[0], batch.lists.size());
      if (is_new) batch.lists.push_back({cols[0], {}});
      RecList& list = batch.lists[it->second];
      if (*rank != static_cast<long long>(list.entries.size()) + 1) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": rank " + cols[2] + " out of sequence for user " +
                         cols[0]);
      }
      list.entries.push_back({cols[1], *score});
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  for (const RecList& list : batch.lists) {
    batch.list_size =
        std::max(batch.list_size, static_cast<int>(list.entries.size()));
  }
  return batch;
}

}  // namespace fairex
