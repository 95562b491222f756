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

#include "fairex/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairex/dataset.hpp"
#include "fairex/error.hpp"
#include "fairex/fairmatch.hpp"
#include "fairex/metrics.hpp"
#include "fairex/numfmt.hpp"
#include "fairex/recommend.hpp"
#include "fairex/rerank_baselines.hpp"
#include "fairex/rng.hpp"
#include "fairex/sha256.hpp"
#include "fairex/simulate.hpp"
#include "fairex/transform.hpp"
#include "fairex/version.hpp"

namespace fairex {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kTrainFile = "train.tsv";
constexpr const char* kTestFile = "test.tsv";
constexpr const char* kTransformedFile = "train_transformed.tsv";
constexpr const char* kLonglistsFile = "longlists.tsv";
constexpr const char* kFinallistsFile = "finallists.tsv";
constexpr const char* kPredictionsFile = "predictions.tsv";
constexpr const char* kMetricsTsvFile = "metrics.tsv";
constexpr const char* kMetricsJsonFile = "metrics.json";
constexpr const char* kSimulationFile = "simulation.tsv";
constexpr const char* kLeaderboardFile = "leaderboard.tsv";

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string seed_text;  // empty = use the config value
  int threads = 1;
};

// ---------------------------------------------------------------------------
// JSON field access. Every failure is a ConfigError so it exits with 2.

const json& section(const json& config, const std::string& name) {
  static const json kEmpty = json::object();
  if (!config.contains(name)) return kEmpty;
  const json& s = config.at(name);
  if (!s.is_object()) throw ConfigError("field " + name + " must be an object");
  return s;
}

std::string req_string(const json& j, const std::string& field) {
  if (!j.contains(field)) throw ConfigError("missing field: " + field);
  const json& v = j.at(field);
  if (!v.is_string()) throw ConfigError("field " + field + " must be a string");
  return v.get<std::string>();
}

std::string opt_string(const json& j, const std::string& field,
                       const std::string& fallback) {
  if (!j.contains(field)) return fallback;
  const json& v = j.at(field);
  if (!v.is_string()) throw ConfigError("field " + field + " must be a string");
  return v.get<std::string>();
}

double opt_number(const json& j, const std::string& field, double fallback) {
  if (!j.contains(field)) return fallback;
  const json& v = j.at(field);
  if (!v.is_number()) throw ConfigError("field " + field + " must be a number");
  return v.get<double>();
}

int opt_int(const json& j, const std::string& field, int fallback) {
  if (!j.contains(field)) return fallback;
  const json& v = j.at(field);
  if (!v.is_number_integer()) {
    throw ConfigError("field " + field + " must be an integer");
  }
  return v.get<int>();
}

bool opt_bool(const json& j, const std::string& field, bool fallback) {
  if (!j.contains(field)) return fallback;
  const json& v = j.at(field);
  if (!v.is_boolean()) throw ConfigError("field " + field + " must be a boolean");
  return v.get<bool>();
}

std::pair<double, double> opt_scale(const json& j, const std::string& field,
                                    std::pair<double, double> fallback) {
  if (!j.contains(field)) return fallback;
  const json& v = j.at(field);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    throw ConfigError("field " + field + " must be a [min, max] number pair");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

// ---------------------------------------------------------------------------
// Enumeration parsing.

Algorithm parse_algorithm(const std::string& name) {
  if (name == "mostpopular") return Algorithm::mostpopular;
  if (name == "userknn") return Algorithm::userknn;
  if (name == "itemknn") return Algorithm::itemknn;
  if (name == "biasedmf") return Algorithm::biasedmf;
  throw ConfigError("unknown algorithm: " + name);
}

Similarity parse_similarity(const std::string& name) {
  if (name == "pearson") return Similarity::pearson;
  if (name == "cosine") return Similarity::cosine;
  throw ConfigError("unknown similarity: " + name);
}

TransformKind parse_transform_kind(const std::string& name) {
  if (name == "identity") return TransformKind::identity;
  if (name == "percentile") return TransformKind::percentile;
  if (name == "zscore") return TransformKind::zscore;
  throw ConfigError("unknown transform kind: " + name);
}

Axis parse_axis(const std::string& name) {
  if (name == "item") return Axis::item;
  if (name == "user") return Axis::user;
  throw ConfigError("unknown axis: " + name);
}

TieRule parse_tie_rule(const std::string& name) {
  if (name == "first") return TieRule::first;
  if (name == "last") return TieRule::last;
  throw ConfigError("unknown tie rule: " + name);
}

FairMatchConfig::Variant parse_variant(const std::string& name) {
  if (name == "item") return FairMatchConfig::Variant::item;
  if (name == "supplier") return FairMatchConfig::Variant::supplier;
  throw ConfigError("unknown variant: " + name);
}

// ---------------------------------------------------------------------------
// Shared stage plumbing.

// Stage-level file values resolve against the output directory unless
// absolute; top-level data paths (ratings, suppliers, ...) are used as given.
std::string resolve_out(const Flags& flags, const std::string& value) {
  const fs::path p(value);
  if (p.is_absolute()) return value;
  return (fs::path(flags.out_dir) / p).string();
}

// Tracks what a stage read and wrote for its manifest. Paths are recorded as
// configured (not resolved), so reruns into a different --out stay
// byte-identical.
struct StageIo {
  json inputs = json::object();
  std::vector<std::string> outputs;

  void add_input(const std::string& name, const std::string& configured,
                 const std::string& resolved) {
    inputs[name] = {{"path", configured}, {"sha256", sha256_file(resolved)}};
  }
};

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("cannot write file: " + path);
}

void write_manifest(const Flags& flags, const std::string& subcommand,
                    const json& config, uint64_t seed, const StageIo& io) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["seed"] = seed;
  manifest["config"] = config;
  manifest["inputs"] = io.inputs;
  manifest["outputs"] = io.outputs;
  write_text(resolve_out(flags, "manifest_" + subcommand + ".json"),
             manifest.dump(2) + "\n");
}

uint64_t effective_seed(const json& config, const Flags& flags) {
  if (!flags.seed_text.empty()) {
    const auto v = parse_int(flags.seed_text);
    if (!v) throw ConfigError("--seed must be an integer");
    return static_cast<uint64_t>(*v);
  }
  if (!config.contains("seed")) return 0;
  const json& v = config.at("seed");
  if (!v.is_number_integer()) throw ConfigError("field seed must be an integer");
  return v.get<uint64_t>();
}

std::pair<double, double> top_scale(const json& config) {
  return opt_scale(config, "rating_scale", {1.0, 5.0});
}

// Loads a stage's rating-file input, returning the dataset and recording the
// digest under `name`.
Dataset load_stage_ratings(const Flags& flags, StageIo& io,
                           const std::string& name,
                           const std::string& configured,
                           std::pair<double, double> scale) {
  const std::string resolved = resolve_out(flags, configured);
  Dataset data = load_ratings(resolved, scale);
  io.add_input(name, configured, resolved);
  return data;
}

std::map<std::pair<std::string, std::string>, double> load_predictions(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path);
  std::map<std::pair<std::string, std::string>, double> out;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t a = line.find('\t');
    const size_t b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (a == std::string::npos || b == std::string::npos ||
        line.find('\t', b + 1) != std::string::npos) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected `user<TAB>item<TAB>score`");
    }
    const std::string user = line.substr(0, a);
    const std::string item = line.substr(a + 1, b - a - 1);
    const auto score = parse_double(line.substr(b + 1));
    if (!score) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": bad score value");
    }
    if (!out.emplace(std::make_pair(user, item), *score).second) {
      throw DuplicateError(path + ":" + std::to_string(line_no) +
                           ": repeated pair (" + user + ", " + item + ")");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stages.

void run_split(const json& config, const Flags& flags) {
  StageIo io;
  const uint64_t seed = effective_seed(config, flags);
  const std::string ratings = req_string(config, "ratings");
  const json& params = section(config, "split");
  const double fraction = opt_number(params, "test_fraction", 0.2);

  Dataset data = load_ratings(ratings, top_scale(config));
  io.add_input("ratings", ratings, ratings);
  const SplitPair split = split_holdout(data, fraction, seed);
  write_ratings(split.train, resolve_out(flags, kTrainFile));
  write_ratings(split.test, resolve_out(flags, kTestFile));
  io.outputs = {kTrainFile, kTestFile};
  write_manifest(flags, "split", config, seed, io);
}

void run_transform(const json& config, const Flags& flags) {
  StageIo io;
  const uint64_t seed = effective_seed(config, flags);
  const json& params = section(config, "transform");
  TransformConfig tc;
  tc.kind = parse_transform_kind(opt_string(params, "kind", "percentile"));
  tc.axis = parse_axis(opt_string(params, "axis", "item"));
  tc.tie_rule = parse_tie_rule(opt_string(params, "tie_rule", "last"));

  const std::string input = opt_string(params, "input", kTrainFile);
  const Dataset data = load_stage_ratings(
      flags, io, "input", input, opt_scale(params, "scale", top_scale(config)));
  const Dataset transformed = apply_transform(data, tc);
  write_ratings(transformed, resolve_out(flags, kTransformedFile));
  io.outputs = {kTransformedFile};
  write_manifest(flags, "transform", config, seed, io);
}

void run_recommend(const json& config, const Flags& flags) {
  StageIo io;
  const uint64_t seed = effective_seed(config, flags);
  const json& params = section(config, "recommend");
  const Algorithm algorithm =
      parse_algorithm(opt_string(params, "algorithm", "mostpopular"));
  const int list_size = opt_int(params, "list_size", 50);
  const std::string input = opt_string(params, "input", kTrainFile);
  const auto scale = opt_scale(params, "scale", top_scale(config));
  const Dataset train = load_stage_ratings(flags, io, "input", input, scale);

  ModelParams model;
  switch (algorithm) {
    case Algorithm::mostpopular:
      model = train_mostpopular(train);
      break;
    case Algorithm::userknn:
      model = train_userknn(train, opt_int(params, "neighbors", 50),
                            parse_similarity(
                                opt_string(params, "similarity", "cosine")));
      break;
    case Algorithm::itemknn:
      model = train_itemknn(train, opt_int(params, "neighbors", 50),
                            parse_similarity(
                                opt_string(params, "similarity", "cosine")));
      break;
    case Algorithm::biasedmf:
      model = train_biasedmf(train, opt_int(params, "factors", 20),
                             opt_int(params, "epochs", 20),
                             opt_number(params, "learn_rate", 0.005),
                             opt_number(params, "regularization", 0.02),
                             derive_seed(seed, {seed_stream::kModel}));
      break;
  }

  const RecBatch batch =
      recommend_batch(model, train, list_size, flags.threads);
  write_recbatch(batch, resolve_out(flags, kLonglistsFile));
  io.outputs = {kLonglistsFile};

  if (opt_bool(params, "predictions", false)) {
    const std::string test_path = opt_string(params, "test", kTestFile);
    const Dataset test =
        load_stage_ratings(flags, io, "test", test_path, scale);
    std::string rows;
    for (const Interaction& x : test.interactions) {
      rows += x.user;
      rows += '\t';
      rows += x.item;
      rows += '\t';
      rows += format_shortest(predict_clamped(model, train, x.user, x.item));
      rows += '\n';
    }
    write_text(resolve_out(flags, kPredictionsFile), rows);
    io.outputs.push_back(kPredictionsFile);
  }
  write_manifest(flags, "recommend", config, seed, io);
}

void run_rerank(const json& config, const Flags& flags) {
  StageIo io;
  const uint64_t seed = effective_seed(config, flags);
  const json& params = section(config, "rerank");
  const std::string method = opt_string(params, "method", "fairmatch");
  const int final_size = opt_int(params, "final_size", 10);
  const std::string input = opt_string(params, "input", kLonglistsFile);
  const std::string resolved_input = resolve_out(flags, input);
  const RecBatch batch = load_recbatch(resolved_input);
  io.add_input("input", input, resolved_input);

  RecBatch reranked;
  if (method == "fairmatch") {
    FairMatchConfig fm;
    fm.variant = parse_variant(opt_string(params, "variant", "item"));
    fm.lambda = opt_number(params, "lambda", 0.5);
    fm.beta = opt_number(params, "beta", 0.5);
    fm.long_list_size = batch.list_size;
    fm.final_size = final_size;
    std::optional<SupplierMap> suppliers;
    if (fm.variant == FairMatchConfig::Variant::supplier) {
      const std::string path = req_string(config, "suppliers");
      suppliers = load_supplier_map(path);
      io.add_input("suppliers", path, path);
    }
    reranked =
        fairmatch_rerank(batch, suppliers ? &*suppliers : nullptr, fm);
  } else if (method == "topn") {
    reranked = rerank_topn(batch, final_size);
  } else if (method == "reverse") {
    reranked = rerank_reverse(batch, final_size);
  } else if (method == "random") {
    reranked = rerank_random(batch, final_size, seed);
  } else {
    throw ConfigError("unknown rerank method: " + method);
  }

  write_recbatch(reranked, resolve_out(flags, kFinallistsFile));
  io.outputs = {kFinallistsFile};
  write_manifest(flags, "rerank", config, seed, io);
}

// Optional evaluation inputs shared by eval and gridsearch.
struct EvalData {
  Dataset train;
  Dataset test;
  std::optional<RecBatch> base;
  std::optional<SupplierMap> suppliers;
  std::optional<GenreMap> genres;
  std::optional<GroupAssignment> groups;
  std::optional<std::map<std::pair<std::string, std::string>, double>>
      predictions;
  std::vector<int> alphas;
  double smooth_alpha = 0.01;
};

EvalData load_eval_data(const json& config, const json& params,
                        const Flags& flags, StageIo& io) {
  EvalData data;
  const auto scale = opt_scale(params, "scale", top_scale(config));
  data.train = load_stage_ratings(flags, io, "train",
                                  opt_string(params, "train", kTrainFile),
                                  scale);
  data.test = load_stage_ratings(flags, io, "test",
                                 opt_string(params, "test", kTestFile), scale);

  // The long-list batch enables visibility-shift metrics; the default is
  // picked up only when present on disk, an explicit path must exist.
  const bool base_given = params.contains("base");
  const std::string base = opt_string(params, "base", kLonglistsFile);
  const std::string base_resolved = resolve_out(flags, base);
  if (base_given || fs::exists(base_resolved)) {
    data.base = load_recbatch(base_resolved);
    io.add_input("base", base, base_resolved);
  }

  const bool preds_given = params.contains("predictions");
  const std::string preds =
      opt_string(params, "predictions", kPredictionsFile);
  const std::string preds_resolved = resolve_out(flags, preds);
  if (preds_given || fs::exists(preds_resolved)) {
    data.predictions = load_predictions(preds_resolved);
    io.add_input("predictions", preds, preds_resolved);
  }

  if (config.contains("suppliers")) {
    const std::string path = req_string(config, "suppliers");
    data.suppliers = load_supplier_map(path, data.train);
    io.add_input("suppliers", path, path);
  }
  if (config.contains("genres")) {
    const std::string path = req_string(config, "genres");
    data.genres = load_genre_map(path);
    io.add_input("genres", path, path);
  }
  if (config.contains("groups")) {
    const std::string path = req_string(config, "groups");
    data.groups = load_group_assignment(path);
    io.add_input("groups", path, path);
  }

  if (params.contains("alphas")) {
    const json& v = params.at("alphas");
    if (!v.is_array() || v.empty()) {
      throw ConfigError("field alphas must be a non-empty array");
    }
    for (const json& a : v) {
      if (!a.is_number_integer()) {
        throw ConfigError("field alphas must hold integers");
      }
      data.alphas.push_back(a.get<int>());
    }
  } else {
    data.alphas = {1};
  }
  data.smooth_alpha = opt_number(params, "smooth_alpha", 0.01);
  return data;
}

MetricsReport report_for(const EvalData& data, const RecBatch& batch) {
  ReportInputs in;
  in.train = &data.train;
  in.test = &data.test;
  in.batch = &batch;
  in.base = data.base ? &*data.base : nullptr;
  in.suppliers = data.suppliers ? &*data.suppliers : nullptr;
  in.genres = data.genres ? &*data.genres : nullptr;
  in.groups = data.groups ? &*data.groups : nullptr;
  in.predictions = data.predictions ? &*data.predictions : nullptr;
  in.alphas = data.alphas;
  in.smooth_alpha = data.smooth_alpha;
  return build_report(in);
}

void run_eval(const json& config, const Flags& flags) {
  StageIo io;
  const uint64_t seed = effective_seed(config, flags);
  const json& params = section(config, "eval");
  const std::string input = opt_string(params, "input", kFinallistsFile);
  const std::string resolved_input = resolve_out(flags, input);
  const RecBatch batch = load_recbatch(resolved_input);

  EvalData data = load_eval_data(config, params, flags, io);
  io.add_input("input", input, resolved_input);
  const MetricsReport report = report_for(data, batch);
  write_text(resolve_out(flags, kMetricsTsvFile), report.to_tsv());
  write_text(resolve_out(flags, kMetricsJsonFile), report.to_json());
  io.outputs = {kMetricsTsvFile, kMetricsJsonFile};
  write_manifest(flags, "eval", config, seed, io);
}

void run_simulate(const json& config, const Flags& flags) {
  StageIo io;
  const uint64_t seed = effective_seed(config, flags);
  const json& params = section(config, "simulate");
  const std::string ratings = req_string(config, "ratings");
  const std::string genres_path = req_string(config, "genres");

  const auto scale = top_scale(config);
  const Dataset source = load_ratings(ratings, scale);
  io.add_input("ratings", ratings, ratings);
  const GenreMap genres = load_genre_map(genres_path);
  io.add_input("genres", genres_path, genres_path);
  GroupAssignment groups;
  if (config.contains("groups")) {
    const std::string path = req_string(config, "groups");
    groups = load_group_assignment(path);
    io.add_input("groups", path, path);
  }

  SimConfig sim;
  sim.iterations = opt_int(params, "iterations", 5);
  sim.list_size = opt_int(params, "list_size", 10);
  sim.accept_exponent = opt_number(params, "accept_exponent", -0.1);
  sim.algorithm = parse_algorithm(opt_string(params, "algorithm", "mostpopular"));
  sim.similarity = parse_similarity(opt_string(params, "similarity", "cosine"));
  sim.neighbors = opt_int(params, "neighbors", 50);
  sim.factors = opt_int(params, "factors", 20);
  sim.epochs = opt_int(params, "epochs", 20);
  sim.learn_rate = opt_number(params, "learn_rate", 0.005);
  sim.regularization = opt_number(params, "regularization", 0.02);
  sim.seed = seed;
  sim.rating_min = scale.first;
  sim.rating_max = scale.second;
  sim.threads = flags.threads;

  const IterationLog log = run_feedback_loop(source, genres, groups, sim);
  write_text(resolve_out(flags, kSimulationFile), iteration_log_to_tsv(log));
  io.outputs = {kSimulationFile};
  write_manifest(flags, "simulate", config, seed, io);
}

std::vector<double> grid_numbers(const json& params, const std::string& field,
                                 double fallback) {
  if (!params.contains(field)) return {fallback};
  const json& v = params.at(field);
  if (!v.is_array()) throw ConfigError("field " + field + " must be an array");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError("field " + field + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<int> grid_ints(const json& params, const std::string& field,
                           int fallback) {
  if (!params.contains(field)) return {fallback};
  const json& v = params.at(field);
  if (!v.is_array()) throw ConfigError("field " + field + " must be an array");
  std::vector<int> out;
  for (const json& x : v) {
    if (!x.is_number_integer()) {
      throw ConfigError("field " + field + " must hold integers");
    }
    out.push_back(x.get<int>());
  }
  return out;
}

std::vector<std::string> grid_strings(const json& params,
                                      const std::string& field,
                                      const std::string& fallback) {
  if (!params.contains(field)) return {fallback};
  const json& v = params.at(field);
  if (!v.is_array()) throw ConfigError("field " + field + " must be an array");
  std::vector<std::string> out;
  for (const json& x : v) {
    if (!x.is_string()) throw ConfigError("field " + field + " must hold strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

void run_gridsearch(const json& config, const Flags& flags) {
  StageIo io;
  const uint64_t seed = effective_seed(config, flags);
  const json& params = section(config, "gridsearch");
  const json& rerank_params = section(config, "rerank");

  // Grid axes default to the rerank section's scalar settings.
  const auto variants = grid_strings(params, "variant",
                                     opt_string(rerank_params, "variant",
                                                "item"));
  const auto lambdas =
      grid_numbers(params, "lambda", opt_number(rerank_params, "lambda", 0.5));
  const auto betas =
      grid_numbers(params, "beta", opt_number(rerank_params, "beta", 0.5));
  const auto final_sizes = grid_ints(params, "final_size",
                                     opt_int(rerank_params, "final_size", 10));
  if (variants.empty() || lambdas.empty() || betas.empty() ||
      final_sizes.empty()) {
    throw ConfigError("gridsearch grid is empty");
  }

  const std::string input = opt_string(params, "input", kLonglistsFile);
  const std::string resolved_input = resolve_out(flags, input);
  const RecBatch batch = load_recbatch(resolved_input);
  EvalData data = load_eval_data(config, params, flags, io);
  io.add_input("input", input, resolved_input);

  struct Row {
    int index = 0;
    std::string variant;
    double lambda = 0.0;
    double beta = 0.0;
    int final_size = 0;
    double precision = 0.0;
    std::optional<double> item_gini;
  };
  std::vector<Row> rows;

  int index = 0;
  for (const std::string& variant : variants) {
    for (double lambda : lambdas) {
      for (double beta : betas) {
        for (int final_size : final_sizes) {
          FairMatchConfig fm;
          fm.variant = parse_variant(variant);
          fm.lambda = lambda;
          fm.beta = beta;
          fm.long_list_size = batch.list_size;
          fm.final_size = final_size;
          std::optional<SupplierMap> local_suppliers;
          const SupplierMap* suppliers =
              data.suppliers ? &*data.suppliers : nullptr;
          if (fm.variant == FairMatchConfig::Variant::supplier && !suppliers) {
            const std::string path = req_string(config, "suppliers");
            local_suppliers = load_supplier_map(path);
            suppliers = &*local_suppliers;
          }
          const RecBatch reranked = fairmatch_rerank(batch, suppliers, fm);
          const MetricsReport report = report_for(data, reranked);

          char dir_name[16];
          std::snprintf(dir_name, sizeof dir_name, "%04d", index);
          const fs::path combo_dir = fs::path(flags.out_dir) / "grid" / dir_name;
          fs::create_directories(combo_dir);
          write_recbatch(reranked, (combo_dir / kFinallistsFile).string());
          write_text((combo_dir / kMetricsTsvFile).string(), report.to_tsv());
          write_text((combo_dir / kMetricsJsonFile).string(),
                     report.to_json());
          const std::string rel = std::string("grid/") + dir_name + "/";
          io.outputs.push_back(rel + kFinallistsFile);
          io.outputs.push_back(rel + kMetricsTsvFile);
          io.outputs.push_back(rel + kMetricsJsonFile);

          Row row;
          row.index = index;
          row.variant = variant;
          row.lambda = lambda;
          row.beta = beta;
          row.final_size = final_size;
          row.precision = report.find("ranking", "precision").value_or(0.0);
          row.item_gini = report.find("item", "gini");
          rows.push_back(std::move(row));
          ++index;
        }
      }
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.precision != b.precision) return a.precision > b.precision;
    const double ga = a.item_gini.value_or(
        std::numeric_limits<double>::infinity());
    const double gb = b.item_gini.value_or(
        std::numeric_limits<double>::infinity());
    if (ga != gb) return ga < gb;
    return a.index < b.index;
  });

  std::string board =
      "rank\tindex\tvariant\tlambda\tbeta\tfinal_size\tprecision\titem_gini\n";
  for (size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    board += std::to_string(r + 1);
    board += '\t';
    board += std::to_string(row.index);
    board += '\t';
    board += row.variant;
    board += '\t';
    board += format_shortest(row.lambda);
    board += '\t';
    board += format_shortest(row.beta);
    board += '\t';
    board += std::to_string(row.final_size);
    board += '\t';
    board += format_fixed(row.precision, 6);
    board += '\t';
    if (row.item_gini) board += format_fixed(*row.item_gini, 6);
    board += '\n';
  }
  write_text(resolve_out(flags, kLeaderboardFile), board);
  io.outputs.push_back(kLeaderboardFile);
  write_manifest(flags, "gridsearch", config, seed, io);
}

json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse failure: " + std::string(e.what()));
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"fairex: exposure-aware recommendation pipeline"};
  app.require_subcommand(1);
  Flags flags;

  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"split", "hold out a per-user test fraction"},
      {"transform", "re-scale ratings (percentile or z-score)"},
      {"recommend", "train a recommender and emit long lists"},
      {"rerank", "post-process long lists into final lists"},
      {"eval", "compute the metric report for a batch"},
      {"simulate", "run the closed feedback loop"},
      {"gridsearch", "sweep re-ranker settings and rank them"},
  };
  for (const auto& [name, description] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", flags.config_path, "JSON experiment config")
        ->required();
    sub->add_option("--out", flags.out_dir, "output directory")->required();
    sub->add_option("--seed", flags.seed_text,
                    "master seed (overrides the config)");
    sub->add_option("--threads", flags.threads, "worker threads");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (flags.threads < 1) throw ConfigError("--threads must be >= 1");
    const json config = load_config(flags.config_path);
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    std::error_code ec;
    fs::create_directories(flags.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + flags.out_dir);

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "split") {
      run_split(config, flags);
    } else if (name == "transform") {
      run_transform(config, flags);
    } else if (name == "recommend") {
      run_recommend(config, flags);
    } else if (name == "rerank") {
      run_rerank(config, flags);
    } else if (name == "eval") {
      run_eval(config, flags);
    } else if (name == "simulate") {
      run_simulate(config, flags);
    } else {
      run_gridsearch(config, flags);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fairex
