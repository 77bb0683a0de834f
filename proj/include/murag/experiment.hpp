// Copyright 2026 The murag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment runner behind the command-line tool: strict JSON configuration,
// workload construction, method dispatch and output files. See
// docs/config.md for the configuration reference.

#ifndef MURAG_EXPERIMENT_HPP_
#define MURAG_EXPERIMENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "murag/attack.hpp"
#include "murag/corpus.hpp"
#include "murag/epsilon.hpp"
#include "murag/errors.hpp"
#include "murag/generator.hpp"
#include "murag/io.hpp"
#include "murag/ledger.hpp"
#include "murag/noise.hpp"
#include "murag/orchestrators.hpp"
#include "murag/remote_generator.hpp"
#include "murag/workload.hpp"
#include "nlohmann/json.hpp"

namespace murag {

// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kMethods[] = {"murag",          "murag-ada", "naive",
                                               "subsample",      "nonprivate-rag",
                                               "non-rag",        "attack"};

struct GeneratorSpec {
  bool remote = false;
  StubConfig stub;
  // Stub seed follows the run seed unless set explicitly.
  bool stub_seed_fixed = false;
  RemoteGeneratorConfig remote_config;
};

struct SweepGrid {
  std::vector<std::size_t> k = {30, 40, 50};
  std::vector<double> eps_token = {0.5, 1.0, 2.0};
  std::vector<int> max_retrievals = {1, 5};
};

struct ExperimentConfig {
  std::string method = "murag";
  std::uint64_t seed = 1;
  std::size_t num_seeds = 1;
  WorkloadSpec workload;
  // Workload seed follows the run seed unless set explicitly.
  bool workload_seed_fixed = false;
  std::string corpus_path;
  std::string queries_path;
  GeneratorSpec generator;
  ScoreBins bins;
  DpRagParams dp;
  // theta as a fraction of the voter count.
  double threshold_fraction = 0.5;
  MuragConfig murag;
  MuragAdaConfig ada;
  EpsilonAmount naive_eps_q = Eps(10.0);
  double gamma = 0.1;
  // Subsample: either a per-query budget or a total to be amplified.
  std::optional<double> subsample_eps_q;
  double subsample_eps_total = 10.0;
  std::size_t nonprivate_k = 30;
  AttackConfig attack;
  // Total budget kept fixed across sweep cells: eps_q = eps_total / M.
  double sweep_eps_total = 10.0;
  SweepGrid sweep;
  std::vector<double> tau_study_eps_thr = {0.5, 1.0, 2.0};
  std::string out_dir = "out";
  bool noiseless = false;
};

// ---------------------------------------------------------------------------
// Parsing.

namespace experiment_internal {

using nlohmann::json;

// Parsed text yields unsigned numbers; json built in code may hold signed ones.
inline bool IsNonNegativeInteger(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

class Reader {
 public:
  Reader(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object()) Fail("", "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        Fail(it.key(), "unknown key");
      }
    }
  }

  bool Has(std::string_view key) const { return j_.contains(key); }

  const json& At(std::string_view key) const { return j_.at(std::string(key)); }

  double Number(std::string_view key, double fallback) const {
    if (!Has(key)) return fallback;
    const json& v = At(key);
    if (!v.is_number()) Fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) Fail(key, "expected a finite number");
    return x;
  }

  double Positive(std::string_view key, double fallback) const {
    const double x = Number(key, fallback);
    if (!(x > 0.0)) Fail(key, "must be positive");
    return x;
  }

  double Fraction(std::string_view key, double fallback) const {
    const double x = Number(key, fallback);
    if (x < 0.0 || x > 1.0) Fail(key, "must lie in [0, 1]");
    return x;
  }

  std::uint64_t Unsigned(std::string_view key, std::uint64_t fallback) const {
    if (!Has(key)) return fallback;
    const json& v = At(key);
    if (!IsNonNegativeInteger(v)) Fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::size_t Count(std::string_view key, std::size_t fallback) const {
    const std::uint64_t n = Unsigned(key, fallback);
    if (n == 0) Fail(key, "must be positive");
    return static_cast<std::size_t>(n);
  }

  bool Bool(std::string_view key, bool fallback) const {
    if (!Has(key)) return fallback;
    if (!At(key).is_boolean()) Fail(key, "expected true or false");
    return At(key).get<bool>();
  }

  std::string String(std::string_view key, std::string fallback) const {
    if (!Has(key)) return fallback;
    if (!At(key).is_string()) Fail(key, "expected a string");
    return At(key).get<std::string>();
  }

  EpsilonAmount Epsilon(std::string_view key, EpsilonAmount fallback) const {
    if (!Has(key)) return fallback;
    const double x = Positive(key, 1.0);
    const EpsilonAmount e = EpsilonAmount::FromDouble(x);
    if (e.is_zero()) Fail(key, "below one micro-eps");
    return e;
  }

  std::vector<double> PositiveList(std::string_view key, std::vector<double> fallback) const {
    if (!Has(key)) return fallback;
    const json& v = At(key);
    if (!v.is_array() || v.empty()) Fail(key, "expected a non-empty number array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number() || !(x.get<double>() > 0.0) || !std::isfinite(x.get<double>())) {
        Fail(key, "entries must be positive numbers");
      }
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::uint64_t> CountList(std::string_view key,
                                       std::vector<std::uint64_t> fallback) const {
    if (!Has(key)) return fallback;
    const json& v = At(key);
    if (!v.is_array() || v.empty()) Fail(key, "expected a non-empty integer array");
    std::vector<std::uint64_t> out;
    for (const auto& x : v) {
      if (!IsNonNegativeInteger(x) || x.get<std::uint64_t>() == 0) {
        Fail(key, "entries must be positive integers");
      }
      out.push_back(x.get<std::uint64_t>());
    }
    return out;
  }

  Reader Child(std::string_view key, std::initializer_list<std::string_view> allowed) const {
    return Reader(At(key), (path_.empty() ? "" : path_ + ".") + std::string(key), allowed);
  }

  [[noreturn]] void Fail(std::string_view key, std::string_view what) const {
    std::string where = path_;
    if (!key.empty()) where += (where.empty() ? "" : ".") + std::string(key);
    throw ConfigError("config" + (where.empty() ? "" : " " + where) + ": " + std::string(what));
  }

 private:
  const json& j_;
  std::string path_;
};

inline void ParseWorkload(const Reader& r, ExperimentConfig& cfg) {
  WorkloadSpec& w = cfg.workload;
  const std::string mode = r.String("mode", "independent");
  if (mode == "independent") {
    w.mode = WorkloadMode::kIndependent;
  } else if (mode == "correlated") {
    w.mode = WorkloadMode::kCorrelated;
  } else {
    r.Fail("mode", "expected \"independent\" or \"correlated\"");
  }
  w.corpus_size = r.Count("corpus_size", w.corpus_size);
  w.dim = r.Count("dim", w.dim);
  w.num_queries = r.Count("num_queries", w.num_queries);
  w.relevant_per_query = r.Count("relevant_per_query", w.relevant_per_query);
  w.overlap = r.Fraction("overlap", w.overlap);
  w.group_size = r.Count("group_size", w.group_size);
  w.vocab_size = r.Count("vocab_size", w.vocab_size);
  w.max_answer_len = r.Count("max_answer_len", w.max_answer_len);
  w.fact_fraction = r.Fraction("fact_fraction", w.fact_fraction);
  if (r.Has("seed")) {
    w.seed = r.Unsigned("seed", w.seed);
    cfg.workload_seed_fixed = true;
  }
  try {
    ValidateWorkloadSpec(w);
  } catch (const Error& e) {
    r.Fail("", e.what());
  }
}

inline void ParseGenerator(const Reader& r, ExperimentConfig& cfg) {
  GeneratorSpec& g = cfg.generator;
  const std::string type = r.String("type", "stub");
  if (type != "stub" && type != "remote") r.Fail("type", "expected \"stub\" or \"remote\"");
  g.remote = type == "remote";
  g.stub.p_base = r.Fraction("p_base", g.stub.p_base);
  g.stub.wrong_token = static_cast<Token>(r.Unsigned("wrong_token", g.stub.wrong_token));
  if (r.Has("seed")) {
    g.stub.seed = r.Unsigned("seed", 0);
    g.stub_seed_fixed = true;
  }
  g.remote_config.endpoint = r.String("endpoint", "");
  g.remote_config.timeout_ms = static_cast<int>(r.Count("timeout_ms", 5000));
  g.remote_config.retries = static_cast<int>(r.Unsigned("retries", 2));
  if (g.remote && g.remote_config.endpoint.empty()) r.Fail("endpoint", "required for remote");
}

}  // namespace experiment_internal

inline ExperimentConfig ParseExperimentConfig(const nlohmann::json& j) {
  using experiment_internal::Reader;
  ExperimentConfig cfg;
  const Reader root(j, "",
                    {"method", "seed", "num_seeds", "workload", "corpus_path", "queries_path",
                     "generator", "bins", "dp_rag", "murag", "murag_ada", "naive", "subsample",
                     "nonprivate", "attack", "sweep", "tau_study", "out_dir"});
  cfg.method = root.String("method", cfg.method);
  if (std::find(std::begin(kMethods), std::end(kMethods), cfg.method) == std::end(kMethods)) {
    root.Fail("method", "unknown method '" + cfg.method + "'");
  }
  cfg.seed = root.Unsigned("seed", cfg.seed);
  cfg.num_seeds = root.Count("num_seeds", cfg.num_seeds);
  cfg.out_dir = root.String("out_dir", cfg.out_dir);
  cfg.corpus_path = root.String("corpus_path", "");
  cfg.queries_path = root.String("queries_path", "");
  if (cfg.corpus_path.empty() != cfg.queries_path.empty()) {
    root.Fail("corpus_path", "corpus_path and queries_path must be given together");
  }
  if (root.Has("workload")) {
    if (!cfg.corpus_path.empty()) root.Fail("workload", "conflicts with corpus_path");
    experiment_internal::ParseWorkload(
        root.Child("workload", {"mode", "corpus_size", "dim", "num_queries",
                                "relevant_per_query", "overlap", "group_size", "vocab_size",
                                "max_answer_len", "fact_fraction", "seed"}),
        cfg);
  }
  if (root.Has("generator")) {
    experiment_internal::ParseGenerator(
        root.Child("generator", {"type", "p_base", "wrong_token", "seed", "endpoint",
                                 "timeout_ms", "retries"}),
        cfg);
  }
  cfg.generator.stub.vocab_size = cfg.workload.vocab_size;
  cfg.generator.remote_config.vocab_size = cfg.workload.vocab_size;

  if (root.Has("bins")) {
    const Reader b = root.Child("bins", {"lo", "hi", "width"});
    try {
      cfg.bins = ScoreBins(b.Number("lo", 70.0), b.Number("hi", 100.0),
                           b.Positive("width", 0.2));
    } catch (const Error& e) {
      b.Fail("", e.what());
    }
  }
  if (root.Has("dp_rag")) {
    const Reader d = root.Child(
        "dp_rag", {"eps_token", "max_tokens", "voters", "docs_per_voter", "threshold_fraction"});
    cfg.dp.eps_token = d.Epsilon("eps_token", cfg.dp.eps_token);
    cfg.dp.max_tokens = d.Count("max_tokens", cfg.dp.max_tokens);
    cfg.dp.voters = d.Count("voters", cfg.dp.voters);
    cfg.dp.docs_per_voter = d.Count("docs_per_voter", cfg.dp.docs_per_voter);
    cfg.threshold_fraction = d.Fraction("threshold_fraction", cfg.threshold_fraction);
    if (cfg.dp.eps_token.micro() % 2 != 0) d.Fail("eps_token", "must be an even number of micro-eps");
  }
  cfg.dp.threshold = cfg.threshold_fraction * static_cast<double>(cfg.dp.voters);

  cfg.murag.bins = cfg.bins;
  cfg.ada.bins = cfg.bins;
  cfg.murag.tau = 95.0;
  if (root.Has("murag")) {
    const Reader m = root.Child("murag", {"tau", "max_retrievals", "eps_q", "reuse_history"});
    cfg.murag.tau = m.Number("tau", cfg.murag.tau);
    cfg.murag.max_retrievals = static_cast<int>(m.Count("max_retrievals", 1));
    cfg.murag.eps_q = m.Epsilon("eps_q", cfg.murag.eps_q);
    cfg.murag.reuse_history = m.Bool("reuse_history", false);
  }
  if (root.Has("murag_ada")) {
    const Reader a =
        root.Child("murag_ada", {"eps_thr", "eps_rag", "max_retrievals", "reuse_history"});
    cfg.ada.eps_thr = a.Epsilon("eps_thr", cfg.ada.eps_thr);
    cfg.ada.eps_rag = a.Epsilon("eps_rag", cfg.ada.eps_rag);
    cfg.ada.max_retrievals = static_cast<int>(a.Count("max_retrievals", 1));
    cfg.ada.reuse_history = a.Bool("reuse_history", false);
  }
  if (root.Has("naive")) {
    const Reader n = root.Child("naive", {"eps_q"});
    cfg.naive_eps_q = n.Epsilon("eps_q", cfg.naive_eps_q);
  }
  if (root.Has("subsample")) {
    const Reader s = root.Child("subsample", {"gamma", "eps_q", "eps_total"});
    cfg.gamma = s.Number("gamma", cfg.gamma);
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) s.Fail("gamma", "must lie in (0, 1)");
    if (s.Has("eps_q") && s.Has("eps_total")) s.Fail("eps_q", "give eps_q or eps_total, not both");
    if (s.Has("eps_q")) cfg.subsample_eps_q = s.Positive("eps_q", 1.0);
    cfg.subsample_eps_total = s.Positive("eps_total", cfg.subsample_eps_total);
  }
  if (root.Has("nonprivate")) {
    const Reader n = root.Child("nonprivate", {"k"});
    cfg.nonprivate_k = static_cast<std::size_t>(n.Unsigned("k", cfg.nonprivate_k));
  }
  if (root.Has("attack")) {
    const Reader a = root.Child("attack", {"system", "members", "background", "probes",
                                           "probe_cosine", "k", "shared_ledger"});
    const std::string system = a.String("system", "murag");
    if (system == "murag") {
      cfg.attack.system = AttackSystem::kMurag;
    } else if (system == "murag-ada") {
      cfg.attack.system = AttackSystem::kMuragAda;
    } else if (system == "nonprivate-rag") {
      cfg.attack.system = AttackSystem::kNonPrivateRag;
    } else {
      a.Fail("system", "expected \"murag\", \"murag-ada\" or \"nonprivate-rag\"");
    }
    cfg.attack.members = a.Count("members", cfg.attack.members);
    cfg.attack.background = static_cast<std::size_t>(a.Unsigned("background", 450));
    cfg.attack.probes = a.Count("probes", cfg.attack.probes);
    cfg.attack.probe_cosine = a.Positive("probe_cosine", cfg.attack.probe_cosine);
    if (cfg.attack.probe_cosine > 1.0) a.Fail("probe_cosine", "must not exceed 1");
    cfg.attack.k = a.Count("k", cfg.attack.k);
    cfg.attack.shared_ledger = a.Bool("shared_ledger", false);
  }
  if (root.Has("sweep")) {
    const Reader s = root.Child("sweep", {"eps_total", "k", "eps_token", "max_retrievals"});
    cfg.sweep_eps_total = s.Positive("eps_total", cfg.sweep_eps_total);
    cfg.sweep.k.clear();
    for (auto k : s.CountList("k", {30, 40, 50})) cfg.sweep.k.push_back(k);
    cfg.sweep.eps_token = s.PositiveList("eps_token", cfg.sweep.eps_token);
    cfg.sweep.max_retrievals.clear();
    for (auto m : s.CountList("max_retrievals", {1, 5})) {
      cfg.sweep.max_retrievals.push_back(static_cast<int>(m));
    }
  }
  if (root.Has("tau_study")) {
    const Reader t = root.Child("tau_study", {"eps_thr"});
    cfg.tau_study_eps_thr = t.PositiveList("eps_thr", cfg.tau_study_eps_thr);
  }
  cfg.murag.dp = cfg.dp;
  cfg.ada.dp = cfg.dp;

  // Method-specific checks up front, so a bad config never half-runs.
  try {
    if (cfg.method == "murag") cfg.murag.Validate();
    if (cfg.method == "murag-ada") cfg.ada.Validate();
    if (cfg.method == "naive") {
      DpRagParams p = cfg.dp;
      p.eps_total = cfg.naive_eps_q;
      p.Validate();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig ParseExperimentConfigText(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ParseExperimentConfig(j);
}

inline ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseExperimentConfigText(ss.str());
}

// ---------------------------------------------------------------------------
// Running.

struct LoadedData {
  Corpus corpus;
  std::vector<QueryRecord> queries;
};

inline LoadedData LoadData(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.corpus_path.empty()) {
    return {ReadCorpusFile(cfg.corpus_path), ReadQueriesFile(cfg.queries_path)};
  }
  WorkloadSpec spec = cfg.workload;
  if (!cfg.workload_seed_fixed) spec.seed = seed;
  Workload w = GenerateSyntheticWorkload(spec);
  return {std::move(w.corpus), std::move(w.queries)};
}

inline std::unique_ptr<TokenGenerator> MakeGenerator(const ExperimentConfig& cfg,
                                                     std::uint64_t seed) {
  if (cfg.generator.remote) return std::make_unique<RemoteGenerator>(cfg.generator.remote_config);
  StubConfig stub = cfg.generator.stub;
  if (!cfg.generator.stub_seed_fixed) stub.seed = seed;
  return std::make_unique<StubGenerator>(stub);
}

inline double SubsampleEpsPerQuery(const ExperimentConfig& cfg, std::size_t num_queries) {
  if (cfg.subsample_eps_q) return *cfg.subsample_eps_q;
  return AmplifiedEpsPerQuery(cfg.subsample_eps_total, num_queries, cfg.gamma);
}

// Independent recomputation of the privacy claim from the configuration.
inline PrivacyClaim ExpectedClaim(const ExperimentConfig& cfg, const std::string& method,
                                  std::size_t num_queries) {
  const double t = static_cast<double>(num_queries);
  if (method == "murag") return {cfg.murag.max_retrievals * cfg.murag.eps_q.value(), false};
  if (method == "murag-ada") {
    return {cfg.ada.max_retrievals * (cfg.ada.eps_thr.value() + cfg.ada.eps_rag.value()), false};
  }
  if (method == "naive") return {t * cfg.naive_eps_q.value(), false};
  if (method == "subsample") {
    const double eps_q = SubsampleEpsPerQuery(cfg, num_queries);
    return {t * std::log(1.0 + cfg.gamma * (std::exp(eps_q) - 1.0)), false};
  }
  return {std::numeric_limits<double>::infinity(), true};
}

inline void CheckClaim(const ExperimentConfig& cfg, const RunReport& report,
                       std::size_t num_queries) {
  const PrivacyClaim want = ExpectedClaim(cfg, report.method, num_queries);
  const PrivacyClaim got = report.claim;
  const bool ok = want.unbounded == got.unbounded &&
                  (want.unbounded ||
                   std::fabs(want.epsilon - got.epsilon) <= 1e-9 * std::max(1.0, want.epsilon));
  if (!ok) {
    throw Error("privacy claim mismatch for " + report.method + ": reported " +
                FormatNumber(got.epsilon) + ", expected " + FormatNumber(want.epsilon));
  }
}

inline std::uint64_t MethodStream(std::string_view method) { return Fnv1a64(method); }

// One method, one seed, in memory.
inline RunReport RunMethod(const ExperimentConfig& cfg, const std::string& method,
                           std::uint64_t seed, const LoadedData& data, TokenGenerator& generator) {
  NoiseSource noise(seed, MethodStream(method), cfg.noiseless);
  RunReport report;
  if (method == "murag") {
    report = RunMurag(data.queries, data.corpus, cfg.murag, generator, noise);
  } else if (method == "murag-ada") {
    report = RunMuragAda(data.queries, data.corpus, cfg.ada, generator, noise);
  } else if (method == "naive") {
    report = RunNaiveMulti(data.queries, data.corpus, cfg.naive_eps_q, cfg.dp, generator, noise,
                           cfg.bins);
  } else if (method == "subsample") {
    report = RunSubsampleMulti(data.queries, data.corpus, cfg.gamma,
                               SubsampleEpsPerQuery(cfg, data.queries.size()), cfg.dp, generator,
                               noise, cfg.bins);
  } else if (method == "nonprivate-rag") {
    report = RunNonPrivateRag(data.queries, data.corpus, cfg.nonprivate_k, generator,
                              cfg.dp.max_tokens, cfg.bins, cfg.dp.RetrievalSize());
  } else if (method == "non-rag") {
    report = RunNonPrivateRag(data.queries, data.corpus, 0, generator, cfg.dp.max_tokens,
                              cfg.bins, cfg.dp.RetrievalSize());
  } else {
    throw ConfigError("method '" + method + "' cannot be run as a query workload");
  }
  report.seed = seed;
  CheckClaim(cfg, report, data.queries.size());
  return report;
}

inline std::string SeedSuffix(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.num_seeds == 1 ? std::string() : "-" + std::to_string(seed);
}

inline std::string JoinPath(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void EnsureDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string AttackCsv(const AttackReport& report) {
  std::string out = "candidate_id,member,score\n";
  for (const auto& c : report.candidates) {
    out += c.id + ',' + (c.member ? "1" : "0") + ',' + FormatNumber(c.score) + '\n';
  }
  return out;
}

inline std::string AttackJson(const AttackReport& report) {
  nlohmann::ordered_json j;
  j["auc"] = report.roc.auc;
  auto points = nlohmann::ordered_json::array();
  for (const auto& p : report.roc.points) points.push_back({p.fpr, p.tpr});
  j["points"] = points;
  return j.dump() + "\n";
}

inline AttackConfig ResolveAttackConfig(const ExperimentConfig& cfg, std::uint64_t seed) {
  AttackConfig a = cfg.attack;
  a.seed = seed;
  a.dim = cfg.workload.dim;
  a.vocab_size = cfg.workload.vocab_size;
  a.max_answer_len = cfg.workload.max_answer_len;
  a.murag = cfg.murag;
  a.ada = cfg.ada;
  a.max_tokens = cfg.dp.max_tokens;
  // The adversary's system has no parametric knowledge of candidate facts.
  a.stub = cfg.generator.stub;
  a.stub.p_base = 0.0;
  a.stub.vocab_size = cfg.workload.vocab_size;
  return a;
}

// Runs the attack for every seed; writes attack.csv and attack.json.
inline std::vector<AttackReport> RunAttackExperiment(const ExperimentConfig& cfg) {
  EnsureDir(cfg.out_dir);
  std::vector<AttackReport> reports;
  for (std::size_t s = 0; s < cfg.num_seeds; ++s) {
    const std::uint64_t seed = cfg.seed + s;
    AttackReport r = RunAttack(ResolveAttackConfig(cfg, seed), cfg.noiseless);
    const std::string suffix = SeedSuffix(cfg, seed);
    WriteTextFile(JoinPath(cfg.out_dir, "attack" + suffix + ".csv"), AttackCsv(r));
    WriteTextFile(JoinPath(cfg.out_dir, "attack" + suffix + ".json"), AttackJson(r));
    reports.push_back(std::move(r));
  }
  return reports;
}

// Runs cfg.method for every seed; writes report.jsonl, summary.csv and (for
// filter methods) charges.jsonl.
inline std::vector<RunReport> RunExperiment(const ExperimentConfig& cfg) {
  if (cfg.method == "attack") {
    RunAttackExperiment(cfg);
    return {};
  }
  EnsureDir(cfg.out_dir);
  std::vector<RunReport> reports;
  std::ostringstream report_lines;
  for (std::size_t s = 0; s < cfg.num_seeds; ++s) {
    const std::uint64_t seed = cfg.seed + s;
    const LoadedData data = LoadData(cfg, seed);
    auto generator = MakeGenerator(cfg, seed);
    RunReport r = RunMethod(cfg, cfg.method, seed, data, *generator);
    WriteReportJsonl(r, report_lines);
    if (cfg.method == "murag" || cfg.method == "murag-ada") {
      std::ostringstream charges;
      WriteChargeLogJsonl(r.charge_log, charges);
      WriteTextFile(JoinPath(cfg.out_dir, "charges" + SeedSuffix(cfg, seed) + ".jsonl"),
                    charges.str());
    }
    reports.push_back(std::move(r));
  }
  WriteTextFile(JoinPath(cfg.out_dir, "report.jsonl"), report_lines.str());
  std::ostringstream summary;
  WriteSummaryCsv(reports, summary);
  WriteTextFile(JoinPath(cfg.out_dir, "summary.csv"), summary.str());
  return reports;
}

struct SweepCell {
  std::string method;
  std::size_t k = 0;
  double eps_token = 0.0;
  int max_retrievals = 1;
  double eps_claim = 0.0;
  double match_accuracy = 0.0;
  double retrieval_precision = 0.0;
  std::optional<double> mean_tau_abs_error;
};

// Grid over (k, eps_token, M) at fixed total budget, averaged over seeds.
// Cells whose budgets cannot be split are skipped. Writes sweep.csv with a
// trailing best-by-accuracy flag per method.
inline std::vector<SweepCell> RunSweep(const ExperimentConfig& base) {
  EnsureDir(base.out_dir);
  const std::string& method = base.method;
  if (method != "murag" && method != "murag-ada" && method != "naive") {
    throw ConfigError("sweep supports murag, murag-ada and naive");
  }
  std::vector<SweepCell> cells;
  for (std::size_t k : base.sweep.k) {
    for (double eps_token : base.sweep.eps_token) {
      for (int m : base.sweep.max_retrievals) {
        if (method == "naive" && m != base.sweep.max_retrievals.front()) continue;
        ExperimentConfig cfg = base;
        cfg.dp.voters = std::max<std::size_t>(1, k / cfg.dp.docs_per_voter);
        cfg.dp.threshold = cfg.threshold_fraction * static_cast<double>(cfg.dp.voters);
        cfg.dp.eps_token = EpsilonAmount::FromDouble(eps_token);
        const double eps_q = base.sweep_eps_total / m;
        cfg.murag.max_retrievals = m;
        cfg.murag.eps_q = EpsilonAmount::FromDouble(eps_q);
        cfg.ada.max_retrievals = m;
        cfg.ada.eps_rag = EpsilonAmount::FromMicro(
            std::max<std::int64_t>(0, EpsilonAmount::FromDouble(eps_q).micro() -
                                          cfg.ada.eps_thr.micro()));
        cfg.murag.dp = cfg.dp;
        cfg.ada.dp = cfg.dp;
        try {
          if (method == "murag") cfg.murag.Validate();
          if (method == "murag-ada") cfg.ada.Validate();
          if (method == "naive") {
            DpRagParams p = cfg.dp;
            p.eps_total = cfg.naive_eps_q;
            p.Validate();
          }
        } catch (const Error&) {
          continue;
        }
        SweepCell cell{method, k, eps_token, m, 0.0, 0.0, 0.0, std::nullopt};
        double tau_sum = 0.0;
        for (std::size_t s = 0; s < cfg.num_seeds; ++s) {
          const std::uint64_t seed = cfg.seed + s;
          const LoadedData data = LoadData(cfg, seed);
          auto generator = MakeGenerator(cfg, seed);
          const RunReport r = RunMethod(cfg, method, seed, data, *generator);
          cell.eps_claim = r.claim.epsilon;
          cell.match_accuracy += r.match_accuracy / static_cast<double>(cfg.num_seeds);
          cell.retrieval_precision += r.retrieval_precision / static_cast<double>(cfg.num_seeds);
          if (r.mean_tau_abs_error) tau_sum += *r.mean_tau_abs_error;
        }
        if (method == "murag-ada") cell.mean_tau_abs_error = tau_sum / cfg.num_seeds;
        cells.push_back(cell);
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (cells[i].match_accuracy > cells[best].match_accuracy) best = i;
  }
  std::string csv =
      "method,k,eps_token,max_retrievals,eps_claim,match_accuracy,retrieval_precision,"
      "mean_tau_abs_error,best\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& c = cells[i];
    csv += c.method + ',' + std::to_string(c.k) + ',' + FormatNumber(c.eps_token) + ',' +
           std::to_string(c.max_retrievals) + ',' + FormatNumber(c.eps_claim) + ',' +
           FormatNumber(c.match_accuracy) + ',' + FormatNumber(c.retrieval_precision) + ',' +
           (c.mean_tau_abs_error ? FormatNumber(*c.mean_tau_abs_error) : "") + ',' +
           (i == best ? "1" : "0") + '\n';
  }
  WriteTextFile(JoinPath(base.out_dir, "sweep.csv"), csv);
  return cells;
}

struct TauStudyRow {
  double eps_thr = 0.0;
  double mean_tau_abs_error = 0.0;
  std::size_t queries = 0;
};

// Mean |tau_t - exact top-k threshold| of MuRAG-Ada per eps_thr, pooled over
// queries and seeds. Writes tau_study.csv.
inline std::vector<TauStudyRow> RunTauStudy(const ExperimentConfig& base) {
  EnsureDir(base.out_dir);
  std::vector<TauStudyRow> rows;
  for (double eps_thr : base.tau_study_eps_thr) {
    ExperimentConfig cfg = base;
    cfg.ada.eps_thr = EpsilonAmount::FromDouble(eps_thr);
    try {
      cfg.ada.Validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("config tau_study: ") + e.what());
    }
    TauStudyRow row{eps_thr, 0.0, 0};
    double sum = 0.0;
    for (std::size_t s = 0; s < cfg.num_seeds; ++s) {
      const std::uint64_t seed = cfg.seed + s;
      const LoadedData data = LoadData(cfg, seed);
      auto generator = MakeGenerator(cfg, seed);
      const RunReport r = RunMethod(cfg, "murag-ada", seed, data, *generator);
      for (const auto& q : r.queries) {
        sum += std::fabs(*q.tau - *q.tau_exact);
        ++row.queries;
      }
    }
    row.mean_tau_abs_error = row.queries ? sum / static_cast<double>(row.queries) : 0.0;
    rows.push_back(row);
  }
  std::string csv = "eps_thr,mean_tau_abs_error,queries\n";
  for (const auto& r : rows) {
    csv += FormatNumber(r.eps_thr) + ',' + FormatNumber(r.mean_tau_abs_error) + ',' +
           std::to_string(r.queries) + '\n';
  }
  WriteTextFile(JoinPath(base.out_dir, "tau_study.csv"), csv);
  return rows;
}

// Writes corpus.jsonl and queries.jsonl for the configured synthetic workload.
inline void GenerateWorkloadFiles(const ExperimentConfig& cfg) {
  EnsureDir(cfg.out_dir);
  WorkloadSpec spec = cfg.workload;
  if (!cfg.workload_seed_fixed) spec.seed = cfg.seed;
  const Workload w = GenerateSyntheticWorkload(spec);
  std::ostringstream corpus;
  WriteDocumentsJsonl(w.corpus.documents(), corpus);
  WriteTextFile(JoinPath(cfg.out_dir, "corpus.jsonl"), corpus.str());
  std::ostringstream queries;
  WriteQueriesJsonl(w.queries, queries);
  WriteTextFile(JoinPath(cfg.out_dir, "queries.jsonl"), queries.str());
}

}  // namespace murag

#endif  // MURAG_EXPERIMENT_HPP_
