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

// File formats. Corpus and query files are JSONL; run outputs are JSONL
// (per query and per charge) plus a one-row-per-run CSV summary. Numbers are
// printed with a fixed format so identical runs produce identical bytes.

#ifndef MURAG_IO_HPP_
#define MURAG_IO_HPP_

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "murag/corpus.hpp"
#include "murag/errors.hpp"
#include "murag/ledger.hpp"
#include "murag/orchestrators.hpp"
#include "nlohmann/json.hpp"

namespace murag {

namespace io_internal {

using nlohmann::json;

inline std::vector<Token> ReadTokens(const json& j, const char* what) {
  if (!j.is_array()) throw Error(std::string(what) + " must be an integer array");
  std::vector<Token> out;
  out.reserve(j.size());
  for (const auto& t : j) {
    if (!t.is_number_integer() || t.get<std::int64_t>() < 0 ||
        t.get<std::int64_t>() > static_cast<std::int64_t>(UINT32_MAX)) {
      throw Error(std::string(what) + " must hold non-negative integers");
    }
    out.push_back(t.get<Token>());
  }
  return out;
}

inline std::vector<double> ReadEmbedding(const json& j) {
  if (!j.is_array()) throw Error("embedding must be a number array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw Error("embedding must be a number array");
    out.push_back(x.get<double>());
  }
  return out;
}

inline const json& Field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw Error(std::string("missing field '") + name + "'");
  return *it;
}

inline void CheckKeys(const json& obj, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw Error("unknown field '" + it.key() + "'");
  }
}

template <typename Fn>
void ForEachLine(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const std::exception& e) {
      throw Error(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

inline std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  return out;
}

}  // namespace io_internal

// Shortest round-trip representation; "inf" for unbounded values.
inline std::string FormatNumber(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Corpus and query files.

// fact is [key, token] or [key, [tokens...]].
inline Document DocumentFromJson(const nlohmann::json& j) {
  using namespace io_internal;
  if (!j.is_object()) throw Error("document line must be an object");
  CheckKeys(j, {"id", "tokens", "embedding", "fact"});
  Document doc;
  doc.id = Field(j, "id").get<std::string>();
  doc.tokens = ReadTokens(Field(j, "tokens"), "tokens");
  doc.embedding = ReadEmbedding(Field(j, "embedding"));
  if (auto it = j.find("fact"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_string()) {
      throw Error("fact must be [string, integer] or [string, integer array]");
    }
    Fact fact;
    fact.key = (*it)[0].get<std::string>();
    if ((*it)[1].is_array()) {
      fact.answer = ReadTokens((*it)[1], "fact answer");
    } else {
      fact.answer = ReadTokens(json::array({(*it)[1]}), "fact answer");
    }
    if (fact.answer.empty()) throw Error("fact answer must be non-empty");
    doc.fact = std::move(fact);
  }
  return doc;
}

inline nlohmann::ordered_json DocumentToJson(const Document& doc) {
  nlohmann::ordered_json j;
  j["id"] = doc.id;
  j["tokens"] = doc.tokens;
  j["embedding"] = doc.embedding;
  if (doc.fact) {
    if (doc.fact->answer.size() == 1) {
      j["fact"] = nlohmann::ordered_json::array({doc.fact->key, doc.fact->answer[0]});
    } else {
      j["fact"] = nlohmann::ordered_json::array({doc.fact->key, doc.fact->answer});
    }
  }
  return j;
}

inline QueryRecord QueryFromJson(const nlohmann::json& j) {
  using namespace io_internal;
  if (!j.is_object()) throw Error("query line must be an object");
  CheckKeys(j, {"id", "tokens", "embedding", "answers", "group", "fact_key"});
  QueryRecord q;
  q.id = Field(j, "id").get<std::string>();
  q.tokens = ReadTokens(Field(j, "tokens"), "tokens");
  q.embedding = ReadEmbedding(Field(j, "embedding"));
  const json& answers = Field(j, "answers");
  if (!answers.is_array() || answers.empty()) throw Error("answers must be a non-empty array");
  for (const auto& a : answers) q.answers.push_back(ReadTokens(a, "answer"));
  if (auto it = j.find("group"); it != j.end() && !it->is_null()) {
    q.group = it->get<std::string>();
  }
  if (auto it = j.find("fact_key"); it != j.end() && !it->is_null()) {
    q.fact_key = it->get<std::string>();
  }
  return q;
}

inline nlohmann::ordered_json QueryToJson(const QueryRecord& q) {
  nlohmann::ordered_json j;
  j["id"] = q.id;
  j["tokens"] = q.tokens;
  j["embedding"] = q.embedding;
  j["answers"] = q.answers;
  if (q.group) j["group"] = *q.group;
  if (!q.fact_key.empty()) j["fact_key"] = q.fact_key;
  return j;
}

inline std::vector<Document> ReadDocumentsJsonl(std::istream& in,
                                                const std::string& source = "corpus") {
  std::vector<Document> docs;
  io_internal::ForEachLine(in, source, [&](const nlohmann::json& j) {
    docs.push_back(DocumentFromJson(j));
  });
  return docs;
}

inline Corpus ReadCorpusFile(const std::string& path) {
  auto in = io_internal::OpenIn(path);
  return Corpus(ReadDocumentsJsonl(in, path));
}

inline std::vector<QueryRecord> ReadQueriesJsonl(std::istream& in,
                                                 const std::string& source = "queries") {
  std::vector<QueryRecord> queries;
  io_internal::ForEachLine(in, source, [&](const nlohmann::json& j) {
    queries.push_back(QueryFromJson(j));
  });
  return queries;
}

inline std::vector<QueryRecord> ReadQueriesFile(const std::string& path) {
  auto in = io_internal::OpenIn(path);
  return ReadQueriesJsonl(in, path);
}

inline void WriteDocumentsJsonl(std::span<const Document> docs, std::ostream& out) {
  for (const auto& d : docs) out << DocumentToJson(d).dump() << '\n';
}

inline void WriteQueriesJsonl(std::span<const QueryRecord> queries, std::ostream& out) {
  for (const auto& q : queries) out << QueryToJson(q).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Run outputs.

inline void WriteReportJsonl(const RunReport& report, std::ostream& out) {
  for (std::size_t i = 0; i < report.queries.size(); ++i) {
    const QueryOutcome& q = report.queries[i];
    nlohmann::ordered_json j;
    j["method"] = report.method;
    j["seed"] = report.seed;
    j["query_index"] = i;
    j["query_id"] = q.query_id;
    j["answer"] = q.answer;
    j["match"] = q.match;
    j["precision"] = q.precision;
    j["discoveries"] = q.discoveries;
    j["tau"] = q.tau ? nlohmann::ordered_json(*q.tau) : nlohmann::ordered_json(nullptr);
    j["tau_exact"] =
        q.tau_exact ? nlohmann::ordered_json(*q.tau_exact) : nlohmann::ordered_json(nullptr);
    j["retrieved"] = q.retrieved;
    j["context"] = q.context;
    out << j.dump() << '\n';
  }
}

inline const char* kSummaryHeader =
    "method,seed,eps_claim,match_accuracy,retrieval_precision,mean_tau_abs_error";

inline std::string SummaryRow(const RunReport& report) {
  std::string row = report.method;
  row += ',' + std::to_string(report.seed);
  row += ',' + (report.claim.unbounded ? std::string("inf") : FormatNumber(report.claim.epsilon));
  row += ',' + FormatNumber(report.match_accuracy);
  row += ',' + FormatNumber(report.retrieval_precision);
  row += ',';
  if (report.mean_tau_abs_error) row += FormatNumber(*report.mean_tau_abs_error);
  return row;
}

inline void WriteSummaryCsv(std::span<const RunReport> reports, std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const auto& r : reports) out << SummaryRow(r) << '\n';
}

inline void WriteTextFile(const std::string& path, const std::string& content) {
  auto out = io_internal::OpenOut(path);
  out << content;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace murag

#endif  // MURAG_IO_HPP_
