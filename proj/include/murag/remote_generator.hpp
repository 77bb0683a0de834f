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

#ifndef MURAG_REMOTE_GENERATOR_HPP_
#define MURAG_REMOTE_GENERATOR_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "httplib.h"
#include "nlohmann/json.hpp"
#include "murag/corpus.hpp"
#include "murag/errors.hpp"
#include "murag/generator.hpp"

namespace murag {

struct RemoteGeneratorConfig {
  // e.g. "http://127.0.0.1:8080/next_token"
  std::string endpoint;
  std::size_t vocab_size = 256;
  int timeout_ms = 5000;
  // Extra attempts after the first one on retriable failures.
  int retries = 2;
};

// Treats an HTTP service as an opaque deterministic generator.
//   request:  {"query_tokens": [...], "context_token_lists": [[...], ...],
//              "prefix_tokens": [...]}
//   response: {"token": <non-negative integer>}
// Transport failures, timeouts and 5xx/408/429 answers are retriable; any
// other status or a malformed body is a ProtocolError.
class RemoteGenerator final : public TokenGenerator {
 public:
  explicit RemoteGenerator(RemoteGeneratorConfig config) : config_(std::move(config)) {
    Require(config_.vocab_size >= 2, "vocabulary needs at least two tokens");
    Require(config_.retries >= 0, "retries must be non-negative");
    Require(config_.timeout_ms > 0, "timeout must be positive");
    const auto scheme_end = config_.endpoint.find("://");
    Require(scheme_end != std::string::npos, "endpoint must look like http://host:port/path");
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    base_ = config_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
    client_ = std::make_unique<httplib::Client>(base_);
    const auto sec = config_.timeout_ms / 1000;
    const auto usec = (config_.timeout_ms % 1000) * 1000;
    client_->set_connection_timeout(sec, usec);
    client_->set_read_timeout(sec, usec);
    client_->set_write_timeout(sec, usec);
  }

  Token NextToken(const QueryRecord& query, std::span<const Document> context,
                  std::span<const Token> prefix) override {
    nlohmann::json body;
    body["query_tokens"] = query.tokens;
    auto lists = nlohmann::json::array();
    for (const Document& doc : context) lists.push_back(doc.tokens);
    body["context_token_lists"] = std::move(lists);
    body["prefix_tokens"] = std::vector<Token>(prefix.begin(), prefix.end());
    const std::string payload = body.dump();
    for (int attempt = 0;; ++attempt) {
      try {
        return RequestOnce(payload);
      } catch (const RetriableError&) {
        if (attempt >= config_.retries) throw;
      }
    }
  }

  std::size_t vocab_size() const override { return config_.vocab_size; }

 private:
  Token RequestOnce(const std::string& payload) {
    auto res = client_->Post(path_, payload, "application/json");
    if (!res) {
      throw RetriableError("request to " + config_.endpoint + " failed: " +
                           httplib::to_string(res.error()));
    }
    if (res->status >= 500 || res->status == 408 || res->status == 429) {
      throw RetriableError("generator answered HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw ProtocolError("generator answered HTTP " + std::to_string(res->status));
    }
    const auto parsed = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw ProtocolError("generator response is not a JSON object");
    }
    const auto it = parsed.find("token");
    if (it == parsed.end() || !it->is_number_integer() || it->get<long long>() < 0) {
      throw ProtocolError("generator response lacks a non-negative integer \"token\"");
    }
    const auto token = it->get<unsigned long long>();
    if (token >= config_.vocab_size) {
      throw ProtocolError("generator token " + std::to_string(token) + " outside vocabulary");
    }
    return static_cast<Token>(token);
  }

  RemoteGeneratorConfig config_;
  std::string base_;
  std::string path_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace murag

#endif  // MURAG_REMOTE_GENERATOR_HPP_
