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

#ifndef MURAG_LEDGER_HPP_
#define MURAG_LEDGER_HPP_

#include <cstddef>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlohmann/json.hpp"
#include "murag/epsilon.hpp"
#include "murag/errors.hpp"

namespace murag {

struct ChargeRecord {
  std::size_t query_index = 0;
  std::string doc_id;
  EpsilonAmount amount;

  friend bool operator==(const ChargeRecord&, const ChargeRecord&) = default;
};

// Individual privacy filter: every document starts with M * eps_q and may only
// be charged while its remaining budget covers the charge. Balances are
// integer micro-epsilon and never go negative.
class BudgetLedger {
 public:
  BudgetLedger(std::span<const std::string> doc_ids, int max_retrievals,
               EpsilonAmount eps_q)
      : max_retrievals_(max_retrievals), eps_q_(eps_q) {
    Require(max_retrievals >= 1, "M must be at least 1");
    Require(!eps_q.is_zero(), "eps_q must be positive");
    Require(!doc_ids.empty(), "ledger needs at least one document");
    initial_ = eps_q * max_retrievals;
    for (const auto& id : doc_ids) {
      if (!remaining_.emplace(id, initial_).second) {
        throw PreconditionError("duplicate document id in ledger: " + id);
      }
    }
  }

  // Rebuilds a ledger from scratch and re-applies a charge log.
  static BudgetLedger Replay(std::span<const std::string> doc_ids, int max_retrievals,
                             EpsilonAmount eps_q, std::span<const ChargeRecord> log) {
    BudgetLedger ledger(doc_ids, max_retrievals, eps_q);
    for (const auto& record : log) {
      const std::string id[] = {record.doc_id};
      ledger.Charge(id, record.amount, record.query_index);
    }
    return ledger;
  }

  // True when the document exists and has at least `required` left.
  bool Admits(const std::string& doc_id, EpsilonAmount required) const {
    auto it = remaining_.find(doc_id);
    return it != remaining_.end() && it->second >= required;
  }

  // Ids with remaining >= required, in ascending id order.
  std::vector<std::string> ActiveSet(EpsilonAmount required) const {
    std::vector<std::string> active;
    for (const auto& [id, left] : remaining_) {
      if (left >= required) active.push_back(id);
    }
    return active;
  }

  // All-or-nothing: every id is checked before any balance moves.
  void Charge(std::span<const std::string> doc_ids, EpsilonAmount amount,
              std::size_t query_index) {
    std::set<std::string_view> seen;
    for (const auto& id : doc_ids) {
      auto it = remaining_.find(id);
      if (it == remaining_.end()) {
        throw FilterViolation("charge to unknown document '" + id + "'");
      }
      if (it->second < amount) {
        throw FilterViolation("privacy filter violated for document '" + id +
                              "': remaining " + std::to_string(it->second.micro()) +
                              " micro-eps < charge " + std::to_string(amount.micro()));
      }
      if (!seen.insert(id).second) {
        throw PreconditionError("document '" + id + "' listed twice in one charge");
      }
    }
    for (const auto& id : doc_ids) {
      remaining_.find(id)->second -= amount;
      log_.push_back({query_index, id, amount});
    }
  }

  EpsilonAmount Remaining(const std::string& doc_id) const {
    auto it = remaining_.find(doc_id);
    if (it == remaining_.end()) throw PreconditionError("unknown document '" + doc_id + "'");
    return it->second;
  }

  // The whole run is (M * eps_q)-DP: per-document (inf, eps)-RDP is pure eps-DP.
  EpsilonAmount TotalPrivacyClaim() const { return initial_; }

  EpsilonAmount initial_per_doc() const { return initial_; }
  int max_retrievals() const { return max_retrievals_; }
  EpsilonAmount eps_q() const { return eps_q_; }
  const std::vector<ChargeRecord>& charge_log() const { return log_; }
  const std::map<std::string, EpsilonAmount>& balances() const { return remaining_; }

 private:
  int max_retrievals_;
  EpsilonAmount eps_q_;
  EpsilonAmount initial_;
  std::map<std::string, EpsilonAmount> remaining_;
  std::vector<ChargeRecord> log_;
};

// One JSON object per line: {"query_index", "doc_id", "micro_eps"}.
inline void WriteChargeLogJsonl(std::span<const ChargeRecord> log, std::ostream& out) {
  for (const auto& record : log) {
    nlohmann::ordered_json line;
    line["query_index"] = record.query_index;
    line["doc_id"] = record.doc_id;
    line["micro_eps"] = record.amount.micro();
    out << line.dump() << '\n';
  }
}

}  // namespace murag

#endif  // MURAG_LEDGER_HPP_
