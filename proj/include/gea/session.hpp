// Copyright 2026 The Energy Arena Authors.
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

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gea/completion.hpp"
#include "gea/pairing.hpp"
#include "gea/record.hpp"
#include "gea/timeutil.hpp"

namespace gea {

enum class SessionState {
  kCreated,
  kAwaitingResponses,
  kAwaitingInitialVote,
  kAwaitingEnergyDecision,
  kCompleted,
  kFailed,
};

constexpr std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::kCreated: return "created";
    case SessionState::kAwaitingResponses: return "awaiting_responses";
    case SessionState::kAwaitingInitialVote: return "awaiting_initial_vote";
    case SessionState::kAwaitingEnergyDecision: return "awaiting_energy_decision";
    case SessionState::kCompleted: return "completed";
    case SessionState::kFailed: return "failed";
  }
  return "?";
}

constexpr bool is_terminal(SessionState s) {
  return s == SessionState::kCompleted || s == SessionState::kFailed;
}

/// One battle: a question, two blinded answers, an initial vote and, when the
/// user picked the higher-energy answer, the energy follow-up decision.
///
/// Transition functions take the session by value and return the successor,
/// so a rejected transition leaves the caller's copy untouched.
struct BattleSession {
  BattleSession(std::string id, BattleSetup battle_setup)
      : session_id(std::move(id)), setup(std::move(battle_setup)) {}

  std::string session_id;
  BattleSetup setup;
  SessionState state = SessionState::kCreated;
  std::string question;
  std::optional<ModelResponse> response_a;
  std::optional<ModelResponse> response_b;
  std::optional<VoteChoice> initial_choice;
  bool energy_prompt_shown = false;
  std::optional<EnergyDecision> energy_decision;
  std::optional<VoteChoice> final_choice;
  TimePoint created_at{};
  std::optional<TimePoint> completed_at;
  std::string failure_reason;

  // Carried into the record.
  json generation_params = json::object();
  std::optional<std::string> question_category;
  std::optional<std::string> user_tag;
  std::string language = "en";  // selects the energy prompt text

  [[nodiscard]] Position label_of_large() const {
    return setup.labels.position_of(Role::kLarge);
  }
  [[nodiscard]] const std::optional<ModelResponse>& response_at(Position p) const {
    return p == Position::kA ? response_a : response_b;
  }
};

/// 128-bit random hex identifiers. Thread-safe.
class SessionIdGenerator {
 public:
  SessionIdGenerator() : rng_(std::random_device{}() ^ (std::uint64_t{std::random_device{}()} << 32)) {}
  explicit SessionIdGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string operator()() {
    std::lock_guard lock(mu_);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id(32, '0');
    for (int half = 0; half < 2; ++half) {
      std::uint64_t v = rng_();
      for (int i = 0; i < 16; ++i) {
        id[half * 16 + i] = kHex[v & 0xf];
        v >>= 4;
      }
    }
    return id;
  }

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
};

using IdSource = std::function<std::string()>;

inline IdSource default_id_source() {
  static auto gen = std::make_shared<SessionIdGenerator>();
  return [g = gen] { return (*g)(); };
}

namespace detail {

inline void expect_state(const BattleSession& s, SessionState want, std::string_view op) {
  if (s.state != want) {
    throw Error(ErrorCode::kInvalidState, std::string(op) + " requires state " +
                                              std::string(to_string(want)) + ", session is " +
                                              std::string(to_string(s.state)));
  }
}

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

}  // namespace detail

inline BattleSession create_session(BattleSetup setup, const Clock& clock,
                                    const IdSource& ids = default_id_source()) {
  BattleSession s{ids(), std::move(setup)};
  s.created_at = clock();
  return s;
}

inline BattleSession submit_prompt(BattleSession s, std::string question) {
  detail::expect_state(s, SessionState::kCreated, "submit_prompt");
  if (detail::is_blank(question)) throw Error(ErrorCode::kEmptyQuestion, "question is empty");
  s.question = std::move(question);
  s.state = SessionState::kAwaitingResponses;
  return s;
}

inline BattleSession attach_responses(BattleSession s, ModelResponse response_a,
                                      ModelResponse response_b) {
  detail::expect_state(s, SessionState::kAwaitingResponses, "attach_responses");
  s.response_a = std::move(response_a);
  s.response_b = std::move(response_b);
  s.state = SessionState::kAwaitingInitialVote;
  return s;
}

/// Picking the higher-energy answer opens the energy follow-up; any other
/// choice (the lower-energy answer or a tie) completes the battle.
inline BattleSession cast_initial_vote(BattleSession s, VoteChoice choice, TimePoint now) {
  detail::expect_state(s, SessionState::kAwaitingInitialVote, "cast_initial_vote");
  s.initial_choice = choice;
  if (resolve_role(choice, s.label_of_large()) == RoleOutcome::kLarge) {
    s.energy_prompt_shown = true;
    s.state = SessionState::kAwaitingEnergyDecision;
  } else {
    s.final_choice = choice;
    s.state = SessionState::kCompleted;
    s.completed_at = now;
  }
  return s;
}

inline BattleSession resolve_energy_decision(BattleSession s, EnergyDecision decision,
                                             TimePoint now) {
  detail::expect_state(s, SessionState::kAwaitingEnergyDecision, "resolve_energy_decision");
  s.energy_decision = decision;
  s.final_choice = decision == EnergyDecision::kKeep
                       ? *s.initial_choice
                       : to_choice(s.setup.labels.position_of(Role::kSmall));
  s.state = SessionState::kCompleted;
  s.completed_at = now;
  return s;
}

inline BattleSession fail_session(BattleSession s, std::string reason) {
  if (s.state == SessionState::kCompleted) {
    throw Error(ErrorCode::kInvalidState, "fail_session on a completed session");
  }
  if (s.state == SessionState::kFailed) {
    throw Error(ErrorCode::kInvalidState, "session already failed");
  }
  s.state = SessionState::kFailed;
  s.failure_reason = std::move(reason);
  return s;
}

inline BattleRecord to_record(const BattleSession& s) {
  if (s.state != SessionState::kCompleted) {
    throw Error(ErrorCode::kInvalidState, "only completed sessions produce a record, session is " +
                                              std::string(to_string(s.state)));
  }
  const Position large_at = s.label_of_large();
  BattleRecord r;
  r.session_id = s.session_id;
  r.timestamp_utc = s.completed_at.value_or(s.created_at);
  r.family_id = s.setup.pair.family_id();
  r.large_model_id = s.setup.pair.large().model_id;
  r.small_model_id = s.setup.pair.small().model_id;
  r.label_of_large = large_at;
  r.question = s.question;
  r.response_text_large = s.response_at(large_at)->text;
  r.response_text_small = s.response_at(other(large_at))->text;
  r.generation_params = s.generation_params;
  r.initial_choice = *s.initial_choice;
  r.initial_role = resolve_role(r.initial_choice, large_at);
  r.energy_prompt_shown = s.energy_prompt_shown;
  r.energy_decision = s.energy_decision;
  r.final_choice = *s.final_choice;
  r.final_role = resolve_role(r.final_choice, large_at);
  r.reversed = s.energy_decision == EnergyDecision::kSwitch;
  r.question_category = s.question_category;
  r.user_tag = s.user_tag;
  return r;
}

/// Live sessions keyed by id. Each entry has its own mutex, so transitions on
/// one session are serialized while distinct sessions proceed in parallel.
class SessionTable {
 public:
  struct Entry {
    Entry(BattleSession s, TimePoint now) : session(std::move(s)), last_activity(now) {}

    std::mutex mu;
    BattleSession session;
    TimePoint last_activity;
  };

  void insert(BattleSession s, TimePoint now) {
    std::string id = s.session_id;
    auto entry = std::make_shared<Entry>(std::move(s), now);
    std::lock_guard lock(mu_);
    entries_[std::move(id)] = std::move(entry);
  }

  /// Runs `fn(BattleSession&)` under the session's lock. Returns false when
  /// the id is unknown.
  template <typename Fn>
  bool with_session(const std::string& id, TimePoint now, Fn&& fn) {
    std::shared_ptr<Entry> entry;
    {
      std::lock_guard lock(mu_);
      auto it = entries_.find(id);
      if (it == entries_.end()) return false;
      entry = it->second;
    }
    std::lock_guard lock(entry->mu);
    entry->last_activity = now;
    std::forward<Fn>(fn)(entry->session);
    return true;
  }

  [[nodiscard]] std::optional<BattleSession> snapshot(const std::string& id) {
    std::optional<BattleSession> out;
    std::shared_ptr<Entry> entry;
    {
      std::lock_guard lock(mu_);
      auto it = entries_.find(id);
      if (it == entries_.end()) return out;
      entry = it->second;
    }
    std::lock_guard lock(entry->mu);
    out = entry->session;
    return out;
  }

  /// Idle non-terminal sessions become FAILED("abandoned"); idle terminal
  /// sessions are dropped. Returns the number of sessions abandoned.
  std::size_t sweep(TimePoint now, std::chrono::milliseconds idle_timeout) {
    std::vector<std::pair<std::string, std::shared_ptr<Entry>>> all;
    {
      std::lock_guard lock(mu_);
      all.assign(entries_.begin(), entries_.end());
    }
    std::size_t abandoned = 0;
    std::vector<std::string> drop;
    for (auto& [id, entry] : all) {
      std::unique_lock lock(entry->mu, std::try_to_lock);
      if (!lock.owns_lock()) continue;  // busy means not idle
      if (now - entry->last_activity < idle_timeout) continue;
      if (is_terminal(entry->session.state)) {
        drop.push_back(id);
      } else {
        entry->session = fail_session(std::move(entry->session), "abandoned");
        entry->last_activity = now;
        ++abandoned;
      }
    }
    std::lock_guard lock(mu_);
    for (const auto& id : drop) entries_.erase(id);
    return abandoned;
  }

  [[nodiscard]] std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

}  // namespace gea
