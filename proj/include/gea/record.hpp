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

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gea/domain.hpp"
#include "gea/timeutil.hpp"

namespace gea {

inline constexpr int kRecordSchemaVersion = 1;

/// A vote expressed in roles rather than screen positions.
enum class RoleOutcome { kLarge, kSmall, kTie };

constexpr std::string_view to_string(RoleOutcome r) {
  switch (r) {
    case RoleOutcome::kLarge: return "L";
    case RoleOutcome::kSmall: return "S";
    case RoleOutcome::kTie: return "TIE";
  }
  return "?";
}

inline std::optional<RoleOutcome> parse_role_outcome(std::string_view s) {
  if (s == "L") return RoleOutcome::kLarge;
  if (s == "S") return RoleOutcome::kSmall;
  if (s == "TIE") return RoleOutcome::kTie;
  return std::nullopt;
}

constexpr RoleOutcome resolve_role(VoteChoice choice, Position label_of_large) {
  if (choice == VoteChoice::kTie) return RoleOutcome::kTie;
  return choice == to_choice(label_of_large) ? RoleOutcome::kLarge : RoleOutcome::kSmall;
}

/// One completed battle as persisted in the vote log. Every metric can be
/// recomputed from a sequence of these alone.
struct BattleRecord {
  int schema_version = kRecordSchemaVersion;
  std::string session_id;
  TimePoint timestamp_utc{};
  std::string family_id;
  std::string large_model_id;
  std::string small_model_id;
  Position label_of_large = Position::kA;
  std::string question;
  std::string response_text_large;
  std::string response_text_small;
  json generation_params = json::object();
  VoteChoice initial_choice = VoteChoice::kTie;
  RoleOutcome initial_role = RoleOutcome::kTie;
  bool energy_prompt_shown = false;
  std::optional<EnergyDecision> energy_decision;
  VoteChoice final_choice = VoteChoice::kTie;
  RoleOutcome final_role = RoleOutcome::kTie;
  bool reversed = false;
  std::optional<std::string> question_category;
  std::optional<std::string> user_tag;

  friend bool operator==(const BattleRecord&, const BattleRecord&) = default;
};

/// Key order here is the on-disk key order.
inline constexpr std::array<std::string_view, 20> kRecordKeys = {
    "schema_version",      "session_id",          "timestamp_utc",      "family_id",
    "large_model_id",      "small_model_id",      "label_of_large",     "question",
    "response_text_large", "response_text_small", "generation_params",  "initial_choice",
    "initial_role",        "energy_prompt_shown", "energy_decision",    "final_choice",
    "final_role",          "reversed",            "question_category",  "user_tag"};

inline nlohmann::ordered_json to_json(const BattleRecord& r) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<std::string>& s) -> nlohmann::ordered_json {
    return s ? nlohmann::ordered_json(*s) : nlohmann::ordered_json(nullptr);
  };
  j["schema_version"] = r.schema_version;
  j["session_id"] = r.session_id;
  j["timestamp_utc"] = format_rfc3339_ms(r.timestamp_utc);
  j["family_id"] = r.family_id;
  j["large_model_id"] = r.large_model_id;
  j["small_model_id"] = r.small_model_id;
  j["label_of_large"] = to_string(r.label_of_large);
  j["question"] = r.question;
  j["response_text_large"] = r.response_text_large;
  j["response_text_small"] = r.response_text_small;
  j["generation_params"] = nlohmann::ordered_json::parse(r.generation_params.dump());
  j["initial_choice"] = to_string(r.initial_choice);
  j["initial_role"] = to_string(r.initial_role);
  j["energy_prompt_shown"] = r.energy_prompt_shown;
  j["energy_decision"] = r.energy_decision ? nlohmann::ordered_json(to_string(*r.energy_decision))
                                           : nlohmann::ordered_json(nullptr);
  j["final_choice"] = to_string(r.final_choice);
  j["final_role"] = to_string(r.final_role);
  j["reversed"] = r.reversed;
  j["question_category"] = opt(r.question_category);
  j["user_tag"] = opt(r.user_tag);
  return j;
}

/// One log line, without the trailing newline. json::dump escapes control
/// characters, so the result never contains a raw LF.
inline std::string serialize_record(const BattleRecord& r) {
  return to_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

namespace detail {

[[noreturn]] inline void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedLine, what);
}

inline const json& field(const json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end()) malformed("missing key '" + std::string(key) + "'");
  return *it;
}

inline std::string string_field(const json& j, std::string_view key) {
  const json& v = field(j, key);
  if (!v.is_string()) malformed("'" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

inline bool bool_field(const json& j, std::string_view key) {
  const json& v = field(j, key);
  if (!v.is_boolean()) malformed("'" + std::string(key) + "' must be a boolean");
  return v.get<bool>();
}

inline std::optional<std::string> optional_string_field(const json& j, std::string_view key) {
  const json& v = field(j, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) malformed("'" + std::string(key) + "' must be a string or null");
  return v.get<std::string>();
}

template <typename T, typename Parse>
T enum_field(const json& j, std::string_view key, Parse parse) {
  auto parsed = parse(string_field(j, key));
  if (!parsed) malformed("'" + std::string(key) + "' has an unknown value");
  return *parsed;
}

}  // namespace detail

/// Structural decoding: every key present, no unknown keys, types and
/// enumerations valid. Semantic invariants are checked by record_violations.
inline BattleRecord record_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) malformed("record is not a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kRecordKeys.begin(), kRecordKeys.end(), key) == kRecordKeys.end()) {
      malformed("unknown key '" + key + "'");
    }
  }
  BattleRecord r;
  const json& version = field(j, "schema_version");
  if (!version.is_number_integer()) malformed("'schema_version' must be an integer");
  r.schema_version = version.get<int>();
  r.session_id = string_field(j, "session_id");
  auto ts = parse_rfc3339_ms(string_field(j, "timestamp_utc"));
  if (!ts) malformed("'timestamp_utc' is not RFC 3339 UTC with milliseconds");
  r.timestamp_utc = *ts;
  r.family_id = string_field(j, "family_id");
  r.large_model_id = string_field(j, "large_model_id");
  r.small_model_id = string_field(j, "small_model_id");
  r.label_of_large = enum_field<Position>(j, "label_of_large", parse_position);
  r.question = string_field(j, "question");
  r.response_text_large = string_field(j, "response_text_large");
  r.response_text_small = string_field(j, "response_text_small");
  r.generation_params = field(j, "generation_params");
  if (!r.generation_params.is_object()) malformed("'generation_params' must be an object");
  r.initial_choice = enum_field<VoteChoice>(j, "initial_choice", parse_vote_choice);
  r.initial_role = enum_field<RoleOutcome>(j, "initial_role", parse_role_outcome);
  r.energy_prompt_shown = bool_field(j, "energy_prompt_shown");
  const json& decision = field(j, "energy_decision");
  if (!decision.is_null()) {
    r.energy_decision = enum_field<EnergyDecision>(j, "energy_decision", parse_energy_decision);
  }
  r.final_choice = enum_field<VoteChoice>(j, "final_choice", parse_vote_choice);
  r.final_role = enum_field<RoleOutcome>(j, "final_role", parse_role_outcome);
  r.reversed = bool_field(j, "reversed");
  r.question_category = optional_string_field(j, "question_category");
  r.user_tag = optional_string_field(j, "user_tag");
  return r;
}

inline BattleRecord parse_record(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    detail::malformed(e.what());
  }
  return record_from_json(j);
}

/// Every violated record invariant, as human-readable strings. Empty means valid.
inline std::vector<std::string> record_violations(const BattleRecord& r) {
  std::vector<std::string> out;
  if (r.schema_version != kRecordSchemaVersion) {
    out.push_back("unsupported schema_version " + std::to_string(r.schema_version));
    return out;
  }
  if (r.session_id.empty()) out.emplace_back("empty session_id");
  if (r.family_id.empty()) out.emplace_back("empty family_id");
  if (r.large_model_id.empty() || r.small_model_id.empty()) out.emplace_back("empty model id");
  if (r.initial_role != resolve_role(r.initial_choice, r.label_of_large)) {
    out.emplace_back("initial_role inconsistent with initial_choice and label_of_large");
  }
  if (r.final_role != resolve_role(r.final_choice, r.label_of_large)) {
    out.emplace_back("final_role inconsistent with final_choice and label_of_large");
  }
  if ((r.initial_role == RoleOutcome::kLarge) != r.energy_prompt_shown) {
    out.emplace_back("energy_prompt_shown must hold exactly when initial_role = L");
  }
  if (r.energy_decision.has_value() != r.energy_prompt_shown) {
    out.emplace_back("energy_decision must be set exactly when the energy prompt was shown");
  }
  if (r.reversed != (r.energy_decision == EnergyDecision::kSwitch)) {
    out.emplace_back("reversed must equal (energy_decision = SWITCH)");
  }
  if (r.reversed &&
      !(r.energy_prompt_shown && r.initial_role == RoleOutcome::kLarge &&
        r.final_role == RoleOutcome::kSmall)) {
    out.emplace_back("reversed requires prompt shown, initial_role = L and final_role = S");
  }
  if (!r.reversed && r.final_choice != r.initial_choice) {
    out.emplace_back("final_choice differs from initial_choice without a reversal");
  }
  return out;
}

}  // namespace gea
