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
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gea/error.hpp"
#include "json.hpp"

namespace gea {

using json = nlohmann::json;

/// Within a battle the higher-energy member plays kLarge, the other kSmall.
enum class Role { kLarge, kSmall };

enum class VoteChoice { kA, kB, kTie };

/// Answer to the energy follow-up question. kSwitch means the user changed
/// their vote to the lower-energy response.
enum class EnergyDecision { kKeep, kSwitch };

/// Blinded screen position.
enum class Position { kA, kB };

constexpr Role other(Role r) { return r == Role::kLarge ? Role::kSmall : Role::kLarge; }
constexpr Position other(Position p) { return p == Position::kA ? Position::kB : Position::kA; }

constexpr VoteChoice to_choice(Position p) {
  return p == Position::kA ? VoteChoice::kA : VoteChoice::kB;
}

constexpr std::string_view to_string(Role r) { return r == Role::kLarge ? "L" : "S"; }
constexpr std::string_view to_string(Position p) { return p == Position::kA ? "A" : "B"; }

constexpr std::string_view to_string(VoteChoice c) {
  switch (c) {
    case VoteChoice::kA: return "A";
    case VoteChoice::kB: return "B";
    case VoteChoice::kTie: return "TIE";
  }
  return "?";
}

constexpr std::string_view to_string(EnergyDecision d) {
  return d == EnergyDecision::kKeep ? "KEEP" : "SWITCH";
}

inline std::optional<VoteChoice> parse_vote_choice(std::string_view s) {
  if (s == "A") return VoteChoice::kA;
  if (s == "B") return VoteChoice::kB;
  if (s == "TIE") return VoteChoice::kTie;
  return std::nullopt;
}

inline std::optional<EnergyDecision> parse_energy_decision(std::string_view s) {
  if (s == "KEEP") return EnergyDecision::kKeep;
  if (s == "SWITCH") return EnergyDecision::kSwitch;
  return std::nullopt;
}

inline std::optional<Position> parse_position(std::string_view s) {
  if (s == "A") return Position::kA;
  if (s == "B") return Position::kB;
  return std::nullopt;
}

struct ModelRef {
  std::string provider_id;
  std::string model_id;
  std::string display_name;
  std::uint32_t energy_rank = 0;  // 0 = lowest energy within the family

  friend bool operator==(const ModelRef&, const ModelRef&) = default;
};

/// A set of same-lineage models of different sizes. Members are sorted by
/// strictly increasing energy_rank.
struct ModelFamily {
  std::string family_id;
  std::vector<ModelRef> members;
  json generation_params = json::object();

  friend bool operator==(const ModelFamily&, const ModelFamily&) = default;
};

struct FamilyRegistry {
  std::map<std::string, ModelFamily> families;

  [[nodiscard]] bool empty() const { return families.empty(); }
  [[nodiscard]] std::size_t size() const { return families.size(); }

  [[nodiscard]] const ModelFamily* find(std::string_view id) const {
    auto it = families.find(std::string(id));
    return it == families.end() ? nullptr : &it->second;
  }

  friend bool operator==(const FamilyRegistry&, const FamilyRegistry&) = default;
};

/// Two members of one family. Cross-family pairs cannot be built.
class BattlePair {
 public:
  BattlePair(const ModelFamily& family, std::size_t first, std::size_t second)
      : family_id_(family.family_id) {
    if (first >= family.members.size() || second >= family.members.size() ||
        first == second) {
      throw Error(ErrorCode::kDomainError, "pair indices out of range for family " +
                                               family.family_id);
    }
    const ModelRef& a = family.members[first];
    const ModelRef& b = family.members[second];
    if (a.energy_rank == b.energy_rank) {
      throw Error(ErrorCode::kDuplicateEnergyRank, "pair members share an energy rank");
    }
    large_ = a.energy_rank > b.energy_rank ? a : b;
    small_ = a.energy_rank > b.energy_rank ? b : a;
  }

  [[nodiscard]] const std::string& family_id() const { return family_id_; }
  [[nodiscard]] const ModelRef& large() const { return large_; }
  [[nodiscard]] const ModelRef& small() const { return small_; }
  [[nodiscard]] const ModelRef& member(Role r) const {
    return r == Role::kLarge ? large_ : small_;
  }

  friend bool operator==(const BattlePair&, const BattlePair&) = default;

 private:
  std::string family_id_;
  ModelRef large_;
  ModelRef small_;
};

/// Reserved for the pooled row of a metrics report.
inline constexpr std::string_view kAggregateRowId = "aggregate";

namespace detail {

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kInvalidConfig, where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) {
    throw Error(ErrorCode::kInvalidConfig, where + "/" + key + ": expected a string");
  }
  return v.get<std::string>();
}

}  // namespace detail

/// Builds a registry from the `families` array of a config document.
/// `known_providers` lists the provider ids the config declares.
inline FamilyRegistry validate_registry(const json& families_doc,
                                        const std::set<std::string>& known_providers) {
  using detail::require_string;
  if (!families_doc.is_array()) {
    throw Error(ErrorCode::kInvalidConfig, "/families: expected an array");
  }
  FamilyRegistry registry;
  for (std::size_t i = 0; i < families_doc.size(); ++i) {
    const json& f = families_doc[i];
    const std::string where = "/families/" + std::to_string(i);
    ModelFamily family;
    family.family_id = require_string(f, "family_id", where);
    if (family.family_id.empty()) {
      throw Error(ErrorCode::kInvalidConfig, where + "/family_id: empty");
    }
    if (family.family_id == kAggregateRowId) {
      throw Error(ErrorCode::kInvalidConfig,
                  where + "/family_id: '" + family.family_id + "' is reserved");
    }
    if (registry.families.contains(family.family_id)) {
      throw Error(ErrorCode::kDuplicateFamilyId, where + ": " + family.family_id);
    }
    if (f.contains("generation_params")) {
      if (!f["generation_params"].is_object()) {
        throw Error(ErrorCode::kInvalidConfig, where + "/generation_params: expected an object");
      }
      family.generation_params = f["generation_params"];
    }
    const json& members = detail::require(f, "members", where);
    if (!members.is_array()) {
      throw Error(ErrorCode::kInvalidConfig, where + "/members: expected an array");
    }
    if (members.size() < 2) {
      throw Error(ErrorCode::kFamilyTooSmall,
                  where + ": family '" + family.family_id + "' has " +
                      std::to_string(members.size()) + " member(s), needs at least 2");
    }
    std::set<std::uint32_t> ranks;
    for (std::size_t j = 0; j < members.size(); ++j) {
      const json& m = members[j];
      const std::string mwhere = where + "/members/" + std::to_string(j);
      ModelRef ref;
      ref.provider_id = require_string(m, "provider_id", mwhere);
      ref.model_id = require_string(m, "model_id", mwhere);
      if (ref.model_id.empty()) {
        throw Error(ErrorCode::kInvalidConfig, mwhere + "/model_id: empty");
      }
      ref.display_name = m.contains("display_name") ? require_string(m, "display_name", mwhere)
                                                    : ref.model_id;
      const json& rank = detail::require(m, "energy_rank", mwhere);
      if (!rank.is_number_integer() || rank.get<std::int64_t>() < 0 ||
          rank.get<std::int64_t>() > std::int64_t{UINT32_MAX}) {
        throw Error(ErrorCode::kInvalidConfig,
                    mwhere + "/energy_rank: expected a non-negative integer");
      }
      ref.energy_rank = rank.get<std::uint32_t>();
      if (!known_providers.contains(ref.provider_id)) {
        throw Error(ErrorCode::kUnknownProvider, mwhere + ": " + ref.provider_id);
      }
      if (!ranks.insert(ref.energy_rank).second) {
        throw Error(ErrorCode::kDuplicateEnergyRank,
                    mwhere + ": rank " + std::to_string(ref.energy_rank) + " repeats in family '" +
                        family.family_id + "'");
      }
      family.members.push_back(std::move(ref));
    }
    std::sort(family.members.begin(), family.members.end(),
              [](const ModelRef& a, const ModelRef& b) { return a.energy_rank < b.energy_rank; });
    registry.families.emplace(family.family_id, std::move(family));
  }
  if (registry.empty()) {
    throw Error(ErrorCode::kEmptyRegistry, "/families: no families configured");
  }
  return registry;
}

}  // namespace gea
