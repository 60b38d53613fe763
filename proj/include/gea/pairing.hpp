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

#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>

#include "gea/domain.hpp"

namespace gea {

/// Generators whose output covers all 64 bits. std::mt19937_64 qualifies.
template <typename G>
concept Rng64 = std::uniform_random_bit_generator<G> && G::min() == 0 &&
                G::max() == std::numeric_limits<std::uint64_t>::max();

/// Uniform integer in [0, n). Rejection sampling over the raw generator output,
/// so seeded sequences are identical on every standard library.
template <Rng64 G>
std::uint64_t uniform_index(G& rng, std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kDomainError, "uniform_index over an empty range");
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  // Number of raw values that must be rejected: (2^64) mod n.
  const std::uint64_t reject = (kMax % n + 1) % n;
  while (true) {
    const std::uint64_t r = rng();
    if (reject == 0 || r <= kMax - reject) return r % n;
  }
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
template <Rng64 G>
double uniform01(G& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <Rng64 G>
bool bernoulli(G& rng, double p) {
  return uniform01(rng) < p;
}

/// Which role sits at screen position A. Position B holds the other role.
struct LabelAssignment {
  Role at_a = Role::kLarge;

  [[nodiscard]] Role role_at(Position p) const { return p == Position::kA ? at_a : other(at_a); }
  [[nodiscard]] Position position_of(Role r) const {
    return at_a == r ? Position::kA : Position::kB;
  }

  friend bool operator==(const LabelAssignment&, const LabelAssignment&) = default;
};

struct BattleSetup {
  BattlePair pair;
  LabelAssignment labels;
  std::optional<std::uint64_t> rng_seed_used;

  [[nodiscard]] const ModelRef& model_at(Position p) const {
    return pair.member(labels.role_at(p));
  }

  friend bool operator==(const BattleSetup&, const BattleSetup&) = default;
};

template <Rng64 G>
const ModelFamily& select_family(const FamilyRegistry& registry, G& rng) {
  if (registry.empty()) throw Error(ErrorCode::kEmptyRegistry, "no families to choose from");
  auto it = registry.families.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(uniform_index(rng, registry.size())));
  return it->second;
}

/// Uniform over all unordered member pairs; the higher-ranked member is L.
template <Rng64 G>
BattlePair select_pair(const ModelFamily& family, G& rng) {
  const std::uint64_t k = family.members.size();
  if (k < 2) throw Error(ErrorCode::kFamilyTooSmall, family.family_id);
  std::uint64_t idx = uniform_index(rng, k * (k - 1) / 2);
  // Walk the rows of the upper triangle: row i holds pairs (i, i+1..k-1).
  std::uint64_t i = 0;
  while (idx >= k - 1 - i) {
    idx -= k - 1 - i;
    ++i;
  }
  return BattlePair(family, i, i + 1 + idx);
}

template <Rng64 G>
LabelAssignment assign_labels(const BattlePair& /*pair*/, G& rng) {
  return LabelAssignment{uniform_index(rng, 2) == 0 ? Role::kLarge : Role::kSmall};
}

template <Rng64 G>
BattleSetup select_battle(const FamilyRegistry& registry, G& rng,
                          std::optional<std::uint64_t> seed_used = std::nullopt) {
  const ModelFamily& family = select_family(registry, rng);
  BattlePair pair = select_pair(family, rng);
  LabelAssignment labels = assign_labels(pair, rng);
  return BattleSetup{std::move(pair), labels, seed_used};
}

}  // namespace gea
