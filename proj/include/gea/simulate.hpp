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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gea/pairing.hpp"
#include "gea/record.hpp"
#include "gea/seed_questions.hpp"
#include "gea/session.hpp"

namespace gea {

/// Ground truth for one simulated family: initial outcome probabilities and
/// the probability that a prompted voter backs down.
struct FamilySimulation {
  std::string family_id;
  double w_large = 0.0;
  double w_small = 0.0;
  double tie = 0.0;
  double back_down = 0.0;
};

struct SimulationParams {
  std::uint64_t n = 0;
  std::vector<FamilySimulation> families;
  std::uint64_t seed = 0;
};

inline void validate_simulation(const SimulationParams& p) {
  if (p.n == 0) throw Error(ErrorCode::kDomainError, "n must be positive");
  if (p.families.empty()) throw Error(ErrorCode::kDomainError, "at least one family required");
  for (const auto& f : p.families) {
    if (f.family_id.empty() || f.family_id == kAggregateRowId) {
      throw Error(ErrorCode::kDomainError, "invalid family id '" + f.family_id + "'");
    }
    for (double v : {f.w_large, f.w_small, f.tie, f.back_down}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kDomainError, f.family_id + ": probabilities must lie in [0, 1]");
      }
    }
    if (std::abs(f.w_large + f.w_small + f.tie - 1.0) > 1e-9) {
      throw Error(ErrorCode::kDomainError, f.family_id + ": wl + ws + t must equal 1");
    }
  }
}

/// Synthetic voters driven through the real session state machine. Battle i
/// belongs to family i mod k; positions are blinded by a fair coin; each
/// battle whose initial vote goes to L switches with probability back_down.
/// Output is a pure function of the parameters.
inline std::vector<BattleRecord> simulate_battles(const SimulationParams& p) {
  validate_simulation(p);
  std::mt19937_64 rng(p.seed);
  SessionIdGenerator ids(p.seed ^ 0x9e3779b97f4a7c15ULL);
  const IdSource id_source = [&ids] { return ids(); };
  // 2025-01-01T00:00:00Z
  const TimePoint base{std::chrono::milliseconds(1735689600000LL)};

  std::vector<ModelFamily> families;
  for (const auto& f : p.families) {
    families.push_back(ModelFamily{
        f.family_id,
        {ModelRef{"simulated", f.family_id + "/small", f.family_id + " small", 0},
         ModelRef{"simulated", f.family_id + "/large", f.family_id + " large", 1}}});
  }

  std::vector<BattleRecord> out;
  out.reserve(p.n);
  for (std::uint64_t i = 0; i < p.n; ++i) {
    const std::size_t k = i % families.size();
    const FamilySimulation& truth = p.families[k];
    BattlePair pair(families[k], 0, 1);
    LabelAssignment labels = assign_labels(pair, rng);
    const double u = uniform01(rng);
    const bool backs_down = bernoulli(rng, truth.back_down);

    const TimePoint created = base + std::chrono::milliseconds(i * 1000);
    const Clock clock = [created] { return created; };
    BattleSession s = create_session(BattleSetup{pair, labels, p.seed}, clock, id_source);
    s.user_tag = "synthetic";
    s = submit_prompt(std::move(s), std::string(kSeedQuestions[i % kSeedQuestions.size()].en));
    ModelResponse large;
    large.text = "simulated answer (large)";
    large.model_id = pair.large().model_id;
    large.finish_reason = "stop";
    ModelResponse small = large;
    small.text = "simulated answer (small)";
    small.model_id = pair.small().model_id;
    const bool large_at_a = labels.at_a == Role::kLarge;
    s = attach_responses(std::move(s), large_at_a ? large : small, large_at_a ? small : large);

    VoteChoice choice = VoteChoice::kTie;
    if (u < truth.w_large) {
      choice = to_choice(labels.position_of(Role::kLarge));
    } else if (u < truth.w_large + truth.w_small) {
      choice = to_choice(labels.position_of(Role::kSmall));
    }
    const TimePoint voted = created + std::chrono::milliseconds(500);
    s = cast_initial_vote(std::move(s), choice, voted);
    if (s.state == SessionState::kAwaitingEnergyDecision) {
      s = resolve_energy_decision(std::move(s),
                                  backs_down ? EnergyDecision::kSwitch : EnergyDecision::kKeep,
                                  voted);
    }
    out.push_back(to_record(s));
  }
  return out;
}

/// Writes records as a fresh log (truncating any existing file).
inline void write_log(const std::filesystem::path& path, const std::vector<BattleRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path.string() + ": cannot open for writing");
  for (const auto& r : records) {
    auto violations = record_violations(r);
    if (!violations.empty()) throw Error(ErrorCode::kInvalidRecord, violations.front());
    out << serialize_record(r) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, path.string() + ": write failed");
}

}  // namespace gea
