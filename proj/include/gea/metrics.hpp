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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gea/record.hpp"

namespace gea {

/// Vote counts over a set of completed battles.
struct RawTally {
  std::uint64_t n = 0;
  std::uint64_t wins_large_initial = 0;
  std::uint64_t wins_small_initial = 0;
  std::uint64_t ties_initial = 0;
  std::uint64_t prompted = 0;
  std::uint64_t reversed = 0;
  std::uint64_t wins_small_final = 0;
  std::uint64_t wins_large_final = 0;
  std::uint64_t ties_final = 0;

  void add(const BattleRecord& r) {
    ++n;
    switch (r.initial_role) {
      case RoleOutcome::kLarge: ++wins_large_initial; break;
      case RoleOutcome::kSmall: ++wins_small_initial; break;
      case RoleOutcome::kTie: ++ties_initial; break;
    }
    switch (r.final_role) {
      case RoleOutcome::kLarge: ++wins_large_final; break;
      case RoleOutcome::kSmall: ++wins_small_final; break;
      case RoleOutcome::kTie: ++ties_final; break;
    }
    if (r.energy_prompt_shown) ++prompted;
    if (r.reversed) ++reversed;
  }

  friend bool operator==(const RawTally&, const RawTally&) = default;
};

inline RawTally tally(std::span<const BattleRecord> records,
                      const std::optional<std::string>& family_filter = std::nullopt) {
  RawTally t;
  for (const auto& r : records) {
    if (family_filter && r.family_id != *family_filter) continue;
    t.add(r);
  }
  return t;
}

/// Share of energy-prompted battles in which the user switched to the
/// lower-energy answer. Undefined (nullopt) when nobody was prompted.
inline std::optional<double> back_down_rate(const RawTally& t) {
  if (t.prompted == 0) return std::nullopt;
  return static_cast<double>(t.reversed) / static_cast<double>(t.prompted);
}

struct AdjustedWinRates {
  double small = 0.0;  // W_S(E)
  double large = 0.0;  // W_L(E)
};

/// Energy-adjusted win rates:
///   W_S(E) = W_S + T + W_L * E_c
///   W_L(E) = W_L * (1 - E_c)
/// Ties are credited to the small model.
inline AdjustedWinRates adjusted_win_rates(double w_large, double w_small, double tie,
                                           double back_down) {
  for (double v : {w_large, w_small, tie, back_down}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kDomainError, "rates must lie in [0, 1]");
    }
  }
  if (std::abs(w_large + w_small + tie - 1.0) > 1e-9) {
    throw Error(ErrorCode::kDomainError, "W_L + W_S + T must equal 1");
  }
  return {w_small + tie + w_large * back_down, w_large * (1.0 - back_down)};
}

struct ReportRow {
  std::string family_id;
  RawTally counts;
  // Undefined rates are nullopt: everything when n = 0, E_c and the adjusted
  // rates when nobody was prompted.
  std::optional<double> w_large;
  std::optional<double> w_small;
  std::optional<double> tie;
  std::optional<double> back_down;
  std::optional<double> w_small_energy;
  std::optional<double> w_large_energy;
  std::optional<double> final_small;
  std::optional<double> final_large;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

inline ReportRow make_row(std::string family_id, const RawTally& t) {
  ReportRow row;
  row.family_id = std::move(family_id);
  row.counts = t;
  if (t.n == 0) return row;
  const double n = static_cast<double>(t.n);
  row.w_large = static_cast<double>(t.wins_large_initial) / n;
  row.w_small = static_cast<double>(t.wins_small_initial) / n;
  row.tie = static_cast<double>(t.ties_initial) / n;
  row.final_small = static_cast<double>(t.wins_small_final) / n;
  row.final_large = static_cast<double>(t.wins_large_final) / n;
  row.back_down = back_down_rate(t);
  if (row.back_down) {
    auto adj = adjusted_win_rates(*row.w_large, *row.w_small, *row.tie, *row.back_down);
    row.w_small_energy = adj.small;
    row.w_large_energy = adj.large;
  }
  return row;
}

struct MetricsReport {
  std::vector<ReportRow> families;  // sorted by family_id
  ReportRow aggregate = make_row(std::string(kAggregateRowId), RawTally{});

  [[nodiscard]] const ReportRow* find(std::string_view family_id) const {
    if (family_id == kAggregateRowId) return &aggregate;
    for (const auto& row : families) {
      if (row.family_id == family_id) return &row;
    }
    return nullptr;
  }

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Incremental form of build_report, fed one record at a time.
class MetricsAccumulator {
 public:
  void add(const BattleRecord& r) {
    per_family_[r.family_id].add(r);
    pooled_.add(r);
  }

  [[nodiscard]] MetricsReport report() const {
    MetricsReport out;
    for (const auto& [id, t] : per_family_) out.families.push_back(make_row(id, t));
    // Pooled over battles, not averaged over families.
    out.aggregate = make_row(std::string(kAggregateRowId), pooled_);
    return out;
  }

 private:
  std::map<std::string, RawTally> per_family_;
  RawTally pooled_;
};

inline MetricsReport build_report(std::span<const BattleRecord> records) {
  MetricsAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.report();
}

inline nlohmann::ordered_json to_json(const ReportRow& row) {
  auto rate = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  const RawTally& t = row.counts;
  nlohmann::ordered_json j;
  j["family_id"] = row.family_id;
  j["n"] = t.n;
  j["wins_large_initial"] = t.wins_large_initial;
  j["wins_small_initial"] = t.wins_small_initial;
  j["ties_initial"] = t.ties_initial;
  j["prompted"] = t.prompted;
  j["reversed"] = t.reversed;
  j["wins_large_final"] = t.wins_large_final;
  j["wins_small_final"] = t.wins_small_final;
  j["ties_final"] = t.ties_final;
  j["W_L"] = rate(row.w_large);
  j["W_S"] = rate(row.w_small);
  j["T"] = rate(row.tie);
  j["E_c"] = rate(row.back_down);
  j["W_S_E"] = rate(row.w_small_energy);
  j["W_L_E"] = rate(row.w_large_energy);
  j["empirical_final_small"] = rate(row.final_small);
  j["empirical_final_large"] = rate(row.final_large);
  return j;
}

inline nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  for (const auto& row : report.families) rows[row.family_id] = to_json(row);
  rows[std::string(kAggregateRowId)] = to_json(report.aggregate);
  nlohmann::ordered_json j;
  j["rows"] = std::move(rows);
  return j;
}

/// Fixed-width text table, one line per row, aggregate last.
inline std::string to_table(const MetricsReport& report) {
  auto cell = [](const std::optional<double>& v) {
    char buf[16];
    if (!v) return std::string("-");
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  std::vector<const ReportRow*> rows;
  for (const auto& r : report.families) rows.push_back(&r);
  rows.push_back(&report.aggregate);

  std::size_t id_width = 6;
  for (const auto* r : rows) id_width = std::max(id_width, r->family_id.size());

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %7s %8s %8s %8s %8s %8s %8s %8s %8s\n",
                static_cast<int>(id_width), "family", "n", "W_L", "W_S", "T", "E_c", "W_S(E)",
                "W_L(E)", "final_S", "final_L");
  out += buf;
  for (const auto* r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %7llu %8s %8s %8s %8s %8s %8s %8s %8s\n",
                  static_cast<int>(id_width), r->family_id.c_str(),
                  static_cast<unsigned long long>(r->counts.n), cell(r->w_large).c_str(),
                  cell(r->w_small).c_str(), cell(r->tie).c_str(), cell(r->back_down).c_str(),
                  cell(r->w_small_energy).c_str(), cell(r->w_large_energy).c_str(),
                  cell(r->final_small).c_str(), cell(r->final_large).c_str());
    out += buf;
  }
  return out;
}

}  // namespace gea
