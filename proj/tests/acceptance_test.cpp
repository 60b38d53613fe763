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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs offline against the mock provider.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "arena_driver.hpp"
#include "gea/metrics.hpp"
#include "gea/simulate.hpp"
#include "gea/store.hpp"
#include "test_support.hpp"

namespace {

using namespace gea;

constexpr std::uint64_t kSeed = 20250501;

/// Collects failed expectations for one criterion.
class Outcome {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream ss;
    ss << what << " = " << got << ", want " << want << " +/- " << tol;
    expect(std::isfinite(got) && std::abs(got - want) <= tol, ss.str());
  }
  void note(const std::string& s) { notes_.push_back(s); }

  [[nodiscard]] bool ok() const { return failed_ == 0; }
  [[nodiscard]] const std::vector<std::string>& failures() const { return failures_; }
  [[nodiscard]] const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
  int failed_ = 0;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<void(Outcome&)> body;
};

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string command = std::string(GEA_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult result;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return result;
  char buf[4096];
  for (std::size_t got; (got = std::fread(buf, 1, sizeof buf, pipe)) > 0;) result.out.append(buf, got);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << std::fixed << v;
  return ss.str();
}

// --- 1 ---------------------------------------------------------------------

void conservation(Outcome& o) {
  std::mt19937_64 rng(kSeed);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double a = uniform01(rng), b = uniform01(rng);
    if (a > b) std::swap(a, b);
    const double wl = a, ws = b - a, t = 1.0 - b;
    double ec = uniform01(rng);
    if (i % 100 == 0) ec = 0.0;
    if (i % 100 == 1) ec = 1.0;
    const AdjustedWinRates r = adjusted_win_rates(wl, ws, t, ec);
    const double err = std::abs(r.small + r.large - 1.0);
    worst = std::max(worst, err);
    o.expect(err <= 1e-12, "W_S(E) + W_L(E) != 1 at tuple " + std::to_string(i));
    o.expect(r.large <= wl, "W_L(E) > W_L at tuple " + std::to_string(i));
    o.expect(r.small >= ws + t, "W_S(E) < W_S + T at tuple " + std::to_string(i));
  }
  std::ostringstream ss;
  ss << "10000 tuples, max |sum - 1| = " << worst;
  o.note(ss.str());
}

// --- 2 ---------------------------------------------------------------------

ModelResponse reply(const std::string& text) {
  ModelResponse r;
  r.text = text;
  r.model_id = text;
  r.finish_reason = "stop";
  return r;
}

void protocol(Outcome& o) {
  static const ModelFamily fam = testing::two_member_family("fam");
  const TimePoint now = testing::fixed_time();
  auto fresh = [&](Role at_a) {
    return create_session(BattleSetup{BattlePair(fam, 0, 1), LabelAssignment{at_a}, std::nullopt},
                          testing::fixed_clock());
  };
  auto awaiting_vote = [&](Role at_a) {
    return attach_responses(submit_prompt(fresh(at_a), "q"), reply("a"), reply("b"));
  };

  int vote_steps = 0, decision_steps = 0, completed = 0;
  for (Role at_a : {Role::kLarge, Role::kSmall}) {
    for (VoteChoice choice : {VoteChoice::kA, VoteChoice::kB, VoteChoice::kTie}) {
      ++vote_steps;
      const BattleSession voted = cast_initial_vote(awaiting_vote(at_a), choice, now);
      const Position large_at = voted.setup.labels.position_of(Role::kLarge);
      const bool picked_large = choice == to_choice(large_at);
      o.expect(voted.energy_prompt_shown == picked_large, "prompt shown iff L chosen");
      std::vector<std::pair<BattleSession, std::optional<EnergyDecision>>> finals;
      if (picked_large) {
        o.expect(voted.state == SessionState::kAwaitingEnergyDecision, "L vote awaits decision");
        for (EnergyDecision d : {EnergyDecision::kKeep, EnergyDecision::kSwitch}) {
          ++decision_steps;
          finals.emplace_back(resolve_energy_decision(voted, d, now), d);
        }
      } else {
        finals.emplace_back(voted, std::nullopt);
      }
      for (const auto& [s, d] : finals) {
        ++completed;
        o.expect(s.state == SessionState::kCompleted, "path completes");
        const VoteChoice want = d == EnergyDecision::kSwitch ? to_choice(other(large_at)) : choice;
        o.expect(s.final_choice == want, "final choice follows the trigger rule");
        o.expect(record_violations(to_record(s)).empty(), "record invariants hold");
      }
    }
  }
  o.expect(vote_steps + decision_steps == 10, "10 legal vote/decision transitions");
  o.expect(completed == 8, "8 distinct completed outcomes");

  // Every action from every state: exactly the protocol's transition is legal.
  std::vector<std::pair<std::string, BattleSession>> states = {
      {"created", fresh(Role::kLarge)},
      {"awaiting_responses", submit_prompt(fresh(Role::kLarge), "q")},
      {"awaiting_initial_vote", awaiting_vote(Role::kLarge)},
      {"awaiting_energy_decision", cast_initial_vote(awaiting_vote(Role::kLarge), VoteChoice::kA, now)},
      {"completed", cast_initial_vote(awaiting_vote(Role::kLarge), VoteChoice::kB, now)},
      {"failed", fail_session(awaiting_vote(Role::kLarge), "x")},
  };
  const std::vector<std::pair<std::string, std::function<void(const BattleSession&)>>> actions = {
      {"created", [](const BattleSession& s) { (void)submit_prompt(s, "q"); }},
      {"awaiting_responses", [](const BattleSession& s) { (void)attach_responses(s, reply("a"), reply("b")); }},
      {"awaiting_initial_vote", [&](const BattleSession& s) { (void)cast_initial_vote(s, VoteChoice::kTie, now); }},
      {"awaiting_energy_decision",
       [&](const BattleSession& s) { (void)resolve_energy_decision(s, EnergyDecision::kKeep, now); }},
  };
  int rejected = 0;
  for (const auto& [state_name, s] : states) {
    o.expect(std::string(to_string(s.state)) == state_name, "state fixture " + state_name);
    for (const auto& [legal_in, act] : actions) {
      bool threw = false;
      try {
        act(s);
      } catch (const Error& e) {
        threw = e.code() == ErrorCode::kInvalidState;
      }
      if (legal_in == state_name) {
        o.expect(!threw, legal_in + " action accepted");
      } else {
        o.expect(threw, legal_in + " action rejected in " + state_name);
        rejected += threw;
      }
    }
  }
  for (std::size_t terminal : {4u, 5u}) {
    bool threw = false;
    try {
      (void)fail_session(states[terminal].second, "x");
    } catch (const Error&) {
      threw = true;
    }
    o.expect(threw, "fail rejected in " + states[terminal].first);
    rejected += threw;
  }
  o.note(std::to_string(completed) + " outcomes over " + std::to_string(vote_steps + decision_steps) +
         " transitions, " + std::to_string(rejected) + " illegal transitions rejected");
}

// --- 3 ---------------------------------------------------------------------

std::optional<json> simulate_and_analyze(const std::filesystem::path& log, const std::string& args,
                                         Outcome& o) {
  CliResult sim = run_cli("simulate " + args + " --seed " + std::to_string(kSeed) + " --out " + log.string());
  o.expect(sim.exit_code == 0, "simulate exits 0");
  CliResult analyzed = run_cli("analyze --format json --log " + log.string());
  o.expect(analyzed.exit_code == 0, "analyze exits 0");
  if (sim.exit_code != 0 || analyzed.exit_code != 0) return std::nullopt;
  return json::parse(analyzed.out);
}

void oracle_recovery(Outcome& o) {
  testing::TempDir dir;
  auto report = simulate_and_analyze(dir.file("sim.jsonl"),
                                     "--n 10000 --wl 0.49 --ws 0.47 --t 0.04 --ec 0.46", o);
  if (!report) return;
  const json& agg = (*report)["rows"]["aggregate"];
  o.expect(agg["n"] == 10000, "n = 10000");
  o.near(agg["W_L"].get<double>(), 0.49, 0.02, "W_L");
  o.near(agg["W_S"].get<double>(), 0.47, 0.02, "W_S");
  o.near(agg["T"].get<double>(), 0.04, 0.02, "T");
  o.near(agg["E_c"].get<double>(), 0.46, 0.02, "E_c");
  o.near(agg["W_S_E"].get<double>(), 0.7354, 0.02, "W_S(E)");
  o.note("W_L " + fmt(agg["W_L"].get<double>()) + " W_S " + fmt(agg["W_S"].get<double>()) + " T " +
         fmt(agg["T"].get<double>()) + " E_c " + fmt(agg["E_c"].get<double>()) + " W_S(E) " +
         fmt(agg["W_S_E"].get<double>()));

  auto upper = simulate_and_analyze(dir.file("upper.jsonl"),
                                    "--n 10000 --wl 0.49 --ws 0.47 --t 0.04 --ec 0.52", o);
  if (!upper) return;
  const double ws_e = (*upper)["rows"]["aggregate"]["W_S_E"].get<double>();
  o.near(ws_e, 0.7648, 0.02, "W_S(E) at E_c=0.52");
  o.note("W_S(E) at E_c=0.52: " + fmt(ws_e));
}

// --- 4 ---------------------------------------------------------------------

void back_down_band(Outcome& o) {
  testing::TempDir dir;
  auto report = simulate_and_analyze(
      dir.file("band.jsonl"),
      "--n 10000 --wl 0.49 --ws 0.47 --t 0.04 --ec 0.41,0.44,0.48,0.52 "
      "--families gpt-4o,gpt-4.1,claude-3.5,llama3",
      o);
  if (!report) return;
  const std::pair<const char*, double> truth[] = {
      {"gpt-4o", 0.41}, {"gpt-4.1", 0.44}, {"claude-3.5", 0.48}, {"llama3", 0.52}};
  std::string summary;
  for (const auto& [id, ec] : truth) {
    const json& row = (*report)["rows"][id];
    o.expect(row["n"] == 2500, std::string(id) + " n = 2500");
    o.near(row["E_c"].get<double>(), ec, 0.03, std::string(id) + " E_c");
    summary += std::string(id) + " " + fmt(row["E_c"].get<double>()) + " ";
  }
  const double pooled = (*report)["rows"]["aggregate"]["E_c"].get<double>();
  o.near(pooled, 0.4625, 0.02, "pooled E_c");
  o.note(summary + "pooled " + fmt(pooled));
}

// --- 5 ---------------------------------------------------------------------

void blinding_uniformity(Outcome& o) {
  const FamilyRegistry registry =
      validate_registry(default_families_document(), {"openai", "anthropic", "groq"});
  o.expect(registry.size() == 4, "four families");
  constexpr int kSetups = 100000;
  std::map<std::string, int> per_family;
  int large_at_a = 0;
  std::mt19937_64 seeds(kSeed);
  for (int i = 0; i < kSetups; ++i) {
    const std::uint64_t seed = seeds();
    std::mt19937_64 rng(seed);
    BattleSetup setup = select_battle(registry, rng, seed);
    ++per_family[setup.pair.family_id()];
    large_at_a += setup.labels.at_a == Role::kLarge;
    o.expect(setup.pair.large().energy_rank > setup.pair.small().energy_rank, "L is higher rank");
  }
  std::string summary;
  for (const auto& [id, family] : registry.families) {
    const double f = static_cast<double>(per_family[id]) / kSetups;
    o.near(f, 0.25, 0.01, id + " frequency");
    summary += id + " " + fmt(f) + " ";
  }
  const double a = static_cast<double>(large_at_a) / kSetups;
  o.near(a, 0.50, 0.01, "L at A");
  o.note(summary + "L@A " + fmt(a));
}

// --- 6 ---------------------------------------------------------------------

std::vector<std::string> lines_of(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

void round_trip(Outcome& o) {
  testing::TempDir dir;
  std::mt19937_64 rng(kSeed);
  std::size_t total = 0;
  for (int seq = 0; seq < 50; ++seq) {
    const auto log = dir.file("seq" + std::to_string(seq) + ".jsonl");
    std::vector<BattleRecord> written;
    const auto len = 1 + rng() % 40;
    for (std::uint64_t i = 0; i < len; ++i) {
      written.push_back(testing::random_record(rng));
      append(log, written.back());
    }
    ReplayResult back = replay(log, ReplayMode::kStrict);
    o.expect(back.records == written, "sequence " + std::to_string(seq) + " replays equal");
    const auto lines = lines_of(log);
    o.expect(lines.size() == written.size(), "one line per record");
    for (std::size_t i = 0; i < lines.size() && i < back.records.size(); ++i) {
      o.expect(serialize_record(back.records[i]) == lines[i], "byte-faithful re-serialization");
    }
    total += written.size();
  }

  ArenaConfig cfg = testing::mock_arena_config(dir.file("arena.jsonl"));
  ArenaService service(cfg, system_now, kSeed);
  int played = 0;
  for (int i = 0; i < 120; ++i) {
    const double u = uniform01(rng);
    testing::Intent intent{u < 0.49   ? RoleOutcome::kLarge
                           : u < 0.96 ? RoleOutcome::kSmall
                                      : RoleOutcome::kTie,
                           bernoulli(rng, 0.46)};
    played += play_battle(service, std::string(kSeedQuestions[i % 5].en), intent).has_value();
  }
  o.expect(played == 120, "120 mock battles completed");
  o.expect(lines_of(cfg.log_path).size() == 120, "120 log lines");
  const ojson live = to_json(service.live_report());
  o.expect(live == service.results().body, "live metrics equal replayed metrics");
  o.expect(live == to_json(build_report(replay(cfg.log_path, ReplayMode::kStrict).records)),
           "live metrics equal an independent replay");
  o.note(std::to_string(total) + " random records round-tripped, " + std::to_string(played) +
         " mock battles, live == replay");
}

// --- 7 ---------------------------------------------------------------------

void end_to_end(Outcome& o) {
  testing::TempDir dir;
  ArenaConfig cfg = testing::mock_arena_config(dir.file("battles.jsonl"));
  const std::string configured = cfg.energy_prompt(cfg.default_language);
  ArenaService service(cfg, system_now, kSeed);
  httplib::Server server;
  service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::vector<std::string> identities;
  for (const auto& [id, family] : cfg.registry.families) {
    identities.push_back(id);
    for (const auto& m : family.members) {
      identities.push_back(m.model_id);
      identities.push_back(m.display_name);
    }
  }
  std::vector<std::string> pre_reveal;
  httplib::Client client("127.0.0.1", port);
  auto post = [&](const std::string& path, const ojson& body) -> std::optional<ojson> {
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res || res->status / 100 != 2) return std::nullopt;
    return ojson::parse(res->body);
  };

  [&] {
    auto created = post("/api/v1/battles", ojson::object());
    o.expect(created.has_value(), "create battle");
    if (!created) return;
    pre_reveal.push_back(created->dump());
    const std::string base = "/api/v1/battles/" + (*created)["session_id"].get<std::string>();

    auto prompted = post(base + "/prompt", {{"question", std::string(kSeedQuestions[1].en)}});
    o.expect(prompted.has_value(), "submit prompt");
    if (!prompted) return;
    pre_reveal.push_back(prompted->dump());
    auto large_at = testing::large_position(cfg, *prompted);
    o.expect(large_at.has_value(), "locate L response");
    if (!large_at) return;

    auto voted = post(base + "/vote", {{"choice", to_string(*large_at)}});
    o.expect(voted.has_value(), "vote for L");
    if (!voted) return;
    pre_reveal.push_back(voted->dump());
    o.expect((*voted)["status"] == "awaiting_energy_decision", "energy prompt pending");
    o.expect((*voted)["energy_prompt"]["message"] == configured, "energy prompt text verbatim");
    auto polled = client.Get(base);
    if (polled) pre_reveal.push_back(polled->body);

    auto done = post(base + "/energy-vote", {{"decision", "switch"}});
    o.expect(done.has_value() && (*done)["status"] == "completed", "switch completes");
    if (done) {
      o.expect((*done)["reveal"]["final_choice"] == to_string(other(*large_at)), "final is S");
    }
  }();
  server.stop();
  th.join();

  int leaks = 0;
  for (const auto& payload : pre_reveal) {
    for (const auto& id : identities) leaks += payload.find(id) != std::string::npos;
  }
  o.expect(leaks == 0, "pre-reveal payloads name no model");
  const auto lines = lines_of(cfg.log_path);
  o.expect(lines.size() == 1, "exactly one log line");
  if (lines.size() == 1) {
    BattleRecord r = parse_record(lines[0]);
    o.expect(record_violations(r).empty(), "log line valid");
    o.expect(r.reversed && r.energy_decision == EnergyDecision::kSwitch, "log line records the switch");
  }
  o.expect(validate_log(cfg.log_path).clean(), "validate-log clean");
  o.note(std::to_string(pre_reveal.size()) + " pre-reveal payloads scanned, " + std::to_string(leaks) +
         " identifier hits, " + std::to_string(lines.size()) + " log line");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"adjusted win rates conserve probability", 1.0, conservation},
      {"protocol paths and illegal transitions", 1.0, protocol},
      {"oracle recovery via simulate + analyze", 10.0, oracle_recovery},
      {"per-family back-down band", 10.0, back_down_band},
      {"family and position uniformity", 5.0, blinding_uniformity},
      {"log round-trip and live == replay", 10.0, round_trip},
      {"end-to-end API with mock provider", 5.0, end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.expect(secs < c.budget_s, "runtime " + fmt(secs) + " s over budget " + fmt(c.budget_s) + " s");
    failed += !o.ok();
    std::cout << (o.ok() ? "PASS" : "FAIL") << " [" << i + 1 << "] " << c.name << " (" << fmt(secs)
              << " s, budget " << c.budget_s << " s)";
    for (const auto& n : o.notes()) std::cout << " :: " << n;
    std::cout << "\n";
    for (const auto& f : o.failures()) std::cout << "       - " << f << "\n";
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
