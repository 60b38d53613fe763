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

#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "gea/config.hpp"
#include "gea/gateway.hpp"
#include "gea/metrics.hpp"
#include "gea/pairing.hpp"
#include "gea/session.hpp"
#include "gea/store.hpp"
#include "httplib.h"

namespace gea {

using ojson = nlohmann::ordered_json;

/// Status code plus JSON body, independent of the HTTP library.
struct ApiResponse {
  int status = 200;
  ojson body;
};

/// Error body: {"error": {"code": ..., "message": ...}}.
inline ApiResponse api_error(int status, std::string_view code, std::string_view message) {
  ojson body;
  body["error"]["code"] = code;
  body["error"]["message"] = message;
  return {status, std::move(body)};
}

inline std::string_view api_choice(VoteChoice c) {
  switch (c) {
    case VoteChoice::kA: return "A";
    case VoteChoice::kB: return "B";
    case VoteChoice::kTie: return "tie";
  }
  return "?";
}

inline std::string_view api_decision(EnergyDecision d) {
  return d == EnergyDecision::kKeep ? "keep" : "switch";
}

/// Model identities and the energy ordering, disclosed only once a battle is
/// completed.
inline ojson reveal_payload(const BattleSession& s) {
  ojson reveal;
  reveal["family_id"] = s.setup.pair.family_id();
  ojson models = ojson::array();
  for (Position p : {Position::kA, Position::kB}) {
    const Role role = s.setup.labels.role_at(p);
    const ModelRef& m = s.setup.pair.member(role);
    ojson entry;
    entry["position"] = to_string(p);
    entry["model_id"] = m.model_id;
    entry["display_name"] = m.display_name;
    entry["role"] = to_string(role);
    entry["energy"] = role == Role::kLarge ? "higher" : "lower";
    models.push_back(std::move(entry));
  }
  reveal["models"] = std::move(models);
  reveal["higher_energy_position"] = to_string(s.label_of_large());
  reveal["initial_choice"] = api_choice(*s.initial_choice);
  reveal["final_choice"] = api_choice(*s.final_choice);
  reveal["energy_prompt_shown"] = s.energy_prompt_shown;
  reveal["energy_decision"] =
      s.energy_decision ? ojson(api_decision(*s.energy_decision)) : ojson(nullptr);
  return reveal;
}

/// The battle protocol and results as request handlers. Handlers are safe to
/// call concurrently; transitions on one session are serialized by the
/// session table, completed battles are appended to the vote log exactly once.
class ArenaService {
 public:
  explicit ArenaService(ArenaConfig config, Clock clock = system_now,
                        std::optional<std::uint64_t> seed = std::nullopt)
      : config_(std::move(config)),
        gateway_(config_.providers),
        clock_(std::move(clock)),
        seeds_(seed ? *seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}()),
        ids_(seed ? IdSource([g = std::make_shared<SessionIdGenerator>(*seed + 1)] { return (*g)(); })
                  : default_id_source()) {
    if (std::filesystem::exists(config_.log_path)) {
      for (const auto& r : replay(config_.log_path).records) live_.add(r);
    }
    writer_ = std::make_unique<LogWriter>(config_.log_path);
  }

  [[nodiscard]] const ArenaConfig& config() const { return config_; }

  ApiResponse create_battle(const std::string& body) {
    auto parsed = parse_body(body, {"user_tag", "language"});
    if (!parsed) return std::move(parsed.error);
    const ojson& req = parsed.value;
    if (config_.registry.empty()) {
      return api_error(503, "registry_empty", "no model families configured");
    }
    auto tag = optional_string(req, "user_tag");
    auto lang = optional_string(req, "language");
    if (!tag.ok || !lang.ok) return api_error(400, "bad_request", "fields must be strings");

    const TimePoint now = clock_();
    sweep(now);
    const std::uint64_t seed = next_seed();
    std::mt19937_64 rng(seed);
    BattleSession s = create_session(select_battle(config_.registry, rng, seed),
                                     [now] { return now; }, ids_);
    s.user_tag = tag.value;
    s.language = lang.value.value_or(config_.default_language);
    if (!config_.energy_prompt_text.contains(s.language)) {
      return api_error(400, "bad_request", "unsupported language");
    }
    s.generation_params = config_.registry.find(s.setup.pair.family_id())->generation_params;
    ojson out;
    out["session_id"] = s.session_id;
    out["status"] = to_string(s.state);
    sessions_.insert(std::move(s), now);
    return {201, std::move(out)};
  }

  ApiResponse submit_prompt(const std::string& id, const std::string& body) {
    auto parsed = parse_body(body, {"question", "question_category"});
    if (!parsed) return std::move(parsed.error);
    const ojson& req = parsed.value;
    if (!req.contains("question") || !req["question"].is_string()) {
      return api_error(400, "bad_request", "'question' must be a string");
    }
    auto category = optional_string(req, "question_category");
    if (!category.ok) return api_error(400, "bad_request", "'question_category' must be a string");

    return with_session(id, [&](BattleSession& s) -> ApiResponse {
      BattleSession next = gea::submit_prompt(s, req["question"].get<std::string>());
      next.question_category = category.value;
      s = next;
      try {
        PairResponses pair = gateway_.complete_pair(s.setup, s.question, s.generation_params);
        s.generation_params = pair.params_sent;
        const bool large_at_a = s.setup.labels.at_a == Role::kLarge;
        s = attach_responses(std::move(s), large_at_a ? pair.large : pair.small,
                             large_at_a ? pair.small : pair.large);
      } catch (const PairFailure& f) {
        s = fail_session(std::move(s), f.what());
        return api_error(502, "provider_failure",
                         std::string("a model provider failed (") +
                             std::string(to_string(f.cause())) + "); start a new battle");
      } catch (const Error& e) {
        s = fail_session(std::move(s), e.what());
        return api_error(502, "provider_failure", "a model provider failed; start a new battle");
      }
      ojson out = status_view(s);
      return {200, std::move(out)};
    });
  }

  ApiResponse vote(const std::string& id, const std::string& body) {
    auto parsed = parse_body(body, {"choice"});
    if (!parsed) return std::move(parsed.error);
    const ojson& req = parsed.value;
    std::optional<VoteChoice> choice;
    if (req.contains("choice") && req["choice"].is_string()) {
      const auto v = req["choice"].get<std::string>();
      if (v == "A") choice = VoteChoice::kA;
      if (v == "B") choice = VoteChoice::kB;
      if (v == "tie") choice = VoteChoice::kTie;
    }
    if (!choice) return api_error(400, "bad_request", "'choice' must be \"A\", \"B\" or \"tie\"");
    return with_session(id, [&](BattleSession& s) -> ApiResponse {
      BattleSession next = cast_initial_vote(s, *choice, clock_());
      if (next.state == SessionState::kCompleted) persist(next);
      s = std::move(next);
      return {200, status_view(s)};
    });
  }

  ApiResponse energy_vote(const std::string& id, const std::string& body) {
    auto parsed = parse_body(body, {"decision"});
    if (!parsed) return std::move(parsed.error);
    const ojson& req = parsed.value;
    std::optional<EnergyDecision> decision;
    if (req.contains("decision") && req["decision"].is_string()) {
      const auto v = req["decision"].get<std::string>();
      if (v == "keep") decision = EnergyDecision::kKeep;
      if (v == "switch") decision = EnergyDecision::kSwitch;
    }
    if (!decision) return api_error(400, "bad_request", "'decision' must be \"keep\" or \"switch\"");
    return with_session(id, [&](BattleSession& s) -> ApiResponse {
      BattleSession next = resolve_energy_decision(s, *decision, clock_());
      persist(next);
      s = std::move(next);
      return {200, status_view(s)};
    });
  }

  ApiResponse get_battle(const std::string& id) {
    auto s = sessions_.snapshot(id);
    if (!s) return api_error(404, "not_found", "unknown battle");
    return {200, status_view(*s)};
  }

  /// Report over the log file as it is now.
  ApiResponse results(const std::optional<std::string>& family_id = std::nullopt) const {
    MetricsReport report;
    try {
      report = build_report(replay(config_.log_path).records);
    } catch (const Error& e) {
      return api_error(500, "internal", e.what());
    }
    if (!family_id) return {200, to_json(report)};
    if (const ReportRow* row = report.find(*family_id)) return {200, to_json(*row)};
    if (config_.registry.find(*family_id)) return {200, to_json(make_row(*family_id, RawTally{}))};
    return api_error(404, "not_found", "unknown family");
  }

  ApiResponse healthz() const {
    ojson out;
    out["status"] = "ok";
    out["families"] = config_.registry.size();
    return {200, std::move(out)};
  }

  /// Report accumulated in memory from appends made by this service.
  [[nodiscard]] MetricsReport live_report() const {
    std::lock_guard lock(live_mu_);
    return live_.report();
  }

  std::size_t sweep(TimePoint now) { return sessions_.sweep(now, config_.session_idle_timeout); }

  /// Registers every endpoint on an httplib server.
  void mount(httplib::Server& server) {
    const std::string origin = config_.ui_origin;
    auto send = [origin](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                      "application/json; charset=utf-8");
    };
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
    });
    server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    server.Post("/api/v1/battles", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, create_battle(req.body));
    });
    server.Post(R"(/api/v1/battles/([^/]+)/prompt)",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, submit_prompt(req.matches[1], req.body));
                });
    server.Post(R"(/api/v1/battles/([^/]+)/vote)",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, vote(req.matches[1], req.body));
                });
    server.Post(R"(/api/v1/battles/([^/]+)/energy-vote)",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, energy_vote(req.matches[1], req.body));
                });
    server.Get(R"(/api/v1/battles/([^/]+))",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, get_battle(req.matches[1]));
               });
    server.Get("/api/v1/results", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, results());
    });
    server.Get(R"(/api/v1/results/([^/]+))",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, results(std::string(req.matches[1])));
               });
    server.Get("/api/v1/healthz", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, healthz());
    });
  }

 private:
  struct Parsed {
    ojson value;
    ApiResponse error;
    bool ok = false;
    explicit operator bool() const { return ok; }
  };

  struct OptionalString {
    std::optional<std::string> value;
    bool ok = true;
  };

  static OptionalString optional_string(const ojson& req, const char* key) {
    if (!req.contains(key) || req[key].is_null()) return {};
    if (!req[key].is_string()) return {std::nullopt, false};
    return {req[key].get<std::string>(), true};
  }

  /// Strict parsing: the body must be a JSON object (or empty) with no
  /// fields outside `allowed`.
  static Parsed parse_body(const std::string& body, std::initializer_list<std::string_view> allowed) {
    Parsed p;
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
      p.value = ojson::object();
      p.ok = true;
      return p;
    }
    try {
      p.value = ojson::parse(body);
    } catch (const ojson::parse_error&) {
      p.error = api_error(400, "bad_request", "body is not valid JSON");
      return p;
    }
    if (!p.value.is_object()) {
      p.error = api_error(400, "bad_request", "body must be a JSON object");
      return p;
    }
    for (const auto& [key, _] : p.value.items()) {
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      if (!known) {
        p.error = api_error(400, "unknown_field", "unknown field '" + key + "'");
        return p;
      }
    }
    p.ok = true;
    return p;
  }

  template <typename Fn>
  ApiResponse with_session(const std::string& id, Fn&& fn) {
    ApiResponse out;
    bool found = sessions_.with_session(id, clock_(), [&](BattleSession& s) {
      try {
        out = fn(s);
      } catch (const Error& e) {
        switch (e.code()) {
          case ErrorCode::kInvalidState:
            out = api_error(409, "invalid_state",
                            "battle is " + std::string(to_string(s.state)));
            break;
          case ErrorCode::kEmptyQuestion:
            out = api_error(400, "empty_question", "question is empty");
            break;
          default:
            out = api_error(500, "internal", e.what());
        }
      }
    });
    if (!found) return api_error(404, "not_found", "unknown battle");
    return out;
  }

  void persist(const BattleSession& s) {
    BattleRecord record = to_record(s);
    writer_->append(record);
    std::lock_guard lock(live_mu_);
    live_.add(record);
  }

  /// Client-facing view of a session. Model and family identities appear
  /// only under "reveal", which exists only for completed battles.
  ojson status_view(const BattleSession& s) const {
    ojson out;
    out["session_id"] = s.session_id;
    out["status"] = to_string(s.state);
    if (!s.question.empty()) out["question"] = s.question;
    if (s.response_a && s.response_b) {
      ojson responses = ojson::array();
      for (Position p : {Position::kA, Position::kB}) {
        ojson r;
        r["position"] = to_string(p);
        r["text"] = s.response_at(p)->text;
        responses.push_back(std::move(r));
      }
      out["responses"] = std::move(responses);
    }
    if (s.initial_choice) out["initial_choice"] = api_choice(*s.initial_choice);
    if (s.state == SessionState::kAwaitingEnergyDecision) {
      out["energy_prompt"]["message"] = config_.energy_prompt(s.language);
    }
    if (s.state == SessionState::kCompleted) out["reveal"] = reveal_payload(s);
    if (s.state == SessionState::kFailed) {
      out["failure"] = s.failure_reason == "abandoned" ? "abandoned" : "provider_failure";
    }
    return out;
  }

  std::uint64_t next_seed() {
    std::lock_guard lock(seed_mu_);
    return seeds_();
  }

  ArenaConfig config_;
  Gateway gateway_;
  Clock clock_;
  std::mutex seed_mu_;
  std::mt19937_64 seeds_;
  IdSource ids_;
  SessionTable sessions_;
  std::unique_ptr<LogWriter> writer_;
  mutable std::mutex live_mu_;
  MetricsAccumulator live_;
};

}  // namespace gea
