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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gea/domain.hpp"
#include "gea/gateway.hpp"

namespace gea {

inline constexpr std::string_view kEnergyPromptEn =
    "Knowing that the other response consumes less energy, would you change your choice "
    "assuming a loss in quality?";
inline constexpr std::string_view kEnergyPromptEs =
    "Sabiendo que la otra respuesta consume menos energía, ¿cambiarías tu elección asumiendo "
    "una pérdida de calidad?";

struct ArenaConfig {
  std::vector<ProviderConfig> providers;
  FamilyRegistry registry;
  std::string listen_address = "127.0.0.1:8080";
  std::filesystem::path log_path = "battles.jsonl";
  std::chrono::milliseconds session_idle_timeout{30 * 60 * 1000};
  std::map<std::string, std::string> energy_prompt_text{{"en", std::string(kEnergyPromptEn)},
                                                        {"es", std::string(kEnergyPromptEs)}};
  std::string default_language = "en";
  std::string ui_origin = "*";

  [[nodiscard]] const std::string& energy_prompt(const std::string& language) const {
    auto it = energy_prompt_text.find(language);
    if (it != energy_prompt_text.end()) return it->second;
    return energy_prompt_text.at(default_language);
  }
};

namespace detail {

inline void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::kInvalidConfig, where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw Error(ErrorCode::kInvalidConfig, where + ": unknown field '" + key + "'");
  }
}

inline std::chrono::milliseconds seconds_field(const json& v, const std::string& where) {
  if (!v.is_number() || v.get<double>() <= 0) {
    throw Error(ErrorCode::kInvalidConfig, where + ": expected a positive number of seconds");
  }
  return std::chrono::milliseconds(static_cast<std::int64_t>(v.get<double>() * 1000.0));
}

inline std::chrono::milliseconds millis_field(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw Error(ErrorCode::kInvalidConfig, where + ": expected non-negative milliseconds");
  }
  return std::chrono::milliseconds(v.get<std::int64_t>());
}

inline ProviderConfig parse_provider(const json& j, const std::string& where) {
  check_keys(j,
             {"provider_id", "kind", "base_url", "api_key_env", "timeout_s", "max_retries",
              "backoff_ms", "mock"},
             where);
  ProviderConfig p;
  p.provider_id = require_string(j, "provider_id", where);
  if (j.contains("kind")) {
    auto kind = parse_provider_kind(require_string(j, "kind", where));
    if (!kind) throw Error(ErrorCode::kInvalidConfig, where + "/kind: unknown provider kind");
    p.kind = *kind;
  } else if (p.provider_id == "mock") {
    p.kind = ProviderKind::kMock;
  } else {
    throw Error(ErrorCode::kInvalidConfig, where + ": missing field 'kind'");
  }
  if (j.contains("base_url")) p.base_url = require_string(j, "base_url", where);
  if (j.contains("api_key_env")) p.api_key_env = require_string(j, "api_key_env", where);
  if (j.contains("timeout_s")) p.timeout = seconds_field(j["timeout_s"], where + "/timeout_s");
  if (j.contains("max_retries")) {
    if (!j["max_retries"].is_number_integer() || j["max_retries"].get<int>() < 0 ||
        j["max_retries"].get<int>() > 10) {
      throw Error(ErrorCode::kInvalidConfig, where + "/max_retries: expected an integer in [0, 10]");
    }
    p.max_retries = j["max_retries"].get<int>();
  }
  if (j.contains("backoff_ms")) p.backoff = millis_field(j["backoff_ms"], where + "/backoff_ms");
  if (j.contains("mock")) {
    const json& m = j["mock"];
    const std::string mwhere = where + "/mock";
    check_keys(m, {"delay_ms", "model_delays_ms", "fail_models"}, mwhere);
    if (m.contains("delay_ms")) p.mock.delay = millis_field(m["delay_ms"], mwhere + "/delay_ms");
    if (m.contains("model_delays_ms") && !m["model_delays_ms"].is_object()) {
      throw Error(ErrorCode::kInvalidConfig, mwhere + "/model_delays_ms: expected an object");
    }
    for (const auto& [model, ms] : m.value("model_delays_ms", json::object()).items()) {
      p.mock.model_delays[model] = millis_field(ms, mwhere + "/model_delays_ms/" + model);
    }
    for (const auto& model : m.value("fail_models", json::array())) {
      if (!model.is_string()) {
        throw Error(ErrorCode::kInvalidConfig, mwhere + "/fail_models: expected strings");
      }
      p.mock.failing_models.insert(model.get<std::string>());
    }
  }
  try {
    validate_provider(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, where + ": " + e.what());
  }
  return p;
}

}  // namespace detail

/// Validates a whole config document. Error messages carry the JSON pointer
/// of the offending value.
inline ArenaConfig parse_config(const json& doc) {
  using namespace detail;
  check_keys(doc,
             {"providers", "families", "listen_address", "log_path", "session_idle_timeout_s",
              "energy_prompt_text", "default_language", "ui_origin"},
             "/");
  ArenaConfig cfg;
  const json& providers = require(doc, "providers", "/");
  if (!providers.is_array()) throw Error(ErrorCode::kInvalidConfig, "/providers: expected an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < providers.size(); ++i) {
    const std::string where = "/providers/" + std::to_string(i);
    ProviderConfig p = parse_provider(providers[i], where);
    if (!ids.insert(p.provider_id).second) {
      throw Error(ErrorCode::kInvalidConfig, where + ": duplicate provider_id " + p.provider_id);
    }
    cfg.providers.push_back(std::move(p));
  }
  cfg.registry = validate_registry(require(doc, "families", "/"), ids);
  if (doc.contains("listen_address")) cfg.listen_address = require_string(doc, "listen_address", "/");
  if (doc.contains("log_path")) cfg.log_path = require_string(doc, "log_path", "/");
  if (doc.contains("session_idle_timeout_s")) {
    cfg.session_idle_timeout = seconds_field(doc["session_idle_timeout_s"], "/session_idle_timeout_s");
  }
  if (doc.contains("energy_prompt_text")) {
    const json& texts = doc["energy_prompt_text"];
    if (!texts.is_object() || texts.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "/energy_prompt_text: expected a non-empty object");
    }
    cfg.energy_prompt_text.clear();
    for (const auto& [lang, text] : texts.items()) {
      if (!text.is_string() || text.get<std::string>().empty()) {
        throw Error(ErrorCode::kInvalidConfig, "/energy_prompt_text/" + lang + ": expected text");
      }
      cfg.energy_prompt_text[lang] = text.get<std::string>();
    }
  }
  if (doc.contains("default_language")) {
    cfg.default_language = require_string(doc, "default_language", "/");
  }
  if (!cfg.energy_prompt_text.contains(cfg.default_language)) {
    throw Error(ErrorCode::kInvalidConfig,
                "/default_language: no energy_prompt_text for '" + cfg.default_language + "'");
  }
  if (doc.contains("ui_origin")) cfg.ui_origin = require_string(doc, "ui_origin", "/");
  return cfg;
}

/// Reads and validates a config file. JSON syntax errors report line and
/// column.
inline ArenaConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, path.string() + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

/// The four families the arena ships with, each a large/small pair.
inline json default_families_document(const std::string& openai = "openai",
                                      const std::string& anthropic = "anthropic",
                                      const std::string& groq = "groq") {
  auto member = [](const std::string& provider, const char* model, const char* name, int rank) {
    return json{{"provider_id", provider},
                {"model_id", model},
                {"display_name", name},
                {"energy_rank", rank}};
  };
  return json::array({
      {{"family_id", "gpt-4o"},
       {"members",
        {member(openai, "gpt-4o-mini-2024-07-18", "GPT-4o mini", 0),
         member(openai, "gpt-4o-2024-08-06", "GPT-4o", 1)}}},
      {{"family_id", "gpt-4.1"},
       {"members",
        {member(openai, "gpt-4.1-mini-2025-04-14", "GPT-4.1 mini", 0),
         member(openai, "gpt-4.1-2025-04-14", "GPT-4.1", 1)}}},
      {{"family_id", "claude-3.5"},
       {"generation_params", {{"max_tokens", 1024}}},
       {"members",
        {member(anthropic, "claude-3-5-haiku-20241022", "Claude Haiku 3.5", 0),
         member(anthropic, "claude-3-5-sonnet-20241022", "Claude Sonnet 3.5", 1)}}},
      {{"family_id", "llama3"},
       {"members",
        {member(groq, "llama3-8b-8192", "Llama3 8B", 0),
         member(groq, "llama3-70b-versatile", "Llama3 70B", 1)}}},
  });
}

/// Same four families, every member served by the in-process mock provider.
inline json mock_config_document() {
  return json{{"providers", json::array({{{"provider_id", "mock"}, {"kind", "mock"}}})},
              {"families", default_families_document("mock", "mock", "mock")}};
}

}  // namespace gea
