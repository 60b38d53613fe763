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


#include "gea/config.hpp"
#include "gea/seed_questions.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"

namespace gea {
namespace {

using namespace std::chrono_literals;

const std::filesystem::path kSourceDir = GEA_SOURCE_DIR;

std::string message_of(const std::function<void()>& fn, ErrorCode expected) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expected) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "expected an error";
  return {};
}

TEST(Config, MockDocumentParses) {
  ArenaConfig cfg = parse_config(mock_config_document());
  EXPECT_EQ(cfg.registry.size(), 4u);
  ASSERT_EQ(cfg.providers.size(), 1u);
  EXPECT_EQ(cfg.providers[0].kind, ProviderKind::kMock);
  EXPECT_EQ(cfg.listen_address, "127.0.0.1:8080");
  EXPECT_EQ(cfg.session_idle_timeout, 30min);
  const ModelFamily* claude = cfg.registry.find("claude-3.5");
  ASSERT_NE(claude, nullptr);
  EXPECT_EQ(claude->members.back().model_id, "claude-3-5-sonnet-20241022");
  EXPECT_EQ(claude->generation_params["max_tokens"], 1024);
}

TEST(Config, DefaultEnergyPromptIsVerbatim) {
  ArenaConfig cfg = parse_config(mock_config_document());
  EXPECT_EQ(cfg.energy_prompt("en"),
            "Knowing that the other response consumes less energy, would you change your choice "
            "assuming a loss in quality?");
  EXPECT_EQ(cfg.energy_prompt("es"), std::string(kEnergyPromptEs));
  EXPECT_EQ(cfg.energy_prompt("fr"), cfg.energy_prompt("en"));
}

TEST(Config, PromptTextOverride) {
  json doc = mock_config_document();
  doc["energy_prompt_text"] = {{"es", "¿Cambiarías?"}};
  doc["default_language"] = "es";
  ArenaConfig cfg = parse_config(doc);
  EXPECT_EQ(cfg.energy_prompt("en"), "¿Cambiarías?");
  doc["default_language"] = "en";
  message_of([&] { parse_config(doc); }, ErrorCode::kInvalidConfig);
}

TEST(Config, UnknownKeysRejected) {
  json doc = mock_config_document();
  doc["listen"] = "x";
  EXPECT_NE(message_of([&] { parse_config(doc); }, ErrorCode::kInvalidConfig).find("listen"),
            std::string::npos);
  doc = mock_config_document();
  doc["providers"][0]["timeout"] = 3;
  message_of([&] { parse_config(doc); }, ErrorCode::kInvalidConfig);
  doc = mock_config_document();
  doc["providers"][0]["mock"] = {{"delay", 3}};
  message_of([&] { parse_config(doc); }, ErrorCode::kInvalidConfig);
}

TEST(Config, RegistryErrorsSurface) {
  json doc = mock_config_document();
  doc["families"][1]["family_id"] = "gpt-4o";
  message_of([&] { parse_config(doc); }, ErrorCode::kDuplicateFamilyId);
  doc = mock_config_document();
  doc["families"][0]["members"][0]["provider_id"] = "nobody";
  message_of([&] { parse_config(doc); }, ErrorCode::kUnknownProvider);
  doc = mock_config_document();
  doc["families"] = json::array();
  message_of([&] { parse_config(doc); }, ErrorCode::kEmptyRegistry);
}

TEST(Config, ProviderFields) {
  json doc = mock_config_document();
  doc["providers"].push_back({{"provider_id", "groq"},
                              {"kind", "openai_compatible"},
                              {"base_url", "https://api.groq.com/openai/v1"},
                              {"api_key_env", "GROQ_API_KEY"},
                              {"timeout_s", 2.5},
                              {"max_retries", 4},
                              {"backoff_ms", 100}});
  ArenaConfig cfg = parse_config(doc);
  ASSERT_EQ(cfg.providers.size(), 2u);
  const ProviderConfig& g = cfg.providers[1];
  EXPECT_EQ(g.kind, ProviderKind::kOpenAICompatible);
  EXPECT_EQ(g.timeout, 2500ms);
  EXPECT_EQ(g.max_retries, 4);
  EXPECT_EQ(g.backoff, 100ms);
  doc["providers"][1]["base_url"] = "groq";
  message_of([&] { parse_config(doc); }, ErrorCode::kInvalidConfig);
}

TEST(Config, SyntaxErrorReportsLine) {
  testing::TempDir dir;
  auto path = dir.file("bad.json");
  std::ofstream(path) << "{\n  \"providers\": [],\n  \"families\": [,]\n}\n";
  std::string msg = message_of([&] { load_config(path); }, ErrorCode::kInvalidConfig);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  message_of([&] { load_config(dir.file("missing.json")); }, ErrorCode::kInvalidConfig);
}

TEST(Config, ShippedFilesLoad) {
  ArenaConfig mock = load_config(kSourceDir / "config" / "mock.json");
  EXPECT_EQ(mock.registry.size(), 4u);
  ArenaConfig real = load_config(kSourceDir / "config" / "arena.example.json");
  EXPECT_EQ(real.providers.size(), 3u);
  EXPECT_EQ(real.energy_prompt("en"), std::string(kEnergyPromptEn));
  EXPECT_EQ(real.energy_prompt("es"), std::string(kEnergyPromptEs));
  // Same families as the built-in document, apart from provider ids.
  EXPECT_EQ(json::parse(std::ifstream(kSourceDir / "config" / "arena.example.json"))["families"],
            default_families_document());
}

TEST(SeedQuestions, AssetMatchesBuiltIn) {
  json doc = json::parse(std::ifstream(kSourceDir / "assets" / "seed_questions.json"));
  ASSERT_EQ(doc["questions"].size(), kSeedQuestions.size());
  for (std::size_t i = 0; i < kSeedQuestions.size(); ++i) {
    EXPECT_EQ(doc["questions"][i]["es"], std::string(kSeedQuestions[i].es));
    EXPECT_EQ(doc["questions"][i]["en"], std::string(kSeedQuestions[i].en));
  }
}

}  // namespace
}  // namespace gea
