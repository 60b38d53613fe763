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
#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace gea {

struct TokenCounts {
  std::int64_t prompt = 0;
  std::int64_t completion = 0;

  friend bool operator==(const TokenCounts&, const TokenCounts&) = default;
};

struct CompletionRequest {
  std::string model_id;
  std::string question;
  nlohmann::json generation_params = nlohmann::json::object();
};

/// A full, buffered model answer. `text` may be empty only when the provider
/// refused or filtered (see is_refusal).
struct ModelResponse {
  std::string text;
  std::string model_id;
  std::chrono::milliseconds latency{0};
  std::optional<TokenCounts> token_counts;
  std::string finish_reason;
  int retries = 0;

  friend bool operator==(const ModelResponse&, const ModelResponse&) = default;
};

inline bool is_refusal(const std::string& finish_reason) {
  return finish_reason == "content_filter" || finish_reason == "refusal";
}

}  // namespace gea
