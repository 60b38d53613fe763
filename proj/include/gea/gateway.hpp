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
#include <cstdlib>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include "gea/completion.hpp"
#include "gea/pairing.hpp"
#include "httplib.h"

namespace gea {

enum class ProviderKind { kOpenAI, kAnthropic, kOpenAICompatible, kMock };

inline std::optional<ProviderKind> parse_provider_kind(std::string_view s) {
  if (s == "openai") return ProviderKind::kOpenAI;
  if (s == "anthropic") return ProviderKind::kAnthropic;
  if (s == "openai_compatible") return ProviderKind::kOpenAICompatible;
  if (s == "mock") return ProviderKind::kMock;
  return std::nullopt;
}

/// Knobs for the in-process mock provider.
struct MockBehavior {
  std::chrono::milliseconds delay{0};
  std::map<std::string, std::chrono::milliseconds> model_delays;
  std::set<std::string> failing_models;
};

struct ProviderConfig {
  std::string provider_id;
  ProviderKind kind = ProviderKind::kMock;
  std::string base_url;
  std::string api_key_env;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 2;
  std::chrono::milliseconds backoff{250};  // doubled after every failed attempt
  MockBehavior mock;
};

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;  // no trailing slash

  [[nodiscard]] std::string origin() const {
    return scheme + "://" + host + ":" + std::to_string(port);
  }
};

inline std::optional<ParsedUrl> parse_base_url(const std::string& url) {
  static const std::regex re(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9a-fA-F:]+\])(?::(\d{1,5}))?(/[^\s?#]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) return std::nullopt;
  ParsedUrl out;
  out.scheme = m[1];
  out.host = m[2];
  out.port = m[3].matched ? std::stoi(m[3]) : (out.scheme == "https" ? 443 : 80);
  if (out.port <= 0 || out.port > 65535) return std::nullopt;
  out.path = m[4].matched ? std::string(m[4]) : "";
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

inline void validate_provider(const ProviderConfig& p) {
  if (p.provider_id.empty()) throw Error(ErrorCode::kInvalidConfig, "provider_id is empty");
  if (p.timeout.count() <= 0) {
    throw Error(ErrorCode::kInvalidConfig, p.provider_id + ": timeout must be positive");
  }
  if (p.max_retries < 0) {
    throw Error(ErrorCode::kInvalidConfig, p.provider_id + ": max_retries must be >= 0");
  }
  if (p.kind != ProviderKind::kMock) {
    if (!parse_base_url(p.base_url)) {
      throw Error(ErrorCode::kInvalidConfig,
                  p.provider_id + ": base_url '" + p.base_url + "' is not a valid URL");
    }
    if (p.api_key_env.empty()) {
      throw Error(ErrorCode::kInvalidConfig, p.provider_id + ": api_key_env is required");
    }
  }
}

/// FNV-1a, 64-bit.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// The mock answer is a pure function of (model_id, question, params). The
/// text never names the model so blinding checks stay meaningful.
inline std::string mock_answer_text(const CompletionRequest& req) {
  std::uint64_t h = fnv1a64(req.model_id);
  h = fnv1a64(std::string_view("\0", 1), h);
  h = fnv1a64(req.question, h);
  h = fnv1a64(std::string_view("\0", 1), h);
  h = fnv1a64(req.generation_params.dump(), h);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  static constexpr std::string_view kOpenings[] = {
      "Here is a short answer.", "Good question.", "Let me explain briefly.",
      "In a few words:"};
  return std::string(kOpenings[h % 4]) + " Mock completion " + hex + " for a question of " +
         std::to_string(req.question.size()) + " bytes.";
}

namespace detail {

inline std::int64_t count_words(std::string_view s) {
  std::int64_t n = 0;
  bool in_word = false;
  for (char c : s) {
    bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

inline ModelResponse mock_complete(const ProviderConfig& p, const CompletionRequest& req) {
  auto delay = p.mock.delay;
  if (auto it = p.mock.model_delays.find(req.model_id); it != p.mock.model_delays.end()) {
    delay = it->second;
  }
  if (delay > p.timeout) {
    std::this_thread::sleep_for(p.timeout);
    throw Error(ErrorCode::kTimeout, p.provider_id + ": mock exceeded timeout");
  }
  if (delay.count() > 0) std::this_thread::sleep_for(delay);
  if (p.mock.failing_models.contains(req.model_id)) {
    throw Error(ErrorCode::kProviderError, p.provider_id + ": mock configured to fail");
  }
  ModelResponse r;
  r.text = mock_answer_text(req);
  r.model_id = req.model_id;
  r.finish_reason = "stop";
  r.token_counts = TokenCounts{count_words(req.question), count_words(r.text)};
  return r;
}

inline std::string read_api_key(const ProviderConfig& p) {
  const char* key = std::getenv(p.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::kAuthError,
                p.provider_id + ": environment variable " + p.api_key_env + " is not set");
  }
  return key;
}

inline ModelResponse parse_openai(const json& body, const std::string& model_id) {
  const json& choice = body.at("choices").at(0);
  ModelResponse r;
  r.model_id = model_id;
  const json& content = choice.at("message").at("content");
  r.text = content.is_string() ? content.get<std::string>() : "";
  r.finish_reason = choice.value("finish_reason", "");
  if (body.contains("usage") && body["usage"].is_object()) {
    r.token_counts = TokenCounts{body["usage"].value("prompt_tokens", std::int64_t{0}),
                                 body["usage"].value("completion_tokens", std::int64_t{0})};
  }
  return r;
}

inline ModelResponse parse_anthropic(const json& body, const std::string& model_id) {
  ModelResponse r;
  r.model_id = model_id;
  for (const auto& block : body.at("content")) {
    if (block.value("type", "") == "text") r.text += block.value("text", "");
  }
  r.finish_reason = body.value("stop_reason", "");
  if (body.contains("usage") && body["usage"].is_object()) {
    r.token_counts = TokenCounts{body["usage"].value("input_tokens", std::int64_t{0}),
                                 body["usage"].value("output_tokens", std::int64_t{0})};
  }
  return r;
}

}  // namespace detail

/// Parameters that go on the wire for this provider kind. Anthropic's API
/// requires max_tokens, so a default is filled in when absent.
inline json effective_params(ProviderKind kind, const json& params) {
  json out = params.is_object() ? params : json::object();
  if (kind == ProviderKind::kAnthropic && !out.contains("max_tokens")) out["max_tokens"] = 1024;
  return out;
}

/// Request body for a chat-completion call. Generation params are merged in
/// verbatim; model and messages always win.
inline json build_request_body(ProviderKind kind, const CompletionRequest& req) {
  json body = effective_params(kind, req.generation_params);
  body["model"] = req.model_id;
  body["messages"] = json::array({{{"role", "user"}, {"content", req.question}}});
  return body;
}

/// One full completion. Transient failures (HTTP 5xx/429, transport errors)
/// are retried up to max_retries times with exponential backoff; auth
/// failures are not retried.
inline ModelResponse complete(const ProviderConfig& p, const CompletionRequest& req) {
  if (detail::count_words(req.question) == 0) {
    throw Error(ErrorCode::kEmptyQuestion, "completion request with an empty question");
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
  };
  if (p.kind == ProviderKind::kMock) {
    ModelResponse r = detail::mock_complete(p, req);
    r.latency = elapsed();
    return r;
  }

  const std::string key = detail::read_api_key(p);
  const auto url = parse_base_url(p.base_url);
  if (!url) throw Error(ErrorCode::kInvalidConfig, p.provider_id + ": bad base_url");

  httplib::Headers headers;
  std::string path;
  if (p.kind == ProviderKind::kAnthropic) {
    headers.emplace("x-api-key", key);
    headers.emplace("anthropic-version", "2023-06-01");
    path = url->path + "/messages";
  } else {
    headers.emplace("Authorization", "Bearer " + key);
    path = url->path + "/chat/completions";
  }
  const std::string body = build_request_body(p.kind, req).dump();

  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(p.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(p.timeout - secs);

  ErrorCode last_code = ErrorCode::kProviderError;
  std::string last_message;
  auto backoff = p.backoff;
  for (int attempt = 0; attempt <= p.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(url->origin());
    if (!client.is_valid()) {
      throw Error(ErrorCode::kProviderError,
                  p.provider_id + ": cannot create a client for " + url->origin() +
                      " (is HTTPS support compiled in?)");
    }
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    const auto attempt_start = std::chrono::steady_clock::now();
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      const auto spent = std::chrono::steady_clock::now() - attempt_start;
      const bool timed_out =
          res.error() == httplib::Error::ConnectionTimeout ||
          (res.error() == httplib::Error::Read && spent >= p.timeout * 9 / 10);
      last_code = timed_out ? ErrorCode::kTimeout : ErrorCode::kProviderError;
      last_message = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::kAuthError,
                  p.provider_id + ": credentials rejected (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status >= 500 || res->status == 429) {
      last_code = ErrorCode::kProviderError;
      last_message = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::kProviderError,
                  p.provider_id + ": HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    ModelResponse r;
    try {
      const json parsed = json::parse(res->body);
      r = p.kind == ProviderKind::kAnthropic ? detail::parse_anthropic(parsed, req.model_id)
                                             : detail::parse_openai(parsed, req.model_id);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kProviderError,
                  p.provider_id + ": unexpected response body: " + e.what());
    }
    if (r.text.empty() && !is_refusal(r.finish_reason)) {
      throw Error(ErrorCode::kProviderError, p.provider_id + ": empty completion");
    }
    r.retries = attempt;
    r.latency = elapsed();
    return r;
  }
  throw Error(last_code, p.provider_id + ": giving up after " +
                             std::to_string(p.max_retries + 1) + " attempt(s): " + last_message);
}

/// Raised when either side of a pair fan-out fails. The battle must fail.
class PairFailure : public Error {
 public:
  PairFailure(Role side, ErrorCode cause, const std::string& message)
      : Error(ErrorCode::kPairFailure,
              std::string(side == Role::kLarge ? "L" : "S") + " side failed: " + message),
        side_(side),
        cause_(cause) {}

  [[nodiscard]] Role side() const noexcept { return side_; }
  [[nodiscard]] ErrorCode cause() const noexcept { return cause_; }

 private:
  Role side_;
  ErrorCode cause_;
};

struct PairResponses {
  ModelResponse large;
  ModelResponse small;
  json params_sent;  // what went on the wire for the large side
};

/// Provider lookup by id plus the concurrent pair fan-out.
class Gateway {
 public:
  Gateway() = default;
  explicit Gateway(const std::vector<ProviderConfig>& providers) {
    for (const auto& p : providers) add(p);
  }

  void add(ProviderConfig p) {
    validate_provider(p);
    std::string id = p.provider_id;
    providers_.insert_or_assign(std::move(id), std::move(p));
  }

  [[nodiscard]] const ProviderConfig& provider(const std::string& id) const {
    auto it = providers_.find(id);
    if (it == providers_.end()) throw Error(ErrorCode::kUnknownProvider, id);
    return it->second;
  }

  [[nodiscard]] std::set<std::string> provider_ids() const {
    std::set<std::string> out;
    for (const auto& [id, _] : providers_) out.insert(id);
    return out;
  }

  /// Both requests run concurrently; the result has both answers or the call
  /// throws PairFailure.
  [[nodiscard]] PairResponses complete_pair(const BattleSetup& setup, const std::string& question,
                                            const json& params) const {
    const ProviderConfig& pl = provider(setup.pair.large().provider_id);
    const ProviderConfig& ps = provider(setup.pair.small().provider_id);
    CompletionRequest rl{setup.pair.large().model_id, question, params};
    CompletionRequest rs{setup.pair.small().model_id, question, params};

    auto fl = std::async(std::launch::async, [&] { return complete(pl, rl); });
    auto fs = std::async(std::launch::async, [&] { return complete(ps, rs); });

    auto collect = [](std::future<ModelResponse>& f, Role side) -> ModelResponse {
      try {
        return f.get();
      } catch (const Error& e) {
        throw PairFailure(side, e.code(), e.what());
      } catch (const std::exception& e) {
        throw PairFailure(side, ErrorCode::kProviderError, e.what());
      }
    };
    std::optional<PairFailure> failure;
    std::optional<ModelResponse> large, small;
    try {
      large = collect(fl, Role::kLarge);
    } catch (const PairFailure& f) {
      failure = f;
    }
    try {
      small = collect(fs, Role::kSmall);
    } catch (const PairFailure& f) {
      if (!failure) failure = f;
    }
    if (failure) throw *failure;
    return PairResponses{std::move(*large), std::move(*small), effective_params(pl.kind, params)};
  }

 private:
  std::map<std::string, ProviderConfig> providers_;
};

}  // namespace gea
