/*
 * Copyright 2026 The cspforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "cspforge/common/error.hpp"

namespace cspforge::llm {

enum class ResponseFormat { Free, Json };

struct ChatRequest {
  std::string system;
  std::string user;
  ResponseFormat format = ResponseFormat::Free;
  double temperature = 0.0;
  int max_tokens = 4096;

  /// Throws PreconditionError on empty user text, negative temperature or
  /// non-positive token budget.
  void validate() const;
  /// Text the scripted matchers run over: system, a newline, then user.
  std::string text() const;
};

nlohmann::json to_json(const ChatRequest& r);
ChatRequest request_from_json(const nlohmann::json& j);

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& message) : Error("BackendError", message) {}

 protected:
  BackendError(std::string kind, const std::string& message) : Error(std::move(kind), message) {}
};

class Timeout : public BackendError {
 public:
  explicit Timeout(const std::string& message) : BackendError("Timeout", message) {}
};

class HttpStatus : public BackendError {
 public:
  HttpStatus(int code, std::string body_excerpt);
  int code() const noexcept { return code_; }
  const std::string& body_excerpt() const noexcept { return excerpt_; }

 private:
  int code_;
  std::string excerpt_;
};

class NoScriptMatch : public BackendError {
 public:
  explicit NoScriptMatch(std::string digest);
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

CSPFORGE_DEFINE_ERROR(RecordingDisabled);

struct Exchange {
  ChatRequest request;
  std::string reply;
  std::string timestamp;  // ISO-8601 UTC
};

nlohmann::json transcript_to_json(const std::vector<Exchange>& t);
std::vector<Exchange> transcript_from_json(const nlohmann::json& j);

/// Chat-completion backend. Thread-safe; the transcript records every
/// successful call in completion order when recording is enabled.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  std::string complete(const ChatRequest& req);

  void set_recording(bool on);
  bool recording() const;
  std::vector<Exchange> transcript() const;
  virtual std::string name() const = 0;

 protected:
  virtual std::string do_complete(const ChatRequest& req) = 0;

 private:
  mutable std::mutex transcript_mutex_;
  bool recording_ = false;
  std::vector<Exchange> transcript_;
};

/// One script entry: the request text must contain every `match` substring.
/// Replies are consumed in order; with `repeat` the last reply is returned
/// forever once the others are used up.
struct ScriptEntry {
  std::vector<std::string> match;
  std::vector<std::string> replies;
  bool repeat = false;
};

class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> entries);

  /// {"entries": [{"match": [...], "replies": [...] | "reply": "...",
  ///   "reply_file": "path", "repeat": bool}]}; reply files resolve against
  /// `base_dir`.
  static std::unique_ptr<ScriptedBackend> from_json(const nlohmann::json& j,
                                                    const std::string& base_dir = ".");
  static std::unique_ptr<ScriptedBackend> from_file(const std::string& path);

  std::string name() const override { return "scripted"; }
  /// Entries whose replies are not all consumed.
  std::size_t pending() const;

 protected:
  std::string do_complete(const ChatRequest& req) override;

 private:
  std::mutex mutex_;
  std::vector<ScriptEntry> entries_;
  std::vector<std::size_t> cursor_;
};

enum class WireStyle { OpenAi, Anthropic };

struct HttpConfig {
  std::string endpoint;  // full URL, e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string model;
  std::string api_key_env;  // name of the environment variable holding the key
  double timeout_seconds = 60.0;
  WireStyle style = WireStyle::OpenAi;
  int max_retries = 2;
  std::chrono::milliseconds backoff{500};  // doubled after each retry

  static HttpConfig from_json(const nlohmann::json& j);
};

class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(HttpConfig config);
  std::string name() const override { return "http"; }
  const HttpConfig& config() const noexcept { return config_; }

 protected:
  std::string do_complete(const ChatRequest& req) override;

 private:
  HttpConfig config_;
  std::string origin_;
  std::string path_;
};

/// {"backend": "scripted", "script": path} or {"backend": "http", ...}.
std::unique_ptr<ChatBackend> make_backend(const nlohmann::json& config,
                                          const std::string& base_dir = ".");

/// Short stable identifier of a request for error messages.
std::string request_digest(const ChatRequest& req);

}  // namespace cspforge::llm
