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

#include "cspforge/llm/backend.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "httplib.h"

namespace cspforge::llm {

using nlohmann::json;

namespace {

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw BackendError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string excerpt(const std::string& s, std::size_t n = 200) {
  return s.size() <= n ? s : s.substr(0, n) + "...";
}

}  // namespace

void ChatRequest::validate() const {
  if (user.empty()) throw PreconditionError("chat request has empty user text");
  if (temperature < 0) throw PreconditionError("chat request temperature is negative");
  if (max_tokens <= 0) throw PreconditionError("chat request token budget must be positive");
}

std::string ChatRequest::text() const { return system + "\n" + user; }

json to_json(const ChatRequest& r) {
  return {{"system", r.system},
          {"user", r.user},
          {"format", r.format == ResponseFormat::Json ? "json" : "free"},
          {"temperature", r.temperature},
          {"max_tokens", r.max_tokens}};
}

ChatRequest request_from_json(const json& j) {
  ChatRequest r;
  r.system = j.value("system", "");
  r.user = j.at("user").get<std::string>();
  r.format = j.value("format", "free") == "json" ? ResponseFormat::Json : ResponseFormat::Free;
  r.temperature = j.value("temperature", 0.0);
  r.max_tokens = j.value("max_tokens", 4096);
  return r;
}

HttpStatus::HttpStatus(int code, std::string body_excerpt)
    : BackendError("HttpStatus", "HTTP " + std::to_string(code) + ": " + body_excerpt),
      code_(code),
      excerpt_(std::move(body_excerpt)) {}

NoScriptMatch::NoScriptMatch(std::string digest)
    : BackendError("NoScriptMatch", "no script entry matches request " + digest),
      digest_(std::move(digest)) {}

std::string request_digest(const ChatRequest& req) {
  // FNV-1a over the full text plus a readable head of the user message.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : req.text()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream ss;
  ss << std::hex << h;
  std::string head = req.user.substr(0, 60);
  for (auto& c : head) {
    if (c == '\n') c = ' ';
  }
  return ss.str() + " \"" + head + "\"";
}

json transcript_to_json(const std::vector<Exchange>& t) {
  json out = json::array();
  for (const auto& e : t) {
    out.push_back({{"request", to_json(e.request)}, {"reply", e.reply}, {"timestamp", e.timestamp}});
  }
  return out;
}

std::vector<Exchange> transcript_from_json(const json& j) {
  std::vector<Exchange> out;
  for (const auto& e : j) {
    out.push_back({request_from_json(e.at("request")), e.at("reply").get<std::string>(),
                   e.value("timestamp", "")});
  }
  return out;
}

std::string ChatBackend::complete(const ChatRequest& req) {
  req.validate();
  std::string reply = do_complete(req);
  std::lock_guard lock(transcript_mutex_);
  if (recording_) transcript_.push_back({req, reply, utc_now()});
  return reply;
}

void ChatBackend::set_recording(bool on) {
  std::lock_guard lock(transcript_mutex_);
  recording_ = on;
}

bool ChatBackend::recording() const {
  std::lock_guard lock(transcript_mutex_);
  return recording_;
}

std::vector<Exchange> ChatBackend::transcript() const {
  std::lock_guard lock(transcript_mutex_);
  if (!recording_) throw RecordingDisabled("backend was created without transcript recording");
  return transcript_;
}

// ---------------------------------------------------------------------------
// Scripted

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)), cursor_(entries_.size(), 0) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(const json& j,
                                                            const std::string& base_dir) {
  std::vector<ScriptEntry> entries;
  for (const auto& e : j.at("entries")) {
    ScriptEntry entry;
    if (e.contains("match")) {
      if (e["match"].is_string()) {
        entry.match.push_back(e["match"].get<std::string>());
      } else {
        entry.match = e["match"].get<std::vector<std::string>>();
      }
    }
    if (e.contains("reply")) entry.replies.push_back(e["reply"].get<std::string>());
    if (e.contains("replies")) {
      for (const auto& r : e["replies"]) entry.replies.push_back(r.get<std::string>());
    }
    if (e.contains("reply_file")) {
      entry.replies.push_back(read_file(std::filesystem::path(base_dir) /
                                        e["reply_file"].get<std::string>()));
    }
    if (e.contains("reply_files")) {
      for (const auto& f : e["reply_files"]) {
        entry.replies.push_back(read_file(std::filesystem::path(base_dir) / f.get<std::string>()));
      }
    }
    if (entry.replies.empty()) throw PreconditionError("script entry without replies");
    entry.repeat = e.value("repeat", false);
    entries.push_back(std::move(entry));
  }
  return std::make_unique<ScriptedBackend>(std::move(entries));
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  auto text = read_file(path);
  return from_json(json::parse(text), std::filesystem::path(path).parent_path().string());
}

std::size_t ScriptedBackend::pending() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (cursor_[i] < entries_[i].replies.size()) ++n;
  }
  return n;
}

std::string ScriptedBackend::do_complete(const ChatRequest& req) {
  const std::string text = req.text();
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    bool matches = std::all_of(e.match.begin(), e.match.end(), [&](const std::string& m) {
      return text.find(m) != std::string::npos;
    });
    if (!matches) continue;
    if (cursor_[i] < e.replies.size()) return e.replies[cursor_[i]++];
    if (e.repeat) return e.replies.back();
  }
  throw NoScriptMatch(request_digest(req));
}

// ---------------------------------------------------------------------------
// HTTP

HttpConfig HttpConfig::from_json(const json& j) {
  HttpConfig c;
  c.endpoint = j.at("endpoint").get<std::string>();
  c.model = j.value("model", "");
  c.api_key_env = j.value("api_key_env", "");
  c.timeout_seconds = j.value("timeout_seconds", 60.0);
  c.max_retries = j.value("max_retries", 2);
  c.backoff = std::chrono::milliseconds(j.value("backoff_ms", 500));
  auto style = j.value("style", "openai");
  if (style == "openai") {
    c.style = WireStyle::OpenAi;
  } else if (style == "anthropic") {
    c.style = WireStyle::Anthropic;
  } else {
    throw PreconditionError("unknown wire style '" + style + "'");
  }
  return c;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw PreconditionError("malformed endpoint URL '" + config_.endpoint + "'");
  }
  origin_ = m[1];
  path_ = m[2].matched ? std::string(m[2]) : "/";
  if (config_.max_retries < 0 || config_.max_retries > 2) {
    throw PreconditionError("max_retries must be between 0 and 2");
  }
}

std::string HttpBackend::do_complete(const ChatRequest& req) {
  std::string key;
  if (!config_.api_key_env.empty()) {
    const char* v = std::getenv(config_.api_key_env.c_str());
    if (!v) throw BackendError("environment variable " + config_.api_key_env + " is not set");
    key = v;
  }

  json body;
  httplib::Headers headers;
  if (config_.style == WireStyle::OpenAi) {
    json messages = json::array();
    if (!req.system.empty()) messages.push_back({{"role", "system"}, {"content", req.system}});
    messages.push_back({{"role", "user"}, {"content", req.user}});
    body = {{"model", config_.model},
            {"messages", messages},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
    if (req.format == ResponseFormat::Json) body["response_format"] = {{"type", "json_object"}};
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  } else {
    body = {{"model", config_.model},
            {"system", req.system},
            {"messages", json::array({{{"role", "user"}, {"content", req.user}}})},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
    headers.emplace("anthropic-version", "2023-06-01");
    if (!key.empty()) headers.emplace("x-api-key", key);
  }

  httplib::Client client(origin_);
  const auto seconds = static_cast<time_t>(config_.timeout_seconds);
  const auto micros = static_cast<time_t>((config_.timeout_seconds - seconds) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  const std::string payload = body.dump();
  auto delay = config_.backoff;
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= config_.max_retries;
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      auto err = res.error();
      const bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                             err == httplib::Error::ConnectionTimeout;
      if (last) {
        if (timed_out) throw Timeout("request to " + config_.endpoint + " timed out");
        throw BackendError("request to " + config_.endpoint + " failed: " + httplib::to_string(err));
      }
    } else if (res->status >= 200 && res->status < 300) {
      json reply;
      try {
        reply = json::parse(res->body);
        if (config_.style == WireStyle::OpenAi) {
          return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        }
        std::string text;
        for (const auto& part : reply.at("content")) {
          if (part.value("type", "text") == "text") text += part.at("text").get<std::string>();
        }
        return text;
      } catch (const json::exception& e) {
        throw BackendError("unexpected reply shape: " + excerpt(res->body));
      }
    } else if (res->status < 500 || last) {
      throw HttpStatus(res->status, excerpt(res->body));
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

std::unique_ptr<ChatBackend> make_backend(const json& config, const std::string& base_dir) {
  const auto kind = config.value("backend", "scripted");
  std::unique_ptr<ChatBackend> backend;
  if (kind == "scripted") {
    auto script = (std::filesystem::path(base_dir) / config.at("script").get<std::string>()).string();
    backend = ScriptedBackend::from_file(script);
  } else if (kind == "http") {
    backend = std::make_unique<HttpBackend>(HttpConfig::from_json(config));
  } else {
    throw PreconditionError("unknown backend '" + kind + "'");
  }
  backend->set_recording(config.value("record", false));
  return backend;
}

}  // namespace cspforge::llm
