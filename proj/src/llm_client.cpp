// Copyright 2026 The UVMarvel Authors
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

#include "uvmarvel/llm_client.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "uvmarvel/error.hpp"
#include "uvmarvel/json_io.hpp"

namespace uvmarvel {

std::string prompt_key(std::string_view prompt) {
  constexpr std::string_view kPrefix = "# key:";
  if (prompt.substr(0, kPrefix.size()) != kPrefix) return "";
  auto eol = prompt.find('\n');
  std::string_view v = prompt.substr(kPrefix.size(), eol == std::string_view::npos ? std::string_view::npos : eol - kPrefix.size());
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\r')) v.remove_suffix(1);
  return std::string(v);
}

std::string prompt_hash(std::string_view prompt) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

ScriptedClient::ScriptedClient(std::map<std::string, std::string> transcript, std::string label)
    : transcript_(std::move(transcript)), label_(std::move(label)) {}

std::unique_ptr<ScriptedClient> ScriptedClient::from_json_text(std::string_view text, std::string label) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "transcript for '" + label + "' is not a JSON object");
  }
  std::map<std::string, std::string> t;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw Error(ErrorCode::InvalidArgument, "transcript entry '" + k + "' is not a string");
    t[k] = v.get<std::string>();
  }
  return std::make_unique<ScriptedClient>(std::move(t), std::move(label));
}

std::unique_ptr<ScriptedClient> ScriptedClient::from_file(const std::filesystem::path& path, std::string label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotReadable, "cannot read transcript '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), std::move(label));
}

std::string ScriptedClient::complete(const std::string& prompt, const LlmParams&) {
  {
    std::lock_guard lock(mu_);
    prompts_.push_back(prompt);
  }
  if (auto it = transcript_.find(prompt_hash(prompt)); it != transcript_.end()) return it->second;
  std::string key = prompt_key(prompt);
  if (!key.empty()) {
    if (auto it = transcript_.find("@" + key); it != transcript_.end()) return it->second;
  }
  if (auto it = transcript_.find("*"); it != transcript_.end()) return it->second;
  throw Error(ErrorCode::LlmUnavailable,
              "scripted client '" + label_ + "' has no reply for prompt " + prompt_hash(prompt) +
                  (key.empty() ? "" : " (key " + key + ")"));
}

std::size_t ScriptedClient::call_count() const {
  std::lock_guard lock(mu_);
  return prompts_.size();
}

std::vector<std::string> ScriptedClient::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

HttpChatClient::HttpChatClient(std::string endpoint_url, std::string model, std::string label)
    : model_(std::move(model)), label_(std::move(label)) {
  auto scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint '" + endpoint_url + "' has no scheme");
  }
  auto path_start = endpoint_url.find('/', scheme_end + 3);
  scheme_host_ = endpoint_url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/v1/chat/completions" : endpoint_url.substr(path_start);
}

std::string HttpChatClient::complete(const std::string& prompt, const LlmParams& params) {
  const char* key = std::getenv("UVMARVEL_API_KEY");
  Json body = {{"model", model_},
               {"temperature", params.temperature},
               {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})}};
  std::string last_error;
  for (int attempt = 0; attempt <= params.retries; ++attempt) {
    if (attempt) std::this_thread::sleep_for(std::chrono::milliseconds(500 * attempt));
    try {
      httplib::Client cli(scheme_host_);
      auto secs = std::chrono::duration_cast<std::chrono::seconds>(params.timeout).count();
      cli.set_read_timeout(static_cast<time_t>(secs), 0);
      cli.set_connection_timeout(10, 0);
      httplib::Headers headers;
      if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
      auto res = cli.Post(path_, headers, body.dump(), "application/json");
      if (!res) {
        last_error = "connection failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status >= 400 && res->status < 500 && res->status != 429) break;
        continue;
      }
      Json reply = Json::parse(res->body, nullptr, false);
      if (reply.is_discarded()) {
        last_error = "reply is not JSON";
        continue;
      }
      const Json* content = nullptr;
      if (reply.contains("choices") && reply["choices"].is_array() && !reply["choices"].empty()) {
        const auto& c = reply["choices"][0];
        if (c.contains("message") && c["message"].contains("content")) content = &c["message"]["content"];
      }
      if (!content || !content->is_string()) {
        last_error = "reply has no choices[0].message.content";
        continue;
      }
      return content->get<std::string>();
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::LlmUnavailable, "LLM '" + label_ + "' at " + scheme_host_ + path_ + ": " + last_error);
}

std::unique_ptr<LlmClient> make_llm_client(std::string_view spec, std::string label) {
  auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "LLM spec '" + std::string(spec) + "' must be mock:<file> or http:<url>");
  }
  std::string kind(spec.substr(0, colon));
  std::string rest(spec.substr(colon + 1));
  if (kind == "mock") return ScriptedClient::from_file(rest, std::move(label));
  if (kind == "http") {
    std::string model = "gpt-4o";
    if (auto hash = rest.find('#'); hash != std::string::npos) {
      model = rest.substr(hash + 1);
      rest = rest.substr(0, hash);
    }
    return std::make_unique<HttpChatClient>(rest, model, std::move(label));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown LLM backend '" + kind + "'");
}

}  // namespace uvmarvel
