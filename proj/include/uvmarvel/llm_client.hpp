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

// Vendor-neutral LLM contract: complete(prompt, params) -> text.
//
// Prompts built by this library start with a "# key: <stable key>" line so
// that scripted transcripts can be keyed by purpose rather than by the exact
// prompt bytes.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace uvmarvel {

struct LlmParams {
  std::chrono::milliseconds timeout{120000};
  int retries = 2;  // extra attempts after the first failure
  double temperature = 0.2;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// Throws LlmUnavailable when no reply can be produced.
  virtual std::string complete(const std::string& prompt, const LlmParams& params) = 0;
  virtual std::string label() const = 0;
};

/// The "# key:" value of a prompt's first line, or empty.
std::string prompt_key(std::string_view prompt);
/// FNV-1a 64-bit hash of the prompt bytes, 16 lowercase hex digits.
std::string prompt_hash(std::string_view prompt);

/// Replays a transcript: a JSON object whose keys are prompt hashes,
/// "@<prompt key>" or the catch-all "*". Lookup tries them in that order.
class ScriptedClient : public LlmClient {
 public:
  ScriptedClient(std::map<std::string, std::string> transcript, std::string label);
  static std::unique_ptr<ScriptedClient> from_file(const std::filesystem::path& path, std::string label);
  static std::unique_ptr<ScriptedClient> from_json_text(std::string_view text, std::string label);

  std::string complete(const std::string& prompt, const LlmParams& params) override;
  std::string label() const override { return label_; }

  std::size_t call_count() const;
  std::vector<std::string> prompts() const;

 private:
  std::map<std::string, std::string> transcript_;
  std::string label_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

/// Wraps a callable; handy for tests and language bindings.
class FunctionClient : public LlmClient {
 public:
  using Fn = std::function<std::string(const std::string&)>;
  FunctionClient(Fn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}
  std::string complete(const std::string& prompt, const LlmParams&) override { return fn_(prompt); }
  std::string label() const override { return label_; }

 private:
  Fn fn_;
  std::string label_;
};

/// OpenAI-compatible chat-completions client. The bearer token is read from
/// the UVMARVEL_API_KEY environment variable.
class HttpChatClient : public LlmClient {
 public:
  HttpChatClient(std::string endpoint_url, std::string model, std::string label);
  std::string complete(const std::string& prompt, const LlmParams& params) override;
  std::string label() const override { return label_; }

 private:
  std::string scheme_host_;
  std::string path_;
  std::string model_;
  std::string label_;
};

/// "mock:<transcript.json>" or "http:<url>[#model]".
std::unique_ptr<LlmClient> make_llm_client(std::string_view spec, std::string label);

}  // namespace uvmarvel
