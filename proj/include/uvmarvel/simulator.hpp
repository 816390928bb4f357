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

// Pluggable simulator runners. A run compiles one sequence against the
// testbench and reports a coverage delta.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uvmarvel/coverage.hpp"

namespace uvmarvel {

struct SimRequest {
  std::string candidate_id;
  std::string body;
  std::string run_label;
  std::vector<CoverageItem> targets;
};

struct SimResult {
  bool compile_ok = false;
  bool sim_ok = false;
  bool checkers_ok = false;
  std::string error_text;
  CoverageReport delta;
};

class SimRunner {
 public:
  virtual ~SimRunner() = default;
  virtual SimResult run(const SimRequest& request) = 0;
  virtual std::string label() const = 0;
};

/// First `class <name>` in a sequence body, or empty.
std::string sequence_id(std::string_view body);

/// Parses an item key ("CATEGORY|hier|file:line|expression") back into a
/// covered item. Throws InvalidArgument.
CoverageItem item_from_key(std::string_view key);

/// Replays scripted outcomes. Script format:
///   { "rules": [ { "sequence": "seq_x" | "match": "substring",
///                  "compile_ok": true, "sim_ok": true, "checkers_ok": true,
///                  "error": "text", "covers": ["<item key>", ...],
///                  "covers_targets": false, "delta": "file.cov" } ... ],
///     "default": { ...same fields, no matcher... } }
/// The first matching rule wins; without a match the default applies, and
/// without a default the run succeeds and covers nothing.
class ScriptedSimRunner : public SimRunner {
 public:
  struct Rule {
    std::string sequence;
    std::string match;
    bool compile_ok = true;
    bool sim_ok = true;
    bool checkers_ok = true;
    std::string error;
    std::vector<std::string> covers;
    bool covers_targets = false;
    std::string delta_text;
  };

  ScriptedSimRunner(std::vector<Rule> rules, std::optional<Rule> fallback, std::string label = "mock");
  static std::unique_ptr<ScriptedSimRunner> from_file(const std::filesystem::path& path);
  static std::unique_ptr<ScriptedSimRunner> from_json_text(std::string_view text,
                                                           const std::filesystem::path& base_dir = {});

  SimResult run(const SimRequest& request) override;
  std::string label() const override { return label_; }
  std::size_t run_count() const { return runs_; }

 private:
  std::vector<Rule> rules_;
  std::optional<Rule> fallback_;
  std::string label_;
  std::size_t runs_ = 0;
};

/// Runs `<command> <sequence file> <run label> <coverage out>` through the
/// shell. Exit 0 means the run completed, 3 a compile failure, anything else
/// a simulation failure. Output of the command becomes the error text. The
/// coverage file is read when present.
class ExecSimRunner : public SimRunner {
 public:
  explicit ExecSimRunner(std::string command);
  SimResult run(const SimRequest& request) override;
  std::string label() const override { return "exec"; }

 private:
  std::string command_;
};

/// "mock:<script.json>" or "exec:<command>". Throws SimulatorUnavailable.
std::unique_ptr<SimRunner> make_sim_runner(std::string_view spec);

}  // namespace uvmarvel
