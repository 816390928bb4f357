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

// Coverage refinement loop: per uncovered point, trace and patch the design,
// ask three models for a sequence or a waiver, run sequences through the
// simulator with error feedback and merge the coverage they reach.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uvmarvel/coverage.hpp"
#include "uvmarvel/llm_client.hpp"
#include "uvmarvel/simulator.hpp"
#include "uvmarvel/verilog_patcher.hpp"

namespace uvmarvel {

/// ceil(chars / 4).
std::size_t estimate_tokens(std::string_view text);

struct PromptBundle {
  CoverageItem uncovered_item;
  std::string filtered_dut;  // excerpt actually included
  std::vector<std::string> entry_ports;
  std::string task_directive;
  std::size_t token_estimate = 0;
  std::vector<std::string> included_modules;  // in prompt order
  std::vector<std::string> truncated_modules;
  std::string text;  // complete prompt, key line first
};

/// Budget is in tokens and covers the whole prompt. The item's module goes
/// in first and whole; neighbors follow in dependency order, the last one
/// possibly cut at a construct boundary. Throws BudgetTooSmall.
PromptBundle assemble_prompt(const CoverageItem& item, const DependencySlice& slice, const FilteredDUT& fdut,
                             const DesignModel& model, std::size_t budget, const std::string& key);

enum class CandidateStatus { Proposed, CompileFailed, SimFailed, Ran };
std::string_view to_string(CandidateStatus s);

struct SequenceCandidate {
  std::string id;
  std::string source_model;
  std::vector<std::uint32_t> target_items;
  std::string body;
  CandidateStatus status = CandidateStatus::Proposed;
  std::optional<std::string> error_log;
  bool checkers_ok = false;
  std::vector<std::uint32_t> newly_covered;
};

struct WaiverCandidate {
  std::uint32_t target_item = 0;
  std::string justification;
  std::set<std::string> proposing_models;
};

enum class ReplyKind { Sequence, Waiver };

struct ParsedReply {
  ReplyKind kind = ReplyKind::Sequence;
  std::string body;  // sequence code or waiver justification
};

/// First non-empty line must be SEQUENCE or WAIVER; a sequence needs a
/// fenced code block. Throws UnparseableResult.
ParsedReply parse_reply(std::string_view reply);

struct RefineConfig {
  std::size_t context_budget = 6000;
  int points_per_iter = 4;
  int repair_attempts = 1;
  int waiver_quorum = 2;
  double target_score = 90.0;
  int max_iters = 20;
  LlmParams llm_params;
  TraceOptions trace_options;

  /// Throws InvalidArgument.
  void validate() const;
};

struct RunRecord {
  std::string run_label;
  CoverageReport report;
};

struct VerificationReport {
  std::vector<RunRecord> runs;  // baseline first, then one per iteration
  std::vector<std::string> error_logs;
  std::vector<WaiverCandidate> waivers;
  std::vector<SequenceCandidate> candidates;
  double final_score = 0.0;
  std::optional<double> srg;
  int iterations = 0;
  std::size_t llm_calls = 0;
  std::string stop_reason;
};

/// Exactly three clients. Throws SimulatorUnavailable when `sim` is null.
VerificationReport refine(const DesignModel& design, const CoverageReport& report,
                          const std::vector<LlmClient*>& llms, SimRunner* sim, const RefineConfig& config);

struct SrgEntry {
  std::string testbench_id;
  bool compiled = false;
  bool simulated = false;
  bool checkers_passed = false;
};

/// Share of entries that compiled, simulated and passed their checkers, in
/// percent rounded to two decimals. Throws EmptyResults.
double compute_srg(const std::vector<SrgEntry>& results);

}  // namespace uvmarvel
