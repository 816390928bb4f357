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

// JSON views of the library's values. Objects use nlohmann::json's default
// (sorted) key order so that dumps are byte-stable.

#pragma once

#include <nlohmann/json.hpp>

#include "uvmarvel/bus_protocol.hpp"
#include "uvmarvel/coverage.hpp"
#include "uvmarvel/ir_model.hpp"
#include "uvmarvel/refinement.hpp"
#include "uvmarvel/signal_tracker.hpp"
#include "uvmarvel/verilog_model.hpp"
#include "uvmarvel/verilog_patcher.hpp"

namespace uvmarvel {

using Json = nlohmann::json;

/// Canonical textual form: two-space indent plus trailing newline.
std::string dump_json(const Json& j);

Json to_json(const SignalRef& ref);
Json to_json(const Statement& s);
Json to_json(const DesignModel& model);
Json to_json(const DependencySlice& slice);
/// Reads a slice written by to_json back, checking every statement id
/// against the design. Throws InvalidArgument.
DependencySlice slice_from_json(const Json& j, const DesignModel& model);
Json to_json(const FilteredDUT& dut);

Json to_json(const CoverageItem& item);
Json to_json(const CoverageReport& report);
CoverageReport coverage_report_from_json(const Json& j, std::string_view source_name = "<json>");
Json to_json(const UncoveredSummary& summary, const CoverageReport& report);

Json to_json(const IRDocument& doc);
Json to_json(const IRFinding& finding);

Json to_json(const SpecializedComponent& component);

Json to_json(const PromptBundle& bundle);
Json to_json(const SequenceCandidate& candidate);
Json to_json(const WaiverCandidate& waiver);
Json to_json(const VerificationReport& report);

}  // namespace uvmarvel
