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

// Dependency slicing. Single-module worklist tracing plus the cross-module
// fixpoint that maps signals through instance port bindings in both
// directions until no new interface signal appears.
//
// Edge-triggered sensitivity signals (clocks and resets) are terminal by
// default: statements that mention them are kept, but the signals themselves
// are not expanded, otherwise every register in the design would join every
// slice through the shared clock. Clock/reset entry ports are recovered
// separately by walking the sensitivity lists of sliced always blocks up to
// the top module.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "uvmarvel/verilog_model.hpp"

namespace uvmarvel {

struct SeedSet {
  /// An empty module_name means "every module that knows this name".
  std::set<SignalRef> signals;
  std::optional<std::string> origin;  // coverage item id
};

struct TraceOptions {
  /// Treat clock/reset signals like any other signal.
  bool expand_clock_reset = false;
};

struct SingleFileTrace {
  std::set<StatementId> statements;
  std::set<SignalRef> visited;
  /// Clock/reset signals seen in traced statements but not expanded.
  std::set<SignalRef> terminals;
};

struct DependencySlice {
  /// Module name (one logical file per module) to slice statement ids.
  std::map<std::string, std::set<StatementId>> statements_by_file;
  std::vector<std::set<SignalRef>> iteration_frontiers;
  std::set<std::string> entry_ports;
  std::set<SignalRef> visited_signals;
  std::set<SignalRef> terminal_signals;
  /// Port bindings that carry clock/reset from the top to sliced always
  /// blocks. Not part of the slice proper; the patcher emits them so the
  /// Filtered DUT stays drivable.
  std::set<StatementId> support_statements;
  std::vector<std::string> unresolved_instances;
  bool partial = false;
  bool unreachable_from_io = false;

  std::set<StatementId> all_statements() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }
};

/// Edge-triggered sensitivity signals of a module's always blocks.
std::set<std::string> clock_reset_signals(const DesignModel& model, std::string_view module_name);

/// Name-level copy of `ref` (bit range dropped).
SignalRef name_only(const SignalRef& ref);

/// Parses "sig", "module.sig" or a dotted instance path "top.u_a.sig".
SignalRef parse_seed(const DesignModel& model, std::string_view text);

/// Worklist tracing restricted to one module. Seeds from other modules are
/// ignored; unqualified seeds are taken as belonging to `module_name`.
SingleFileTrace trace_single_file(const SeedSet& seeds, const DesignModel& model,
                                  std::string_view module_name, const TraceOptions& options = {});

/// Cross-module tracing. Throws NoTopModule when the model has no top.
DependencySlice trace_cross_file(const SeedSet& seeds, const DesignModel& model,
                                 const TraceOptions& options = {});

}  // namespace uvmarvel
