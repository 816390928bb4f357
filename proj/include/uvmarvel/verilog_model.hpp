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

// Statement-level model of a synthesizable Verilog-2001 subset.
//
// Every statement records the signals it reads and writes. Containers
// (always, if, case, case items) read the signals of their own header and
// write the union of what their descendants write. Parameters, genvars and
// function/task names are constants and never appear in read/write sets.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace uvmarvel {

using StatementId = std::uint32_t;

struct BitRange {
  int msb = 0;
  int lsb = 0;
  auto operator<=>(const BitRange&) const = default;
};

struct SignalRef {
  std::string module_name;
  std::string signal_name;
  std::optional<BitRange> bit_range;

  auto operator<=>(const SignalRef&) const = default;
};

/// True for plain and escaped Verilog identifiers.
bool is_legal_identifier(std::string_view name);

enum class StatementKind {
  ContinuousAssign,
  ProceduralAssign,
  AlwaysBlock,
  IfBlock,
  CaseBlock,
  CaseBranch,
  InstanceConnection,
  Declaration,
};

std::string_view to_string(StatementKind kind);
std::optional<StatementKind> statement_kind_from_string(std::string_view text);

struct SourceSpan {
  std::string file;
  int line_start = 0;
  int line_end = 0;
  std::size_t offset_begin = 0;
  std::size_t offset_end = 0;
};

enum class Edge { None, Posedge, Negedge };

struct SensitivityItem {
  Edge edge = Edge::None;
  std::string signal;
};

struct Statement {
  StatementId id = 0;
  StatementKind kind = StatementKind::Declaration;
  std::string module_name;
  SourceSpan span;
  std::set<SignalRef> reads;
  std::set<SignalRef> writes;
  std::optional<StatementId> parent_id;
  std::vector<StatementId> children;
  std::string raw_text;

  // Construct details.
  //   AlwaysBlock:        "@(posedge clk)", "@*", or empty when absent
  //   IfBlock:            "if (cond)"
  //   CaseBlock:          "case (sel)" (casez/casex preserved)
  //   CaseBranch:         the label list, "default" for default items
  //   ContinuousAssign:   the assignment list between `assign` and `;`
  //   InstanceConnection: the formal port name
  std::string header;
  std::vector<SensitivityItem> sensitivity;  // AlwaysBlock only
  bool nonblocking = false;                  // ProceduralAssign only
  int branch = 0;  // children of an IfBlock: 0 = then, 1 = else
  std::optional<std::size_t> instance_index;  // InstanceConnection only

  bool references(std::string_view signal_name) const;
  /// Distinct signal names across reads and writes.
  std::set<std::string> signal_names() const;
};

enum class PortDirection { Input, Output, Inout };

std::string_view to_string(PortDirection dir);

struct PortDecl {
  std::string name;
  PortDirection direction = PortDirection::Input;
  std::string net_type;  // "wire", "reg", ... or empty
  bool is_signed = false;
  std::string range_text;  // "[7:0]" or empty
  std::optional<int> width;
};

struct SignalDecl {
  std::string name;
  std::string net_type;
  bool is_signed = false;
  std::string range_text;
  std::string unpacked_text;  // memory dimensions, e.g. "[0:15]"
  std::optional<int> width;
  int line = 0;
  /// Set when the declaration (or a sibling name in the same declaration)
  /// carries an initializer, making it a Declaration statement.
  std::optional<StatementId> declared_by;
};

struct Parameter {
  std::string name;
  std::string value_text;
  std::optional<long long> value;
  bool local = false;
};

struct PortBinding {
  std::string formal;  // empty for positional bindings to black boxes
  std::string actual_text;
  std::vector<SignalRef> actuals;
  bool positional = false;
  StatementId statement = 0;
};

struct Instance {
  std::string instance_name;
  std::string child_module;
  std::string parameter_text;  // "#(...)" or empty
  std::vector<PortBinding> bindings;
  SourceSpan span;
};

struct ModuleDef {
  std::string name;
  std::string file;
  SourceSpan span;
  std::string header_parameter_text;  // "#(...)" from the module header
  std::vector<Parameter> parameters;
  /// Verbatim parameter/localparam declarations from the module body.
  std::vector<std::string> parameter_declarations;
  std::vector<PortDecl> ports;
  std::vector<SignalDecl> signals;
  std::vector<StatementId> statements;  // source order
  std::vector<Instance> instances;
  std::set<std::string> constants;  // parameters, genvars, functions, tasks

  const PortDecl* find_port(std::string_view port_name) const;
  const SignalDecl* find_signal(std::string_view signal_name) const;
  bool is_port(std::string_view port_name) const { return find_port(port_name) != nullptr; }
};

struct DesignFile {
  std::string path;
  std::string source;
  std::vector<std::string> modules;
};

/// Parsed multi-file design. Immutable after parsing; statement ids index
/// `statements` directly.
struct DesignModel {
  std::vector<DesignFile> files;
  std::vector<ModuleDef> modules;
  std::vector<Statement> statements;
  std::string top_module;
  std::set<std::string> black_boxes;

  const ModuleDef* find_module(std::string_view name) const;
  const ModuleDef& module(std::string_view name) const;  // throws UnknownFile
  const ModuleDef* top() const { return find_module(top_module); }
  const Statement& statement(StatementId id) const { return statements.at(id); }
  const DesignFile* find_file(std::string_view path) const;

  /// Resolves a path or bare file name ("fsm.v") to the modules it holds.
  std::vector<std::string> modules_in_file(std::string_view path) const;

  /// Resolves a dotted instance path ("toy_top.u_fsm") to a module name.
  std::optional<std::string> resolve_hierarchy(std::string_view path) const;

  /// Parent instantiation sites of `module_name`: (parent module, instance index).
  std::vector<std::pair<std::string, std::size_t>> instantiations_of(
      std::string_view module_name) const;
};

struct SourceInput {
  std::string path;
  std::string text;
};

/// Parses source buffers. `top` may be empty, in which case no top module is
/// required (used to re-parse generated code).
DesignModel parse_sources(const std::vector<SourceInput>& sources,
                          std::string_view top = {});

/// Reads and parses the given files; `top` must name a defined module.
DesignModel parse_design(const std::vector<std::filesystem::path>& file_paths,
                         std::string_view top);

/// Every statement of `module_name` whose reads or writes mention `signal`
/// by name (bit selects ignored).
std::vector<StatementId> statements_referencing(const DesignModel& model,
                                                std::string_view module_name,
                                                const SignalRef& signal);

/// Identifier tokens of a Verilog expression, with keywords, numbers, system
/// names and called function names removed.
std::vector<std::string> scan_identifiers(std::string_view expression);

}  // namespace uvmarvel
