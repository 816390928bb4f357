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

// Rebuilds a dependency slice into standalone Verilog (the Filtered DUT).
// Statements whose whole subtree is in the slice are copied verbatim;
// anything else is re-wrapped with templates for module shells, always
// blocks, case blocks, continuous assignments and instance connections.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "uvmarvel/signal_tracker.hpp"
#include "uvmarvel/verilog_model.hpp"

namespace uvmarvel {

enum class ConstructKind { ModuleShell, AlwaysBlock, CaseBlock, ContinuousAssign, InstanceConnection };

std::string_view to_string(ConstructKind kind);
std::optional<ConstructKind> construct_kind_from_string(std::string_view text);

/// Template text with {{hole}} markers. Block templates wrap a multi-line
/// body between header and footer; inline templates splice the body into
/// one line.
struct PatchTemplate {
  ConstructKind construct_kind = ConstructKind::ModuleShell;
  std::string header_pattern;
  std::string footer_pattern;
  std::vector<std::string> required_context;
  bool inline_body = false;
  std::string origin;  // file the template came from, or "builtin"

  std::string render_header(const std::map<std::string, std::string>& holes) const;
  std::string render_footer(const std::map<std::string, std::string>& holes) const;
};

/// Parses the `.vt` template format:
///   # construct: CaseBlock
///   # required: case_keyword, case_selector
///   # layout: block|inline
///   --- header
///   ...
///   --- footer
///   ...
PatchTemplate parse_template(std::string_view text, std::string_view origin);
std::string serialize_template(const PatchTemplate& t);

class TemplateLibrary {
 public:
  /// The five default templates compiled into the library.
  static TemplateLibrary builtin();
  /// Builtin defaults overridden by every `*.vt` file in `dir`.
  static TemplateLibrary load_directory(const std::filesystem::path& dir, bool with_builtin = true);

  void set(PatchTemplate t);
  void erase(ConstructKind kind);
  bool has(ConstructKind kind) const;
  /// Throws TemplateMissing.
  const PatchTemplate& get(ConstructKind kind) const;
  std::vector<ConstructKind> kinds() const;

 private:
  std::map<ConstructKind, PatchTemplate> templates_;
};

struct ProvenanceEntry {
  int out_line = 0;  // 1-based line in the reconstructed file
  std::string file;  // original file
  int line = 0;      // original line
  /// Slice statements whose first line this is.
  std::vector<StatementId> statements;
};

struct FilteredFile {
  std::string path;  // "<module>.v"
  std::string module_name;
  std::string text;
  std::vector<ProvenanceEntry> provenance;
  /// The same text cut at construct boundaries: shell header, one chunk per
  /// top-level construct, shell footer. Used to shrink context to a budget.
  std::string header;
  std::vector<std::string> body_chunks;
  std::string footer;

  /// Header, the first `chunks` body chunks, and the footer.
  std::string truncated(std::size_t chunks) const;
};

struct FilteredDUT {
  std::vector<FilteredFile> files;
  std::set<StatementId> emitted_statements;
  std::set<StatementId> dropped_statements;
  std::vector<std::string> warnings;

  std::size_t line_count() const;
  const FilteredFile* find(std::string_view module_name) const;
  /// All files concatenated, each introduced by a `// file: <path>` line.
  std::string combined_text() const;
};

/// Template kind of the nearest construct enclosing the group. Throws
/// MixedContext when the statements come from unrelated constructs or
/// different modules, InvalidArgument for an empty group.
ConstructKind classify_fragment(const std::set<StatementId>& group, const DesignModel& model);

/// Sensitivity list for a procedural fragment: the enclosing always block's
/// own list when it has one, else "@(*)" for blocking code or an edge list
/// borrowed from the module's clocked logic for non-blocking code.
std::string reconstruct_sensitivity(const std::set<StatementId>& fragment, const DesignModel& model);

/// Throws TemplateMissing or UnparseableResult.
FilteredDUT patch(const DependencySlice& slice, const DesignModel& model,
                  const TemplateLibrary& templates = TemplateLibrary::builtin());

}  // namespace uvmarvel
