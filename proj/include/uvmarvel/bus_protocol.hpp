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

// Protocol skeleton library. A skeleton is UVM source text in which
// `//<<EDIT id hint>>` ... `//<<END id>>` comment lines delimit editable
// regions; everything else, marker lines included, is frozen and must come
// back from specialization byte-for-byte.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uvmarvel/ir_model.hpp"
#include "uvmarvel/llm_client.hpp"

namespace uvmarvel {

enum class ComponentKind { Interface, Driver, Monitor, Agent, Env };
std::string_view to_string(ComponentKind k);  // lowercase file stem
std::optional<ComponentKind> component_kind_from_string(std::string_view text);

enum class RegionKind { Frozen, Editable };

struct Region {
  std::string id;  // "F0", "F1", ... for frozen regions
  RegionKind kind = RegionKind::Frozen;
  std::string text;
  std::optional<std::string> hint;
};

struct Skeleton {
  std::optional<Protocol> protocol;  // empty for the shared env skeleton
  ComponentKind component_kind = ComponentKind::Interface;
  std::string body;
  std::vector<Region> regions;  // tiles body exactly
  std::string origin;

  std::string id() const;  // "apb/driver", "common/env"
  std::vector<const Region*> frozen() const;
  std::vector<const Region*> editable() const;
  const Region* find(std::string_view region_id) const;
};

/// Splits marker-annotated text into regions. Throws LibraryInvalid on
/// unbalanced, nested or duplicate markers.
Skeleton parse_skeleton(std::string_view text, std::optional<Protocol> protocol, ComponentKind kind,
                        std::string_view origin = "<skeleton>");

/// Body with every editable region replaced by its fill (missing fills keep
/// the default text).
std::string assemble(const Skeleton& skeleton, const std::map<std::string, std::string>& fills);

/// Ids of frozen regions that cannot be placed verbatim, in order and without
/// overlap. A region fails when it is missing, when no occurrence fits after
/// the earliest placement of its predecessors and before the latest placement
/// of its successors, or when it is out of order with another region (both
/// are reported). The first region must open the output and the last must
/// close it. Empty means the output is acceptable.
std::vector<std::string> verify_frozen_regions(const Skeleton& skeleton, std::string_view output);

/// Editable fills recovered from an output accepted by verify_frozen_regions.
std::optional<std::map<std::string, std::string>> extract_fills(const Skeleton& skeleton, std::string_view output);

class SkeletonLibrary {
 public:
  /// Loads `<dir>/<protocol>/{interface,driver,monitor,agent}.svt` and the
  /// optional `<dir>/common/env.svt`. Throws LibraryInvalid when a protocol
  /// directory is incomplete, has extra skeletons or a skeleton is malformed.
  static SkeletonLibrary load(const std::filesystem::path& dir);

  bool has_protocol(Protocol p) const;
  std::vector<Protocol> protocols() const;
  /// Throws ProtocolUnsupported.
  const Skeleton& get(Protocol p, ComponentKind kind) const;
  const Skeleton* env() const { return env_ ? &*env_ : nullptr; }
  std::filesystem::path root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::map<Protocol, std::map<ComponentKind, Skeleton>> skeletons_;
  std::optional<Skeleton> env_;
};

struct SkeletonSelection {
  std::string interface_name;
  const Skeleton* skeleton = nullptr;
};

/// Four skeletons per non-Custom interface, in interface order. Custom
/// interfaces add a warning to `warnings`. Throws ProtocolUnsupported.
std::vector<SkeletonSelection> select_skeletons(const IRDocument& ir, const SkeletonLibrary& library,
                                                std::vector<IRFinding>* warnings = nullptr);

struct SpecializeOptions {
  int max_attempts = 3;
  LlmParams llm;
};

struct SpecializedComponent {
  std::string skeleton_id;
  std::string interface_name;
  std::string output_text;
  std::map<std::string, std::string> region_fills;
  int attempts = 0;
};

/// Prompt for one attempt; `feedback` lists earlier violations.
std::string build_specialize_prompt(const Skeleton& skeleton, const IRDocument& ir, const InterfaceDesc& iface,
                                    int attempt, const std::string& feedback);

/// The code inside the first fenced block of a reply, or the whole reply.
std::string extract_code_block(std::string_view reply);

/// Asks the client for the full specialized file until its frozen regions
/// verify. Throws FrozenRegionViolation (violated ids in details()) after
/// `max_attempts`, or LlmUnavailable.
SpecializedComponent specialize(const Skeleton& skeleton, const IRDocument& ir, const InterfaceDesc& iface,
                                LlmClient& llm, const SpecializeOptions& options = {});

}  // namespace uvmarvel
