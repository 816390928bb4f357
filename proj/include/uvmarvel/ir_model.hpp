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

// Verification-oriented intermediate representation: module name, interface
// descriptions, register map, timing assumptions and functional points.
// Text format: docs/ir-format.md.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uvmarvel/verilog_model.hpp"

namespace uvmarvel {

enum class Protocol { APB, AHB, AXI, PChannel, QChannel, Custom };
enum class InterfaceRole { Manager, Subordinate };
enum class AccessType { RW, RO, WO, W1C, LOCKED };

std::string_view to_string(Protocol p);
std::string_view to_string(InterfaceRole r);
std::string_view to_string(AccessType a);
/// Case-insensitive; accepts "P-Channel" style spellings.
std::optional<Protocol> protocol_from_string(std::string_view text);
std::optional<InterfaceRole> interface_role_from_string(std::string_view text);
std::optional<AccessType> access_type_from_string(std::string_view text);
/// Directory name of a protocol inside a skeleton library ("apb", "pchannel").
std::string protocol_dir_name(Protocol p);

/// Unrecognized `key: value` line, kept verbatim.
struct Annotation {
  std::string key;
  std::string value;
  bool operator==(const Annotation&) const = default;
};

struct IRSignal {
  std::string name;
  PortDirection direction = PortDirection::Input;  // as seen from the DUT
  int width = 1;
  std::string role_tag;
  bool operator==(const IRSignal&) const = default;
};

struct AddressRange {
  std::uint64_t base = 0;
  std::uint64_t size = 0;
  bool operator==(const AddressRange&) const = default;
};

struct InterfaceDesc {
  std::string name;
  Protocol protocol = Protocol::Custom;
  InterfaceRole role = InterfaceRole::Subordinate;
  std::vector<IRSignal> signals;
  std::vector<AddressRange> address_ranges;
  std::vector<Annotation> annotations;

  const IRSignal* find_signal(std::string_view signal_name) const;
  bool operator==(const InterfaceDesc&) const = default;
};

struct RegisterDesc {
  std::string name;
  std::uint64_t offset = 0;
  int width = 32;
  std::uint64_t reset_value = 0;
  AccessType access = AccessType::RW;
  /// Address map the register lives in; empty means the first interface.
  std::string interface_name;
  std::vector<Annotation> annotations;
  bool operator==(const RegisterDesc&) const = default;
};

struct ClockDesc {
  std::string name;
  std::optional<std::string> period;
  bool operator==(const ClockDesc&) const = default;
};

struct ResetDesc {
  std::string name;
  bool active_low = true;
  bool operator==(const ResetDesc&) const = default;
};

struct TimingDesc {
  std::vector<ClockDesc> clocks;
  std::vector<ResetDesc> resets;
  std::vector<std::string> constraints;
  std::vector<Annotation> annotations;
  bool operator==(const TimingDesc&) const = default;
};

struct FunctionalPoint {
  std::string id;
  std::string description;
  std::vector<std::string> tags;
  std::vector<Annotation> annotations;
  bool operator==(const FunctionalPoint&) const = default;
};

struct IRDocument {
  std::string module_name;
  std::vector<Annotation> module_annotations;
  std::vector<InterfaceDesc> interfaces;
  std::vector<RegisterDesc> registers;
  TimingDesc timing;
  std::vector<FunctionalPoint> functional_points;

  const InterfaceDesc* find_interface(std::string_view name) const;
  bool operator==(const IRDocument&) const = default;
};

/// Throws MissingSection, DuplicateSection or FieldError (with the section
/// name in details()).
IRDocument parse_ir_text(std::string_view text, std::string_view source_name = "<ir>");
/// Also throws FileNotReadable.
IRDocument parse_ir(const std::filesystem::path& path);
std::string serialize_ir(const IRDocument& doc);

enum class Severity { Error, Warning };
std::string_view to_string(Severity s);

struct IRFinding {
  Severity severity = Severity::Error;
  std::string code;   // stable short tag, e.g. "width-mismatch"
  std::string where;  // "interfaces[apb0].signals[psel]"
  std::string message;
};

/// Checks the document's invariants and, with a design, that every interface
/// signal is a top-level port of matching direction and width.
std::vector<IRFinding> validate_ir(const IRDocument& doc, const DesignModel* model = nullptr);

inline bool has_errors(const std::vector<IRFinding>& findings) {
  for (const auto& f : findings) {
    if (f.severity == Severity::Error) return true;
  }
  return false;
}

}  // namespace uvmarvel
