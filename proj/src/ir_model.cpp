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

#include "uvmarvel/ir_model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "uvmarvel/error.hpp"

namespace uvmarvel {

namespace {

constexpr std::array<std::string_view, 5> kSections = {"MODULE", "INTERFACES", "REGISTERS", "TIMING", "FUNCTIONAL"};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::optional<std::uint64_t> parse_uint(std::string_view text) {
  std::string t;
  for (char c : text) {
    if (c != '_') t += c;
  }
  int base = 10;
  std::string_view digits = t;
  if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
    base = 16;
    digits.remove_prefix(2);
  } else if (t.size() > 2 && t[0] == '0' && (t[1] == 'b' || t[1] == 'B')) {
    base = 2;
    digits.remove_prefix(2);
  }
  if (digits.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
  if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
  return v;
}

std::string hex(std::uint64_t v) {
  std::ostringstream o;
  o << "0x" << std::hex << v;
  return o.str();
}

// Byte span of a register, at least one byte.
std::uint64_t register_bytes(int width) { return width <= 8 ? 1 : static_cast<std::uint64_t>((width + 7) / 8); }

class IRParser {
 public:
  void close_all() {
    close_interface();
    close_register();
  }

  IRParser(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  IRDocument run() {
    std::istringstream in{std::string(text_)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      std::string line = trim(raw);
      if (line.empty() || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        open_section(trim(std::string_view(line).substr(1, line.size() - 2)));
        continue;
      }
      if (section_.empty()) fail("", "content before the first section header");
      handle(line);
    }
    std::vector<std::string> missing;
    for (auto s : kSections) {
      if (!seen_.count(std::string(s))) missing.emplace_back(s);
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw Error(ErrorCode::MissingSection, "missing section(s): " + list, ErrorLocation{std::string(source_), 0},
                  missing);
    }
    close_all();
    if (doc_.module_name.empty()) fail_at("MODULE", module_line_, "[MODULE] requires 'name: <identifier>'");
    return std::move(doc_);
  }

 private:
  [[noreturn]] void fail(const std::string& section, const std::string& msg) { fail_at(section, line_, msg); }
  [[noreturn]] void fail_at(const std::string& section, int line, const std::string& msg) {
    std::string where = section.empty() ? msg : "[" + section + "] " + msg;
    throw Error(ErrorCode::FieldError, where, ErrorLocation{std::string(source_), line},
                {section, std::to_string(line)});
  }

  void open_section(const std::string& name) {
    std::string upper = name;
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (std::find(kSections.begin(), kSections.end(), upper) == kSections.end()) {
      fail(upper, "unknown section '" + name + "'");
    }
    if (!seen_.insert(upper).second) {
      throw Error(ErrorCode::DuplicateSection, "section [" + upper + "] appears more than once",
                  ErrorLocation{std::string(source_), line_}, {upper});
    }
    close_all();
    section_ = upper;
    if (upper == "MODULE") module_line_ = line_;
  }

  int int_field(const std::string& v, const std::string& what) {
    auto n = parse_uint(v);
    if (!n || *n > 1u << 20) fail(section_, "bad " + what + " '" + v + "'");
    return static_cast<int>(*n);
  }

  std::uint64_t uint_field(const std::string& v, const std::string& what) {
    auto n = parse_uint(v);
    if (!n) fail(section_, "bad " + what + " '" + v + "'");
    return *n;
  }

  void need_record(bool have, const std::string& key, const char* starter) {
    if (!have) fail(section_, "'" + key + "' before any '" + starter + ":' line");
  }

  void handle(const std::string& line) {
    auto words = split_ws(line);
    if (section_ == "INTERFACES" && words.size() >= 1 && words[0] == "signal") {
      need_record(!doc_.interfaces.empty(), "signal", "interface");
      if (words.size() != 5) fail(section_, "expected 'signal <name> <in|out|inout> <width> <role-tag>'");
      IRSignal s;
      s.name = words[1];
      std::string d = lower(words[2]);
      if (d == "in" || d == "input") {
        s.direction = PortDirection::Input;
      } else if (d == "out" || d == "output") {
        s.direction = PortDirection::Output;
      } else if (d == "inout") {
        s.direction = PortDirection::Inout;
      } else {
        fail(section_, "bad direction '" + words[2] + "'");
      }
      s.width = int_field(words[3], "width");
      s.role_tag = words[4];
      doc_.interfaces.back().signals.push_back(std::move(s));
      return;
    }
    auto colon = line.find(':');
    std::string key = colon == std::string::npos ? "" : trim(std::string_view(line).substr(0, colon));
    bool key_ok = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
    if (!key_ok) fail(section_, "expected 'key: value', got '" + line + "'");
    std::string value = trim(std::string_view(line).substr(colon + 1));
    std::string k = lower(key);

    if (section_ == "MODULE") {
      if (k == "name") {
        if (!doc_.module_name.empty()) fail(section_, "duplicate 'name'");
        if (value.empty()) fail(section_, "empty module name");
        doc_.module_name = value;
      } else {
        doc_.module_annotations.push_back({key, value});
      }
    } else if (section_ == "INTERFACES") {
      if (k == "interface") {
        if (value.empty()) fail(section_, "empty interface name");
        close_interface();
        InterfaceDesc d;
        d.name = value;
        doc_.interfaces.push_back(std::move(d));
        iface_line_ = line_;
        iface_protocol_ = iface_role_ = false;
        return;
      }
      need_record(!doc_.interfaces.empty(), key, "interface");
      auto& d = doc_.interfaces.back();
      if (k == "protocol") {
        auto p = protocol_from_string(value);
        if (!p) fail(section_, "unknown protocol '" + value + "'");
        d.protocol = *p;
        iface_protocol_ = true;
      } else if (k == "role") {
        auto r = interface_role_from_string(value);
        if (!r) fail(section_, "unknown role '" + value + "' (manager or subordinate)");
        d.role = *r;
        iface_role_ = true;
      } else if (k == "range") {
        auto w = split_ws(value);
        if (w.size() != 2) fail(section_, "expected 'range: <base> <size>'");
        d.address_ranges.push_back({uint_field(w[0], "range base"), uint_field(w[1], "range size")});
      } else {
        d.annotations.push_back({key, value});
      }
    } else if (section_ == "REGISTERS") {
      close_interface();
      if (k == "register") {
        if (value.empty()) fail(section_, "empty register name");
        close_register();
        RegisterDesc r;
        r.name = value;
        doc_.registers.push_back(std::move(r));
        reg_line_ = line_;
        reg_offset_ = false;
        return;
      }
      need_record(!doc_.registers.empty(), key, "register");
      auto& r = doc_.registers.back();
      if (k == "offset") {
        r.offset = uint_field(value, "offset");
        reg_offset_ = true;
      } else if (k == "width") {
        r.width = int_field(value, "width");
      } else if (k == "reset") {
        r.reset_value = uint_field(value, "reset value");
      } else if (k == "access") {
        auto a = access_type_from_string(value);
        if (!a) fail(section_, "unknown access type '" + value + "'");
        r.access = *a;
      } else if (k == "interface") {
        r.interface_name = value;
      } else {
        r.annotations.push_back({key, value});
      }
    } else if (section_ == "TIMING") {
      close_interface();
      close_register();
      auto w = split_ws(value);
      if (k == "clock") {
        if (w.empty()) fail(section_, "expected 'clock: <name> [period]'");
        ClockDesc c{w[0], std::nullopt};
        std::string rest = trim(std::string_view(value).substr(value.find(w[0]) + w[0].size()));
        if (!rest.empty()) c.period = rest;
        doc_.timing.clocks.push_back(std::move(c));
      } else if (k == "reset") {
        if (w.size() != 2) fail(section_, "expected 'reset: <name> <low|high>'");
        std::string lvl = lower(w[1]);
        if (lvl != "low" && lvl != "high") fail(section_, "reset level must be low or high");
        doc_.timing.resets.push_back({w[0], lvl == "low"});
      } else if (k == "constraint") {
        doc_.timing.constraints.push_back(value);
      } else {
        doc_.timing.annotations.push_back({key, value});
      }
    } else if (section_ == "FUNCTIONAL") {
      close_interface();
      close_register();
      if (k == "point") {
        if (value.empty()) fail(section_, "empty functional point id");
        FunctionalPoint p;
        p.id = value;
        doc_.functional_points.push_back(std::move(p));
        return;
      }
      need_record(!doc_.functional_points.empty(), key, "point");
      auto& p = doc_.functional_points.back();
      if (k == "description") {
        p.description = value;
      } else if (k == "tags") {
        std::istringstream tags(value);
        std::string t;
        while (std::getline(tags, t, ',')) {
          t = trim(t);
          if (!t.empty()) p.tags.push_back(t);
        }
      } else {
        p.annotations.push_back({key, value});
      }
    }
  }

  void close_interface() {
    if (doc_.interfaces.empty() || iface_line_ == 0) return;
    if (!iface_protocol_) fail_at("INTERFACES", iface_line_, "interface '" + doc_.interfaces.back().name + "' has no protocol");
    if (!iface_role_) fail_at("INTERFACES", iface_line_, "interface '" + doc_.interfaces.back().name + "' has no role");
    iface_line_ = 0;
  }

  void close_register() {
    if (doc_.registers.empty() || reg_line_ == 0) return;
    if (!reg_offset_) fail_at("REGISTERS", reg_line_, "register '" + doc_.registers.back().name + "' has no offset");
    reg_line_ = 0;
  }

  std::string_view text_;
  std::string_view source_;
  IRDocument doc_;
  std::set<std::string> seen_;
  std::string section_;
  int line_ = 0;
  int module_line_ = 0;
  int iface_line_ = 0;
  bool iface_protocol_ = false;
  bool iface_role_ = false;
  int reg_line_ = 0;
  bool reg_offset_ = false;

};

}  // namespace

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::APB: return "APB";
    case Protocol::AHB: return "AHB";
    case Protocol::AXI: return "AXI";
    case Protocol::PChannel: return "PChannel";
    case Protocol::QChannel: return "QChannel";
    case Protocol::Custom: return "Custom";
  }
  return "Custom";
}

std::string_view to_string(InterfaceRole r) { return r == InterfaceRole::Manager ? "manager" : "subordinate"; }

std::string_view to_string(AccessType a) {
  switch (a) {
    case AccessType::RW: return "RW";
    case AccessType::RO: return "RO";
    case AccessType::WO: return "WO";
    case AccessType::W1C: return "W1C";
    case AccessType::LOCKED: return "LOCKED";
  }
  return "RW";
}

std::optional<Protocol> protocol_from_string(std::string_view text) {
  std::string t;
  for (char c : text) {
    if (c != '-' && c != '_' && c != ' ') t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  static const std::map<std::string, Protocol> table = {
      {"apb", Protocol::APB},           {"ahb", Protocol::AHB},           {"axi", Protocol::AXI},
      {"pchannel", Protocol::PChannel}, {"qchannel", Protocol::QChannel}, {"custom", Protocol::Custom}};
  auto it = table.find(t);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::optional<InterfaceRole> interface_role_from_string(std::string_view text) {
  std::string t = lower(text);
  if (t == "manager") return InterfaceRole::Manager;
  if (t == "subordinate") return InterfaceRole::Subordinate;
  return std::nullopt;
}

std::optional<AccessType> access_type_from_string(std::string_view text) {
  std::string t = lower(text);
  for (auto a : {AccessType::RW, AccessType::RO, AccessType::WO, AccessType::W1C, AccessType::LOCKED}) {
    if (lower(to_string(a)) == t) return a;
  }
  return std::nullopt;
}

std::string protocol_dir_name(Protocol p) { return lower(to_string(p)); }

const IRSignal* InterfaceDesc::find_signal(std::string_view signal_name) const {
  for (const auto& s : signals) {
    if (s.name == signal_name) return &s;
  }
  return nullptr;
}

const InterfaceDesc* IRDocument::find_interface(std::string_view name) const {
  for (const auto& i : interfaces) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

IRDocument parse_ir_text(std::string_view text, std::string_view source_name) {
  return IRParser(text, source_name).run();
}

IRDocument parse_ir(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotReadable, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ir_text(ss.str(), path.string());
}

std::string serialize_ir(const IRDocument& doc) {
  std::ostringstream o;
  auto annotations = [&](const std::vector<Annotation>& as) {
    for (const auto& a : as) o << a.key << ": " << a.value << "\n";
  };
  o << "[MODULE]\nname: " << doc.module_name << "\n";
  annotations(doc.module_annotations);
  o << "\n[INTERFACES]\n";
  for (std::size_t i = 0; i < doc.interfaces.size(); ++i) {
    const auto& d = doc.interfaces[i];
    if (i) o << "\n";
    o << "interface: " << d.name << "\nprotocol: " << to_string(d.protocol) << "\nrole: " << to_string(d.role) << "\n";
    for (const auto& s : d.signals) {
      const char* dir = s.direction == PortDirection::Input ? "in" : s.direction == PortDirection::Output ? "out" : "inout";
      o << "signal " << s.name << " " << dir << " " << s.width << " " << s.role_tag << "\n";
    }
    for (const auto& r : d.address_ranges) o << "range: " << hex(r.base) << " " << hex(r.size) << "\n";
    annotations(d.annotations);
  }
  o << "\n[REGISTERS]\n";
  for (std::size_t i = 0; i < doc.registers.size(); ++i) {
    const auto& r = doc.registers[i];
    if (i) o << "\n";
    o << "register: " << r.name << "\noffset: " << hex(r.offset) << "\nwidth: " << r.width
      << "\nreset: " << hex(r.reset_value) << "\naccess: " << to_string(r.access) << "\n";
    if (!r.interface_name.empty()) o << "interface: " << r.interface_name << "\n";
    annotations(r.annotations);
  }
  o << "\n[TIMING]\n";
  for (const auto& c : doc.timing.clocks) o << "clock: " << c.name << (c.period ? " " + *c.period : "") << "\n";
  for (const auto& r : doc.timing.resets) o << "reset: " << r.name << (r.active_low ? " low" : " high") << "\n";
  for (const auto& c : doc.timing.constraints) o << "constraint: " << c << "\n";
  annotations(doc.timing.annotations);
  o << "\n[FUNCTIONAL]\n";
  for (std::size_t i = 0; i < doc.functional_points.size(); ++i) {
    const auto& p = doc.functional_points[i];
    if (i) o << "\n";
    o << "point: " << p.id << "\n";
    if (!p.description.empty()) o << "description: " << p.description << "\n";
    if (!p.tags.empty()) {
      o << "tags: ";
      for (std::size_t t = 0; t < p.tags.size(); ++t) o << (t ? ", " : "") << p.tags[t];
      o << "\n";
    }
    annotations(p.annotations);
  }
  return o.str();
}

std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

std::vector<IRFinding> validate_ir(const IRDocument& doc, const DesignModel* model) {
  std::vector<IRFinding> out;
  auto error = [&](std::string code, std::string where, std::string msg) {
    out.push_back({Severity::Error, std::move(code), std::move(where), std::move(msg)});
  };
  auto warn = [&](std::string code, std::string where, std::string msg) {
    out.push_back({Severity::Warning, std::move(code), std::move(where), std::move(msg)});
  };

  if (doc.module_name.empty() || !is_legal_identifier(doc.module_name)) {
    error("module-name", "module", "module name '" + doc.module_name + "' is not a legal identifier");
  }

  std::set<std::string> iface_names;
  bool needs_clock = false;
  for (const auto& d : doc.interfaces) {
    std::string where = "interfaces[" + d.name + "]";
    if (d.name.empty()) error("interface-name", where, "interface has an empty name");
    if (!iface_names.insert(d.name).second) error("duplicate-interface", where, "interface '" + d.name + "' declared twice");
    if (d.protocol != Protocol::Custom) needs_clock = true;
    if (d.protocol == Protocol::Custom) warn("custom-protocol", where, "no skeletons exist for Custom interfaces");
    std::set<std::string> sig_names;
    for (const auto& s : d.signals) {
      std::string sw = where + ".signals[" + s.name + "]";
      if (s.width < 1) error("signal-width", sw, "signal '" + s.name + "' has width " + std::to_string(s.width) + " (must be >= 1)");
      if (!sig_names.insert(s.name).second) error("duplicate-signal", sw, "signal '" + s.name + "' listed twice");
      if (!is_legal_identifier(s.name)) error("signal-name", sw, "'" + s.name + "' is not a legal identifier");
    }
    for (std::size_t a = 0; a < d.address_ranges.size(); ++a) {
      const auto& ra = d.address_ranges[a];
      std::string rw = where + ".ranges[" + std::to_string(a) + "]";
      if (ra.size == 0) error("range-size", rw, "address range at " + hex(ra.base) + " has size 0");
      if (ra.base + ra.size < ra.base) error("range-overflow", rw, "address range at " + hex(ra.base) + " wraps around");
      for (std::size_t b = 0; b < a; ++b) {
        const auto& rb = d.address_ranges[b];
        if (ra.base < rb.base + rb.size && rb.base < ra.base + ra.size) {
          error("range-overlap", rw,
                "address range [" + hex(ra.base) + ", +" + hex(ra.size) + ") overlaps [" + hex(rb.base) + ", +" +
                    hex(rb.size) + ") in interface '" + d.name + "'");
        }
      }
    }
  }

  // registers, per address map
  std::map<std::string, std::vector<const RegisterDesc*>> maps;
  std::set<std::string> reg_names;
  for (const auto& r : doc.registers) {
    std::string where = "registers[" + r.name + "]";
    if (!reg_names.insert(r.name).second) error("duplicate-register", where, "register '" + r.name + "' declared twice");
    if (r.width < 1 || r.width > 64) {
      error("register-width", where, "register '" + r.name + "' width " + std::to_string(r.width) + " outside 1..64");
    } else if (r.width < 64 && (r.reset_value >> r.width) != 0) {
      error("reset-width", where,
            "reset value " + hex(r.reset_value) + " of '" + r.name + "' does not fit " + std::to_string(r.width) + " bits");
    }
    std::string map = r.interface_name;
    if (map.empty() && !doc.interfaces.empty()) map = doc.interfaces.front().name;
    if (!r.interface_name.empty() && !doc.find_interface(r.interface_name)) {
      error("register-interface", where, "register '" + r.name + "' names unknown interface '" + r.interface_name + "'");
    }
    if (const auto* d = doc.find_interface(map); d && !d->address_ranges.empty()) {
      bool inside = std::any_of(d->address_ranges.begin(), d->address_ranges.end(), [&](const AddressRange& a) {
        return r.offset >= a.base && r.offset - a.base < a.size;
      });
      if (!inside) warn("register-outside-range", where, "offset " + hex(r.offset) + " lies outside every range of '" + map + "'");
    }
    maps[map].push_back(&r);
  }
  for (const auto& [map, regs] : maps) {
    for (std::size_t a = 0; a < regs.size(); ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        const auto& ra = *regs[a];
        const auto& rb = *regs[b];
        auto ea = ra.offset + register_bytes(ra.width);
        auto eb = rb.offset + register_bytes(rb.width);
        if (ra.offset < eb && rb.offset < ea) {
          error("register-overlap", "registers[" + ra.name + "]",
                "register '" + ra.name + "' at " + hex(ra.offset) + " overlaps '" + rb.name + "' at " + hex(rb.offset));
        }
      }
    }
  }

  if (needs_clock && doc.timing.clocks.empty()) {
    error("missing-clock", "timing", "protocol interfaces are declared but no clock is listed");
  }
  std::set<std::string> clock_names;
  for (const auto& c : doc.timing.clocks) {
    if (!clock_names.insert(c.name).second) error("duplicate-clock", "timing.clocks[" + c.name + "]", "clock listed twice");
  }

  std::set<std::string> fp_ids;
  for (const auto& p : doc.functional_points) {
    std::string where = "functional[" + p.id + "]";
    if (p.id.empty()) error("point-id", where, "functional point with empty id");
    if (!fp_ids.insert(p.id).second) error("duplicate-point", where, "functional point id '" + p.id + "' is not unique");
    if (p.description.empty()) warn("point-description", where, "functional point '" + p.id + "' has no description");
  }

  if (model) {
    const ModuleDef* mod = model->find_module(doc.module_name);
    if (!mod) {
      mod = model->top();
      if (mod) {
        warn("module-mismatch", "module",
             "design has no module '" + doc.module_name + "'; checking ports of top '" + mod->name + "'");
      }
    }
    if (!mod) {
      error("no-top", "module", "design has no top module to check against");
      return out;
    }
    for (const auto& d : doc.interfaces) {
      for (const auto& s : d.signals) {
        std::string where = "interfaces[" + d.name + "].signals[" + s.name + "]";
        const PortDecl* p = mod->find_port(s.name);
        if (!p) {
          error("missing-port", where, "IR signal '" + s.name + "' is not a port of module '" + mod->name + "'");
          continue;
        }
        if (p->direction != s.direction) {
          error("direction-mismatch", where,
                "IR signal '" + s.name + "' is " + std::string(to_string(s.direction)) + " but design port is " +
                    std::string(to_string(p->direction)));
        }
        if (p->width && *p->width != s.width) {
          error("width-mismatch", where,
                "IR signal '" + s.name + "' declares width " + std::to_string(s.width) + " but design port '" +
                    p->name + "' has width " + std::to_string(*p->width));
        }
      }
    }
    for (const auto& c : doc.timing.clocks) {
      if (!mod->is_port(c.name)) warn("clock-not-port", "timing.clocks[" + c.name + "]", "clock '" + c.name + "' is not a port");
    }
    for (const auto& r : doc.timing.resets) {
      if (!mod->is_port(r.name)) warn("reset-not-port", "timing.resets[" + r.name + "]", "reset '" + r.name + "' is not a port");
    }
  }
  return out;
}

}  // namespace uvmarvel
