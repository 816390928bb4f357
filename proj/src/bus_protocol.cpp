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

#include "uvmarvel/bus_protocol.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "uvmarvel/error.hpp"

namespace uvmarvel {

namespace {

constexpr ComponentKind kProtocolKinds[] = {ComponentKind::Interface, ComponentKind::Driver, ComponentKind::Monitor,
                                            ComponentKind::Agent};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotReadable, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Placement {
  std::vector<std::optional<std::size_t>> forward;
  std::vector<std::optional<std::size_t>> backward;
};

Placement place(const std::vector<const Region*>& f, std::string_view out) {
  const std::size_t n = f.size();
  Placement pl;
  pl.forward.resize(n);
  pl.backward.resize(n);
  auto starts = [&](const std::string& t) { return out.substr(0, t.size()) == t; };
  auto ends = [&](const std::string& t) { return out.size() >= t.size() && out.substr(out.size() - t.size()) == t; };

  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& t = f[i]->text;
    if (i == 0) {
      if (starts(t) && (n > 1 || t.size() == out.size())) pl.forward[i] = 0;
    } else if (i == n - 1) {
      if (ends(t) && out.size() - t.size() >= pos) pl.forward[i] = out.size() - t.size();
    } else {
      auto p = out.find(t, pos);
      if (p != std::string_view::npos) pl.forward[i] = p;
    }
    if (pl.forward[i]) pos = *pl.forward[i] + t.size();
  }

  std::size_t end = out.size();
  for (std::size_t k = n; k-- > 0;) {
    const std::string& t = f[k]->text;
    if (t.size() > end) continue;
    if (k == n - 1) {
      if (ends(t)) pl.backward[k] = out.size() - t.size();
    } else if (k == 0) {
      if (starts(t)) pl.backward[k] = 0;
    } else {
      auto p = out.rfind(t, end - t.size());
      if (p != std::string_view::npos) pl.backward[k] = p;
    }
    if (pl.backward[k]) end = *pl.backward[k];
  }
  return pl;
}

}  // namespace

std::string_view to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::Interface: return "interface";
    case ComponentKind::Driver: return "driver";
    case ComponentKind::Monitor: return "monitor";
    case ComponentKind::Agent: return "agent";
    case ComponentKind::Env: return "env";
  }
  return "interface";
}

std::optional<ComponentKind> component_kind_from_string(std::string_view text) {
  for (auto k : {ComponentKind::Interface, ComponentKind::Driver, ComponentKind::Monitor, ComponentKind::Agent,
                 ComponentKind::Env}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string Skeleton::id() const {
  return (protocol ? protocol_dir_name(*protocol) : std::string("common")) + "/" + std::string(to_string(component_kind));
}

std::vector<const Region*> Skeleton::frozen() const {
  std::vector<const Region*> out;
  for (const auto& r : regions) {
    if (r.kind == RegionKind::Frozen) out.push_back(&r);
  }
  return out;
}

std::vector<const Region*> Skeleton::editable() const {
  std::vector<const Region*> out;
  for (const auto& r : regions) {
    if (r.kind == RegionKind::Editable) out.push_back(&r);
  }
  return out;
}

const Region* Skeleton::find(std::string_view region_id) const {
  for (const auto& r : regions) {
    if (r.id == region_id) return &r;
  }
  return nullptr;
}

Skeleton parse_skeleton(std::string_view text, std::optional<Protocol> protocol, ComponentKind kind,
                        std::string_view origin) {
  static const std::regex edit_re(R"(^\s*//<<EDIT\s+([A-Za-z_][A-Za-z0-9_]*)(?:\s+([^>]*?))?\s*>>\s*$)");
  static const std::regex end_re(R"(^\s*//<<END\s+([A-Za-z_][A-Za-z0-9_]*)\s*>>\s*$)");
  static const std::regex frozen_id_re(R"(F[0-9]+)");
  Skeleton sk;
  sk.protocol = protocol;
  sk.component_kind = kind;
  sk.body = std::string(text);
  sk.origin = std::string(origin);

  auto bad = [&](int line, const std::string& msg) {
    return Error(ErrorCode::LibraryInvalid, msg, ErrorLocation{std::string(origin), line});
  };
  std::string frozen;
  std::optional<Region> open;
  std::set<std::string> ids;
  int frozen_count = 0;
  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    std::size_t stop = nl == std::string_view::npos ? text.size() : nl + 1;
    std::string line(text.substr(start, stop - start));
    start = stop;
    ++line_no;
    std::string bare = line;
    while (!bare.empty() && (bare.back() == '\n' || bare.back() == '\r')) bare.pop_back();
    std::smatch m;
    if (std::regex_match(bare, m, edit_re)) {
      if (open) throw bad(line_no, "EDIT '" + m[1].str() + "' opened inside editable region '" + open->id + "'");
      std::string id = m[1].str();
      if (std::regex_match(id, frozen_id_re)) throw bad(line_no, "editable id '" + id + "' is reserved for frozen regions");
      if (!ids.insert(id).second) throw bad(line_no, "duplicate region id '" + id + "'");
      frozen += line;
      sk.regions.push_back({"F" + std::to_string(frozen_count++), RegionKind::Frozen, frozen, std::nullopt});
      frozen.clear();
      open = Region{id, RegionKind::Editable, "", std::nullopt};
      if (m[2].matched && !m[2].str().empty()) open->hint = m[2].str();
      continue;
    }
    if (std::regex_match(bare, m, end_re)) {
      if (!open) throw bad(line_no, "END '" + m[1].str() + "' without a matching EDIT");
      if (m[1].str() != open->id) throw bad(line_no, "END '" + m[1].str() + "' closes editable region '" + open->id + "'");
      sk.regions.push_back(std::move(*open));
      open.reset();
      frozen = line;
      continue;
    }
    if (bare.find("//<<") != std::string::npos) throw bad(line_no, "malformed region marker");
    (open ? open->text : frozen) += line;
  }
  if (open) throw bad(line_no, "editable region '" + open->id + "' is never closed");
  if (!frozen.empty() || sk.regions.empty()) {
    sk.regions.push_back({"F" + std::to_string(frozen_count), RegionKind::Frozen, frozen, std::nullopt});
  }
  return sk;
}

std::string assemble(const Skeleton& skeleton, const std::map<std::string, std::string>& fills) {
  std::string out;
  for (const auto& r : skeleton.regions) {
    if (r.kind == RegionKind::Editable) {
      auto it = fills.find(r.id);
      out += it == fills.end() ? r.text : it->second;
    } else {
      out += r.text;
    }
  }
  return out;
}

std::vector<std::string> verify_frozen_regions(const Skeleton& skeleton, std::string_view output) {
  auto f = skeleton.frozen();
  const std::size_t n = f.size();
  auto pl = place(f, output);
  std::vector<bool> bad(n, false);
  std::vector<std::size_t> first(n), last(n);
  for (std::size_t i = 0; i < n; ++i) {
    first[i] = output.find(f[i]->text);
    last[i] = output.rfind(f[i]->text);
    if (!pl.forward[i] || !pl.backward[i] || *pl.forward[i] > *pl.backward[i]) bad[i] = true;
  }
  // Pairwise order: i before j needs some occurrence of i ending before some
  // occurrence of j starts. Both members of an inverted pair are reported.
  for (std::size_t i = 0; i < n; ++i) {
    if (first[i] == std::string_view::npos) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (last[j] == std::string_view::npos) continue;
      if (first[i] + f[i]->text.size() > last[j]) bad[i] = bad[j] = true;
    }
  }
  std::vector<std::string> violated;
  for (std::size_t i = 0; i < n; ++i) {
    if (bad[i]) violated.push_back(f[i]->id);
  }
  return violated;
}

std::optional<std::map<std::string, std::string>> extract_fills(const Skeleton& skeleton, std::string_view output) {
  if (!verify_frozen_regions(skeleton, output).empty()) return std::nullopt;
  auto f = skeleton.frozen();
  auto pl = place(f, output);
  std::map<std::string, std::string> fills;
  std::size_t fi = 0;
  for (std::size_t r = 0; r < skeleton.regions.size(); ++r) {
    const auto& reg = skeleton.regions[r];
    if (reg.kind == RegionKind::Frozen) {
      ++fi;
      continue;
    }
    // editable regions always sit between frozen fi-1 and fi
    std::size_t from = *pl.forward[fi - 1] + f[fi - 1]->text.size();
    fills[reg.id] = std::string(output.substr(from, *pl.forward[fi] - from));
  }
  return fills;
}

SkeletonLibrary SkeletonLibrary::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::LibraryInvalid, "protocol library '" + dir.string() + "' is not a directory");
  SkeletonLibrary lib;
  lib.root_ = dir;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) entries.push_back(e.path());
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& sub : entries) {
    std::string name = sub.filename().string();
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(sub)) {
      if (e.path().extension() == ".svt") files.push_back(e.path().stem().string());
    }
    std::sort(files.begin(), files.end());
    if (name == "common") {
      for (const auto& f : files) {
        if (f != "env") throw Error(ErrorCode::LibraryInvalid, "unexpected skeleton common/" + f + ".svt");
      }
      if (!files.empty()) {
        auto p = sub / "env.svt";
        lib.env_ = parse_skeleton(read_file(p), std::nullopt, ComponentKind::Env, p.string());
      }
      continue;
    }
    auto proto = protocol_from_string(name);
    if (!proto || *proto == Protocol::Custom || protocol_dir_name(*proto) != name) {
      throw Error(ErrorCode::LibraryInvalid, "directory '" + name + "' does not name a supported protocol");
    }
    std::vector<std::string> expected = {"agent", "driver", "interface", "monitor"};
    if (files != expected) {
      std::string got;
      for (const auto& f : files) got += (got.empty() ? "" : ", ") + f;
      throw Error(ErrorCode::LibraryInvalid,
                  "protocol '" + name + "' must contain exactly interface, driver, monitor and agent skeletons (found: " +
                      got + ")");
    }
    for (auto kind : kProtocolKinds) {
      auto p = sub / (std::string(to_string(kind)) + ".svt");
      Skeleton sk = parse_skeleton(read_file(p), proto, kind, p.string());
      if (assemble(sk, {}) != sk.body) throw Error(ErrorCode::LibraryInvalid, "regions of " + p.string() + " do not tile the body");
      lib.skeletons_[*proto][kind] = std::move(sk);
    }
  }
  return lib;
}

bool SkeletonLibrary::has_protocol(Protocol p) const { return skeletons_.count(p) > 0; }

std::vector<Protocol> SkeletonLibrary::protocols() const {
  std::vector<Protocol> out;
  for (const auto& [p, _] : skeletons_) out.push_back(p);
  return out;
}

const Skeleton& SkeletonLibrary::get(Protocol p, ComponentKind kind) const {
  auto it = skeletons_.find(p);
  if (it == skeletons_.end() || !it->second.count(kind)) {
    throw Error(ErrorCode::ProtocolUnsupported,
                "protocol library '" + root_.string() + "' has no " + std::string(to_string(p)) + " skeletons");
  }
  return it->second.at(kind);
}

std::vector<SkeletonSelection> select_skeletons(const IRDocument& ir, const SkeletonLibrary& library,
                                                std::vector<IRFinding>* warnings) {
  std::vector<SkeletonSelection> out;
  for (const auto& iface : ir.interfaces) {
    if (iface.protocol == Protocol::Custom) {
      if (warnings) {
        warnings->push_back({Severity::Warning, "custom-protocol", "interfaces[" + iface.name + "]",
                             "interface '" + iface.name + "' uses a custom protocol; no skeletons selected"});
      }
      continue;
    }
    for (auto kind : kProtocolKinds) out.push_back({iface.name, &library.get(iface.protocol, kind)});
  }
  return out;
}

std::string extract_code_block(std::string_view reply) {
  auto open = reply.find("```");
  if (open == std::string_view::npos) return std::string(reply);
  auto body = reply.find('\n', open);
  if (body == std::string_view::npos) return std::string(reply);
  ++body;
  // closing fence at the start of a line
  std::size_t close = body;
  while (true) {
    close = reply.find("```", close);
    if (close == std::string_view::npos) return std::string(reply.substr(body));
    if (close == body || reply[close - 1] == '\n') break;
    close += 3;
  }
  return std::string(reply.substr(body, close - body));
}

std::string build_specialize_prompt(const Skeleton& skeleton, const IRDocument& ir, const InterfaceDesc& iface,
                                    int attempt, const std::string& feedback) {
  std::ostringstream o;
  o << "# key: specialize:" << (skeleton.protocol ? protocol_dir_name(*skeleton.protocol) : "common") << ":"
    << to_string(skeleton.component_kind) << ":" << iface.name << ":" << attempt << "\n";
  o << "Specialize the UVM " << to_string(skeleton.component_kind) << " skeleton below for interface '" << iface.name
    << "' of module '" << ir.module_name << "'.\n";
  o << "Rewrite only the text between each //<<EDIT id hint>> line and its //<<END id>> line.\n"
       "Every other line, including the marker lines, must be copied exactly.\n\n";
  o << "## Interface\n";
  o << "name: " << iface.name << "\nprotocol: " << to_string(iface.protocol) << "\nrole: " << to_string(iface.role)
    << "\n";
  for (const auto& s : iface.signals) {
    o << "signal " << s.name << " " << to_string(s.direction) << " width=" << s.width << " role=" << s.role_tag << "\n";
  }
  for (const auto& r : iface.address_ranges) {
    std::ostringstream h;
    h << std::hex << "0x" << r.base << " size 0x" << r.size;
    o << "range " << h.str() << "\n";
  }
  bool first_iface = !ir.interfaces.empty() && ir.interfaces.front().name == iface.name;
  bool any_reg = false;
  for (const auto& r : ir.registers) {
    if (r.interface_name == iface.name || (r.interface_name.empty() && first_iface)) {
      if (!any_reg) o << "\n## Registers\n";
      any_reg = true;
      std::ostringstream h;
      h << std::hex << "offset=0x" << r.offset << " reset=0x" << r.reset_value;
      o << r.name << " " << h.str() << " width=" << std::dec << r.width << " access=" << to_string(r.access) << "\n";
    }
  }
  if (!ir.timing.clocks.empty() || !ir.timing.resets.empty()) {
    o << "\n## Timing\n";
    for (const auto& c : ir.timing.clocks) o << "clock " << c.name << (c.period ? " " + *c.period : "") << "\n";
    for (const auto& r : ir.timing.resets) o << "reset " << r.name << (r.active_low ? " active-low" : " active-high") << "\n";
  }
  o << "\n## Editable regions\n";
  for (const auto* r : skeleton.editable()) o << "- " << r->id << ": " << r->hint.value_or("(no hint)") << "\n";
  o << "\n## Skeleton\n```systemverilog\n" << skeleton.body << "```\n";
  if (!feedback.empty()) o << "\n## Rejected attempts\n" << feedback;
  o << "\nReply with the complete file in a single ```systemverilog fenced block.\n";
  return o.str();
}

SpecializedComponent specialize(const Skeleton& skeleton, const IRDocument& ir, const InterfaceDesc& iface,
                                LlmClient& llm, const SpecializeOptions& options) {
  if (options.max_attempts < 1) throw Error(ErrorCode::InvalidArgument, "max_attempts must be at least 1");
  std::string feedback;
  std::vector<std::string> violated;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    std::string prompt = build_specialize_prompt(skeleton, ir, iface, attempt, feedback);
    std::string code = extract_code_block(llm.complete(prompt, options.llm));
    violated = verify_frozen_regions(skeleton, code);
    if (violated.empty()) {
      SpecializedComponent out;
      out.skeleton_id = skeleton.id();
      out.interface_name = iface.name;
      out.region_fills = *extract_fills(skeleton, code);
      out.output_text = std::move(code);
      out.attempts = attempt;
      return out;
    }
    feedback += "attempt " + std::to_string(attempt) + " changed frozen region(s):";
    for (const auto& id : violated) {
      feedback += " " + id;
    }
    feedback += ". Restore them exactly:\n";
    for (const auto& id : violated) feedback += "--- " + id + "\n" + skeleton.find(id)->text;
  }
  std::string list;
  for (const auto& id : violated) list += (list.empty() ? "" : ", ") + id;
  throw Error(ErrorCode::FrozenRegionViolation,
              skeleton.id() + " for '" + iface.name + "': frozen regions " + list + " still modified after " +
                  std::to_string(options.max_attempts) + " attempts",
              std::nullopt, violated);
}

}  // namespace uvmarvel
