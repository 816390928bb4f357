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

#include "uvmarvel/verilog_patcher.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "uvmarvel/error.hpp"

namespace uvmarvel {

namespace {

struct OutLine {
  std::string text;
  std::string file;
  int line = 0;
  std::vector<StatementId> ids;
};

using Lines = std::vector<OutLine>;

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string indent_of(int depth) { return std::string(static_cast<std::size_t>(depth) * 2, ' '); }

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<StatementId> ancestors_inclusive(const DesignModel& m, StatementId id) {
  std::vector<StatementId> chain;
  std::optional<StatementId> cur = id;
  while (cur) {
    chain.push_back(*cur);
    cur = m.statement(*cur).parent_id;
  }
  return chain;
}

std::string edge_list_text(const Statement& always) {
  std::string out = "@(";
  bool first = true;
  for (const auto& item : always.sensitivity) {
    if (item.edge == Edge::None) continue;
    out += first ? "" : " or ";
    out += item.edge == Edge::Posedge ? "posedge " : "negedge ";
    out += item.signal;
    first = false;
  }
  return out + ")";
}

class ModuleRenderer {
 public:
  ModuleRenderer(const DesignModel& model, const ModuleDef& mod, const std::set<StatementId>& emit,
                 const std::set<StatementId>& slice_ids, const TemplateLibrary& lib)
      : model_(model), mod_(mod), emit_(emit), slice_(slice_ids), lib_(lib) {
    for (StatementId id : mod.statements) {
      if (!emit_.count(id)) continue;
      for (StatementId a : ancestors_inclusive(model, id)) relevant_.insert(a);
    }
  }

  bool touched() const { return !relevant_.empty(); }

  void render_body() {
    std::set<std::size_t> done_instances;
    for (StatementId id : mod_.statements) {
      const Statement& s = model_.statement(id);
      if (s.parent_id || !relevant_.count(id)) continue;
      Lines chunk;
      if (s.kind == StatementKind::InstanceConnection && s.instance_index) {
        if (!done_instances.insert(*s.instance_index).second) continue;
        render_instance(*s.instance_index, chunk);
      } else {
        render(id, 1, chunk);
      }
      chunks_.push_back(std::move(chunk));
    }
  }

  // Ports a parent binds on this module's instances.
  std::map<std::string, std::set<std::string>> child_ports;
  std::set<std::string> used_names;
  std::set<StatementId> emitted;
  std::vector<Lines> chunks_;

 private:
  void add_names(const Statement& s, bool subtree) {
    for (const auto& n : s.reads) used_names.insert(n.signal_name);
    if (subtree) {
      for (const auto& n : s.writes) used_names.insert(n.signal_name);
      for (StatementId c : s.children) add_names(model_.statement(c), true);
    }
  }

  bool whole(StatementId id) const {
    if (!emit_.count(id)) return false;
    for (StatementId c : model_.statement(id).children) {
      if (!whole(c)) return false;
    }
    return true;
  }

  void collect_subtree(StatementId id, std::vector<StatementId>& out) const {
    out.push_back(id);
    for (StatementId c : model_.statement(id).children) collect_subtree(c, out);
  }

  void push(Lines& out, const std::string& text, int line, std::vector<StatementId> ids = {}) {
    for (StatementId i : ids) emitted.insert(i);
    out.push_back({text, mod_.file, line, std::move(ids)});
  }

  std::vector<StatementId> slice_id(StatementId id) const {
    if (slice_.count(id)) return {id};
    return {};
  }

  // Multi-line text whose first line is at `first_line` of the original.
  // Leading whitespace before the statement's first token in the source.
  std::size_t column_of(const SourceSpan& span) const {
    const DesignFile* f = model_.find_file(span.file);
    if (!f) return 0;
    std::size_t start = f->source.rfind('\n', span.offset_begin == 0 ? 0 : span.offset_begin - 1);
    start = start == std::string::npos ? 0 : start + 1;
    return span.offset_begin - start;
  }

  void push_text(Lines& out, const std::string& text, int depth, int first_line,
                 const std::vector<StatementId>& subtree, std::size_t column = 0) {
    auto lines = split_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      // shift continuation lines by the same amount as the first one
      std::size_t ws = lines[i].find_first_not_of(" \t");
      if (ws == std::string::npos) {
        lines[i].clear();
      } else {
        lines[i] = indent_of(depth) + lines[i].substr(std::min(ws, column));
      }
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      int origin = first_line + static_cast<int>(i);
      std::vector<StatementId> ids;
      for (StatementId s : subtree) {
        if (slice_.count(s) && model_.statement(s).span.line_start == origin) ids.push_back(s);
      }
      push(out, (i == 0 ? indent_of(depth) : std::string()) + lines[i], origin, std::move(ids));
    }
  }

  void verbatim(const Statement& s, int depth, Lines& out) {
    std::vector<StatementId> subtree;
    collect_subtree(s.id, subtree);
    add_names(s, true);
    if (s.kind == StatementKind::ContinuousAssign) {
      const PatchTemplate& t = lib_.get(ConstructKind::ContinuousAssign);
      std::string body = s.raw_text;
      if (body.rfind("assign", 0) == 0) body = body.substr(6);
      if (!body.empty() && body.back() == ';') body.pop_back();
      std::string text = t.render_header({}) + " " + trim(body) + t.render_footer({});
      push_text(out, text, depth, s.span.line_start, subtree, column_of(s.span));
      return;
    }
    push_text(out, s.raw_text, depth, s.span.line_start, subtree, column_of(s.span));
  }

  void render_block(const PatchTemplate& t, const std::map<std::string, std::string>& holes,
                    const Statement& s, int depth, Lines& out,
                    const std::function<void(Lines&)>& body) {
    auto header = split_lines(t.render_header(holes));
    for (std::size_t i = 0; i < header.size(); ++i) {
      push(out, indent_of(depth) + header[i], s.span.line_start, i == 0 ? slice_id(s.id) : std::vector<StatementId>{});
    }
    body(out);
    for (const auto& f : split_lines(t.render_footer(holes))) {
      push(out, indent_of(depth) + f, s.span.line_end);
    }
  }

  void render_children(const Statement& s, int depth, Lines& out, std::optional<int> branch = {}) {
    for (StatementId c : s.children) {
      const Statement& child = model_.statement(c);
      if (!relevant_.count(c)) continue;
      if (branch && child.branch != *branch) continue;
      render(c, depth, out);
    }
  }

  void render(StatementId id, int depth, Lines& out) {
    const Statement& s = model_.statement(id);
    if (whole(id)) return verbatim(s, depth, out);
    add_names(s, false);
    switch (s.kind) {
      case StatementKind::AlwaysBlock: {
        std::string sens = s.header;
        if (sens.empty()) {
          std::set<StatementId> frag;
          for (StatementId c : s.children) {
            if (relevant_.count(c)) frag.insert(c);
          }
          if (frag.empty()) frag.insert(id);
          sens = reconstruct_sensitivity(frag, model_);
          for (const auto& n : scan_identifiers(sens)) used_names.insert(n);
        }
        render_block(lib_.get(ConstructKind::AlwaysBlock), {{"sensitivity_list", sens}}, s, depth, out,
                     [&](Lines& o) { render_children(s, depth + 1, o); });
        return;
      }
      case StatementKind::CaseBlock: {
        auto open = s.header.find('(');
        auto close = s.header.rfind(')');
        std::string keyword = trim(s.header.substr(0, open));
        std::string selector = s.header.substr(open + 1, close - open - 1);
        bool has_default = false;
        for (StatementId c : s.children) {
          if (relevant_.count(c) && model_.statement(c).header == "default") has_default = true;
        }
        std::map<std::string, std::string> holes = {
            {"case_keyword", keyword},
            {"case_selector", selector},
            {"default_item", has_default ? "" : indent_of(1) + "default: ;\n"}};
        render_block(lib_.get(ConstructKind::CaseBlock), holes, s, depth, out,
                     [&](Lines& o) { render_children(s, depth + 1, o); });
        return;
      }
      case StatementKind::IfBlock: {
        push(out, indent_of(depth) + s.header + " begin", s.span.line_start, slice_id(id));
        render_children(s, depth + 1, out, 0);
        bool has_else = false;
        int else_line = s.span.line_end;
        for (StatementId c : s.children) {
          const Statement& child = model_.statement(c);
          if (child.branch == 1 && relevant_.count(c)) {
            if (!has_else) else_line = child.span.line_start;
            has_else = true;
          }
        }
        if (has_else) {
          push(out, indent_of(depth) + "end else begin", else_line);
          render_children(s, depth + 1, out, 1);
        }
        push(out, indent_of(depth) + "end", s.span.line_end);
        return;
      }
      case StatementKind::CaseBranch: {
        push(out, indent_of(depth) + s.header + ": begin", s.span.line_start, slice_id(id));
        render_children(s, depth + 1, out);
        push(out, indent_of(depth) + "end", s.span.line_end);
        return;
      }
      default:
        // leaves reach here only when they are scaffolding, which cannot happen
        return verbatim(s, depth, out);
    }
  }

  void render_instance(std::size_t index, Lines& out) {
    const Instance& inst = mod_.instances[index];
    std::vector<const PortBinding*> bindings;
    for (const auto& b : inst.bindings) {
      if (emit_.count(b.statement)) bindings.push_back(&b);
    }
    const PatchTemplate& t = lib_.get(ConstructKind::InstanceConnection);
    std::map<std::string, std::string> holes = {
        {"child_module", inst.child_module},
        {"parameter_override", inst.parameter_text.empty() ? "" : inst.parameter_text + " "},
        {"instance_name", inst.instance_name}};
    int first_line = bindings.empty() ? inst.span.line_start : model_.statement(bindings[0]->statement).span.line_start;
    for (const auto& h : split_lines(t.render_header(holes))) push(out, indent_of(1) + h, inst.span.line_start);
    (void)first_line;
    for (std::size_t i = 0; i < bindings.size(); ++i) {
      const PortBinding& b = *bindings[i];
      const Statement& s = model_.statement(b.statement);
      std::string text = b.formal.empty() ? b.actual_text : "." + b.formal + "(" + b.actual_text + ")";
      if (i + 1 < bindings.size()) text += ",";
      push(out, indent_of(2) + text, s.span.line_start, slice_id(b.statement));
      for (const auto& a : b.actuals) used_names.insert(a.signal_name);
      if (!b.formal.empty()) child_ports[inst.child_module].insert(b.formal);
    }
    for (const auto& f : split_lines(t.render_footer(holes))) push(out, indent_of(1) + f, inst.span.line_end);
  }

  const DesignModel& model_;
  const ModuleDef& mod_;
  const std::set<StatementId>& emit_;
  const std::set<StatementId>& slice_;
  const TemplateLibrary& lib_;
  std::set<StatementId> relevant_;
};

std::string port_decl_prefix(const PortDecl& p) {
  std::string out(to_string(p.direction));
  if (!p.net_type.empty()) out += " " + p.net_type;
  if (p.is_signed) out += " signed";
  if (!p.range_text.empty()) out += " " + p.range_text;
  return out;
}

std::string signal_decl_prefix(const std::string& net_type, bool is_signed, const std::string& range) {
  std::string out = net_type.empty() ? "wire" : net_type;
  if (is_signed) out += " signed";
  if (!range.empty()) out += " " + range;
  return out;
}

FilteredFile assemble(const ModuleDef& mod, const TemplateLibrary& lib, const std::set<std::string>& ports,
                      const std::set<StatementId>& emit, const std::set<std::string>& used,
                      std::vector<Lines>& chunks, std::vector<std::string>& warnings) {
  Lines header;
  auto push = [&](Lines& out, std::string text, int line) { out.push_back({std::move(text), mod.file, line, {}}); };

  // ports, grouped while consecutive ones share a declaration prefix
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  for (const auto& p : mod.ports) {
    if (!ports.count(p.name)) continue;
    std::string prefix = port_decl_prefix(p);
    if (groups.empty() || groups.back().first != prefix) groups.push_back({prefix, {}});
    groups.back().second.push_back(p.name);
  }
  std::string port_list;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    port_list += (i ? "\n" : "") + indent_of(1) + groups[i].first + " ";
    for (std::size_t j = 0; j < groups[i].second.size(); ++j) {
      port_list += (j ? ", " : "") + groups[i].second[j];
    }
    if (i + 1 < groups.size()) port_list += ",";
  }
  const PatchTemplate& shell = lib.get(ConstructKind::ModuleShell);
  std::map<std::string, std::string> holes = {
      {"module_name", mod.name},
      {"parameter_header", mod.header_parameter_text.empty() ? "" : " " + mod.header_parameter_text},
      {"port_list", port_list}};
  for (const auto& l : split_lines(shell.render_header(holes))) {
    if (!trim(l).empty()) push(header, l, mod.span.line_start);
  }
  for (const auto& decl : mod.parameter_declarations) {
    auto lines = split_lines(decl);
    for (std::size_t i = 0; i < lines.size(); ++i) push(header, (i ? "" : indent_of(1)) + lines[i], mod.span.line_start);
  }

  // synthesized declarations, grouped by type and range in original order
  struct Group {
    int line;
    std::string prefix;
    std::vector<std::string> names;
  };
  std::vector<Group> decls;
  auto add = [&](int line, const std::string& prefix, const std::string& name) {
    for (auto& g : decls) {
      if (g.prefix == prefix) {
        g.names.push_back(name);
        return;
      }
    }
    decls.push_back({line, prefix, {name}});
  };
  std::vector<std::string> ordered(used.begin(), used.end());
  std::vector<std::string> undeclared;
  for (const auto& sig : mod.signals) {
    if (!used.count(sig.name) || mod.is_port(sig.name) || mod.constants.count(sig.name)) continue;
    if (sig.declared_by && emit.count(*sig.declared_by)) continue;
    std::string prefix = signal_decl_prefix(sig.net_type, sig.is_signed, sig.range_text);
    if (!sig.unpacked_text.empty()) {
      decls.push_back({sig.line, prefix, {sig.name + " " + sig.unpacked_text}});
    } else {
      add(sig.line, prefix, sig.name);
    }
  }
  for (const auto& name : ordered) {
    if (mod.is_port(name) || mod.find_signal(name) || mod.constants.count(name)) continue;
    warnings.push_back("signal '" + name + "' in module '" + mod.name +
                       "' has no declaration; emitted as a 1-bit wire");
    add(mod.span.line_start, "wire", name);
  }
  for (const auto& g : decls) {
    std::string text = indent_of(1) + g.prefix + " ";
    for (std::size_t i = 0; i < g.names.size(); ++i) text += (i ? ", " : "") + g.names[i];
    push(header, text + ";", g.line);
  }

  Lines footer;
  for (const auto& l : split_lines(shell.render_footer(holes))) push(footer, l, mod.span.line_end);

  FilteredFile file;
  file.module_name = mod.name;
  file.path = mod.name + ".v";
  int out_line = 0;
  auto emit_lines = [&](const Lines& lines) {
    std::string block;
    for (const auto& l : lines) {
      block += l.text + "\n";
      file.provenance.push_back({++out_line, l.file, l.line, l.ids});
    }
    return block;
  };
  file.header = emit_lines(header);
  for (const auto& c : chunks) file.body_chunks.push_back(emit_lines(c));
  file.footer = emit_lines(footer);
  file.text = file.truncated(file.body_chunks.size());
  return file;
}

}  // namespace

std::string FilteredFile::truncated(std::size_t chunks) const {
  std::string out = header;
  for (std::size_t i = 0; i < std::min(chunks, body_chunks.size()); ++i) out += body_chunks[i];
  return out + footer;
}

std::size_t FilteredDUT::line_count() const {
  std::size_t n = 0;
  for (const auto& f : files) n += f.provenance.size();
  return n;
}

const FilteredFile* FilteredDUT::find(std::string_view module_name) const {
  for (const auto& f : files) {
    if (f.module_name == module_name) return &f;
  }
  return nullptr;
}

std::string FilteredDUT::combined_text() const {
  std::string out;
  for (const auto& f : files) out += "// file: " + f.path + "\n" + f.text;
  return out;
}

ConstructKind classify_fragment(const std::set<StatementId>& group, const DesignModel& model) {
  if (group.empty()) throw Error(ErrorCode::InvalidArgument, "cannot classify an empty fragment");
  std::set<std::string> modules;
  for (StatementId id : group) {
    if (id >= model.statements.size()) {
      throw Error(ErrorCode::InvalidArgument, "statement " + std::to_string(id) + " is not in the model");
    }
    modules.insert(model.statement(id).module_name);
  }
  if (modules.size() > 1) throw Error(ErrorCode::MixedContext, "fragment spans several modules");

  // common ancestor of the statements' parents
  std::optional<std::vector<StatementId>> common;
  bool any_root = false;
  for (StatementId id : group) {
    const Statement& s = model.statement(id);
    if (!s.parent_id) {
      any_root = true;
      continue;
    }
    auto chain = ancestors_inclusive(model, *s.parent_id);
    std::reverse(chain.begin(), chain.end());  // root first
    if (!common) {
      common = chain;
    } else {
      std::size_t k = 0;
      while (k < common->size() && k < chain.size() && (*common)[k] == chain[k]) ++k;
      common->resize(k);
    }
  }

  if (common && !common->empty() && !any_root) {
    for (auto it = common->rbegin(); it != common->rend(); ++it) {
      const Statement& a = model.statement(*it);
      if (a.kind == StatementKind::AlwaysBlock) return ConstructKind::AlwaysBlock;
      if (a.kind == StatementKind::CaseBlock || a.kind == StatementKind::CaseBranch) return ConstructKind::CaseBlock;
    }
    return ConstructKind::AlwaysBlock;
  }
  if (common) {
    // nested statements from different top-level constructs, or mixed with
    // top-level ones
    throw Error(ErrorCode::MixedContext, "fragment statements come from unrelated constructs");
  }
  // every statement sits at module level
  bool all_assign = true, all_binding = true;
  std::set<std::size_t> instances;
  for (StatementId id : group) {
    const Statement& s = model.statement(id);
    all_assign = all_assign && s.kind == StatementKind::ContinuousAssign;
    all_binding = all_binding && s.kind == StatementKind::InstanceConnection;
    if (s.instance_index) instances.insert(*s.instance_index);
  }
  if (all_assign) return ConstructKind::ContinuousAssign;
  if (all_binding && instances.size() == 1) return ConstructKind::InstanceConnection;
  return ConstructKind::ModuleShell;
}

std::string reconstruct_sensitivity(const std::set<StatementId>& fragment, const DesignModel& model) {
  bool nonblocking = false;
  std::string module_name;
  for (StatementId id : fragment) {
    for (StatementId a : ancestors_inclusive(model, id)) {
      const Statement& s = model.statement(a);
      if (s.kind == StatementKind::AlwaysBlock && !s.header.empty()) return s.header;
    }
    std::vector<StatementId> stack{id};
    while (!stack.empty()) {
      const Statement& s = model.statement(stack.back());
      stack.pop_back();
      nonblocking = nonblocking || (s.kind == StatementKind::ProceduralAssign && s.nonblocking);
      stack.insert(stack.end(), s.children.begin(), s.children.end());
    }
    module_name = model.statement(id).module_name;
  }
  if (!nonblocking || module_name.empty()) return "@(*)";
  for (StatementId id : model.module(module_name).statements) {
    const Statement& s = model.statement(id);
    if (s.kind != StatementKind::AlwaysBlock) continue;
    bool clocked = std::any_of(s.sensitivity.begin(), s.sensitivity.end(),
                               [](const SensitivityItem& i) { return i.edge != Edge::None; });
    if (clocked) return edge_list_text(s);
  }
  return "@(posedge clk)";
}

FilteredDUT patch(const DependencySlice& slice, const DesignModel& model, const TemplateLibrary& templates) {
  for (auto kind : {ConstructKind::ModuleShell, ConstructKind::AlwaysBlock, ConstructKind::CaseBlock,
                    ConstructKind::ContinuousAssign, ConstructKind::InstanceConnection}) {
    templates.get(kind);
  }
  std::set<StatementId> slice_ids = slice.all_statements();
  std::set<StatementId> emit = slice_ids;
  emit.insert(slice.support_statements.begin(), slice.support_statements.end());
  for (StatementId id : emit) {
    if (id >= model.statements.size()) {
      throw Error(ErrorCode::InvalidArgument, "slice statement " + std::to_string(id) + " is not in the design");
    }
  }
  for (const auto& [mod, ids] : slice.statements_by_file) {
    for (StatementId id : ids) {
      if (model.statement(id).module_name != mod) {
        throw Error(ErrorCode::InvalidArgument,
                    "slice statement " + std::to_string(id) + " does not belong to module '" + mod + "'");
      }
    }
  }

  FilteredDUT dut;
  std::vector<ModuleRenderer> renderers;
  renderers.reserve(model.modules.size());
  std::map<std::string, std::set<std::string>> bound_ports;
  for (const auto& mod : model.modules) {
    renderers.emplace_back(model, mod, emit, slice_ids, templates);
    renderers.back().render_body();
    for (const auto& [child, ports] : renderers.back().child_ports) {
      bound_ports[child].insert(ports.begin(), ports.end());
    }
  }

  std::vector<SourceInput> reparse;
  bool top_emitted = false;
  for (std::size_t i = 0; i < model.modules.size(); ++i) {
    const ModuleDef& mod = model.modules[i];
    ModuleRenderer& r = renderers[i];
    if (!r.touched() && !bound_ports.count(mod.name)) continue;
    std::set<std::string> ports;
    for (const auto& p : mod.ports) {
      if (r.used_names.count(p.name)) ports.insert(p.name);
    }
    if (bound_ports.count(mod.name)) ports.insert(bound_ports[mod.name].begin(), bound_ports[mod.name].end());
    if (mod.name == model.top_module) {
      ports.insert(slice.entry_ports.begin(), slice.entry_ports.end());
      top_emitted = true;
    }
    dut.files.push_back(assemble(mod, templates, ports, emit, r.used_names, r.chunks_, dut.warnings));
    dut.emitted_statements.insert(r.emitted.begin(), r.emitted.end());
    reparse.push_back({dut.files.back().path, dut.files.back().text});
  }
  for (StatementId id : slice_ids) {
    if (!dut.emitted_statements.count(id)) dut.dropped_statements.insert(id);
  }

  try {
    parse_sources(reparse, top_emitted ? std::string_view(model.top_module) : std::string_view());
  } catch (const Error& e) {
    throw Error(ErrorCode::UnparseableResult, std::string("reconstructed code does not parse: ") + e.what());
  }
  return dut;
}

}  // namespace uvmarvel
