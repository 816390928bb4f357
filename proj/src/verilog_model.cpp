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

#include "uvmarvel/verilog_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "uvmarvel/error.hpp"
#include "verilog_lexer.hpp"

namespace uvmarvel {

namespace {

constexpr std::array<std::pair<StatementKind, std::string_view>, 8> kKindNames = {{
    {StatementKind::ContinuousAssign, "ContinuousAssign"},
    {StatementKind::ProceduralAssign, "ProceduralAssign"},
    {StatementKind::AlwaysBlock, "AlwaysBlock"},
    {StatementKind::IfBlock, "IfBlock"},
    {StatementKind::CaseBlock, "CaseBlock"},
    {StatementKind::CaseBranch, "CaseBranch"},
    {StatementKind::InstanceConnection, "InstanceConnection"},
    {StatementKind::Declaration, "Declaration"},
}};

std::string_view basename_of(std::string_view path) {
  auto slash = path.find_last_of("/\\");
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

}  // namespace

bool is_legal_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (name.front() == '\\') {
    return name.size() > 1 && std::none_of(name.begin(), name.end(), [](char c) {
             return std::isspace(static_cast<unsigned char>(c));
           });
  }
  auto head = static_cast<unsigned char>(name.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  bool ok = std::all_of(name.begin(), name.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_' || u == '$';
  });
  return ok && !detail::is_verilog_keyword(name);
}

std::string_view to_string(StatementKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Declaration";
}

std::optional<StatementKind> statement_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(PortDirection dir) {
  switch (dir) {
    case PortDirection::Input: return "input";
    case PortDirection::Output: return "output";
    case PortDirection::Inout: return "inout";
  }
  return "input";
}

bool Statement::references(std::string_view signal_name) const {
  auto match = [&](const SignalRef& r) { return r.signal_name == signal_name; };
  return std::any_of(reads.begin(), reads.end(), match) ||
         std::any_of(writes.begin(), writes.end(), match);
}

std::set<std::string> Statement::signal_names() const {
  std::set<std::string> out;
  for (const auto& r : reads) out.insert(r.signal_name);
  for (const auto& w : writes) out.insert(w.signal_name);
  return out;
}

const PortDecl* ModuleDef::find_port(std::string_view port_name) const {
  for (const auto& p : ports) {
    if (p.name == port_name) return &p;
  }
  return nullptr;
}

const SignalDecl* ModuleDef::find_signal(std::string_view signal_name) const {
  for (const auto& s : signals) {
    if (s.name == signal_name) return &s;
  }
  return nullptr;
}

const ModuleDef* DesignModel::find_module(std::string_view name) const {
  for (const auto& m : modules) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const ModuleDef& DesignModel::module(std::string_view name) const {
  if (const ModuleDef* m = find_module(name)) return *m;
  throw Error(ErrorCode::UnknownFile, "module '" + std::string(name) + "' is not part of the design");
}

const DesignFile* DesignModel::find_file(std::string_view path) const {
  for (const auto& f : files) {
    if (f.path == path) return &f;
  }
  const DesignFile* hit = nullptr;
  for (const auto& f : files) {
    if (basename_of(f.path) == basename_of(path)) {
      if (hit) return nullptr;  // ambiguous
      hit = &f;
    }
  }
  return hit;
}

std::vector<std::string> DesignModel::modules_in_file(std::string_view path) const {
  if (const DesignFile* f = find_file(path)) return f->modules;
  return {};
}

std::optional<std::string> DesignModel::resolve_hierarchy(std::string_view path) const {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto dot = path.find('.', start);
    if (dot == std::string_view::npos) dot = path.size();
    parts.emplace_back(path.substr(start, dot - start));
    start = dot + 1;
  }
  if (parts.empty() || parts.front().empty()) return std::nullopt;
  const ModuleDef* current = find_module(parts.front());
  std::size_t i = 1;
  if (!current) {
    // path may omit the top module name
    current = top();
    i = 0;
  }
  for (; current && i < parts.size(); ++i) {
    const ModuleDef* next = nullptr;
    for (const auto& inst : current->instances) {
      std::string_view name = parts[i];
      auto bracket = name.find('[');
      if (bracket != std::string_view::npos) name = name.substr(0, bracket);
      if (inst.instance_name == name) next = find_module(inst.child_module);
    }
    current = next;
  }
  if (!current) return std::nullopt;
  return current->name;
}

std::vector<std::pair<std::string, std::size_t>> DesignModel::instantiations_of(
    std::string_view module_name) const {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& m : modules) {
    for (std::size_t i = 0; i < m.instances.size(); ++i) {
      if (m.instances[i].child_module == module_name) out.emplace_back(m.name, i);
    }
  }
  return out;
}

std::vector<StatementId> statements_referencing(const DesignModel& model,
                                                std::string_view module_name,
                                                const SignalRef& signal) {
  const ModuleDef& mod = model.module(module_name);
  std::vector<StatementId> out;
  for (StatementId id : mod.statements) {
    if (model.statement(id).references(signal.signal_name)) out.push_back(id);
  }
  return out;
}

}  // namespace uvmarvel
