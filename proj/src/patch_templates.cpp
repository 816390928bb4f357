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

#include <algorithm>
#include <array>
#include <fstream>
#include <regex>
#include <sstream>

#include "uvmarvel/error.hpp"
#include "uvmarvel/verilog_patcher.hpp"

namespace uvmarvel {

namespace {

constexpr std::array<std::pair<ConstructKind, std::string_view>, 5> kConstructNames = {{
    {ConstructKind::ModuleShell, "ModuleShell"},
    {ConstructKind::AlwaysBlock, "AlwaysBlock"},
    {ConstructKind::CaseBlock, "CaseBlock"},
    {ConstructKind::ContinuousAssign, "ContinuousAssign"},
    {ConstructKind::InstanceConnection, "InstanceConnection"},
}};

// Holes the patcher fills for each construct.
const std::set<std::string>& supplied_holes(ConstructKind kind) {
  static const std::map<ConstructKind, std::set<std::string>> kHoles = {
      {ConstructKind::ModuleShell, {"module_name", "parameter_header", "port_list"}},
      {ConstructKind::AlwaysBlock, {"sensitivity_list"}},
      {ConstructKind::CaseBlock, {"case_keyword", "case_selector", "default_item"}},
      {ConstructKind::ContinuousAssign, {}},
      {ConstructKind::InstanceConnection, {"child_module", "parameter_override", "instance_name"}},
  };
  return kHoles.at(kind);
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::set<std::string> holes_in(const std::string& pattern) {
  static const std::regex hole(R"(\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\})");
  std::set<std::string> out;
  for (std::sregex_iterator it(pattern.begin(), pattern.end(), hole), end; it != end; ++it) {
    out.insert((*it)[1].str());
  }
  return out;
}

std::string fill(const std::string& pattern, const std::map<std::string, std::string>& holes) {
  static const std::regex hole(R"(\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\})");
  std::string out;
  auto begin = pattern.cbegin();
  for (std::sregex_iterator it(pattern.begin(), pattern.end(), hole), end; it != end; ++it) {
    out.append(begin, pattern.cbegin() + it->position());
    auto value = holes.find((*it)[1].str());
    if (value == holes.end()) {
      throw Error(ErrorCode::InvalidArgument, "no value for template hole '" + (*it)[1].str() + "'");
    }
    out += value->second;
    begin = pattern.cbegin() + it->position() + it->length();
  }
  out.append(begin, pattern.cend());
  return out;
}

constexpr std::string_view kBuiltin[] = {
    "# construct: ModuleShell\n# required: module_name, parameter_header, port_list\n"
    "# layout: block\n--- header\nmodule {{module_name}}{{parameter_header}} (\n{{port_list}}\n);\n"
    "--- footer\nendmodule\n",
    "# construct: AlwaysBlock\n# required: sensitivity_list\n# layout: block\n"
    "--- header\nalways {{sensitivity_list}} begin\n--- footer\nend\n",
    "# construct: CaseBlock\n# required: case_keyword, case_selector, default_item\n"
    "# layout: block\n--- header\n{{case_keyword}} ({{case_selector}})\n"
    "--- footer\n{{default_item}}endcase\n",
    "# construct: ContinuousAssign\n# required:\n# layout: inline\n--- header\nassign\n"
    "--- footer\n;\n",
    "# construct: InstanceConnection\n# required: child_module, parameter_override, instance_name\n"
    "# layout: block\n--- header\n{{child_module}} {{parameter_override}}{{instance_name}} (\n"
    "--- footer\n);\n",
};

}  // namespace

std::string_view to_string(ConstructKind kind) {
  for (const auto& [k, name] : kConstructNames) {
    if (k == kind) return name;
  }
  return "ModuleShell";
}

std::optional<ConstructKind> construct_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kConstructNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string PatchTemplate::render_header(const std::map<std::string, std::string>& holes) const {
  return fill(header_pattern, holes);
}

std::string PatchTemplate::render_footer(const std::map<std::string, std::string>& holes) const {
  return fill(footer_pattern, holes);
}

PatchTemplate parse_template(std::string_view text, std::string_view origin) {
  PatchTemplate t;
  t.origin = std::string(origin);
  std::optional<ConstructKind> kind;
  bool saw_header = false, saw_footer = false;
  std::vector<std::string> header_lines, footer_lines;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto bad = [&](const std::string& msg) {
    return Error(ErrorCode::InvalidArgument, msg, ErrorLocation{std::string(origin), line_no});
  };
  std::vector<std::string>* target = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "--- header") {
      target = &header_lines;
      saw_header = true;
      continue;
    }
    if (line == "--- footer") {
      target = &footer_lines;
      saw_footer = true;
      continue;
    }
    if (target) {
      target->push_back(line);
      continue;
    }
    if (trim(line).empty()) continue;
    if (line.rfind('#', 0) != 0) throw bad("expected '# key: value' or a section marker");
    std::string body = trim(std::string_view(line).substr(1));
    auto colon = body.find(':');
    if (colon == std::string::npos) throw bad("expected '# key: value'");
    std::string key = trim(std::string_view(body).substr(0, colon));
    std::string value = trim(std::string_view(body).substr(colon + 1));
    if (key == "construct") {
      kind = construct_kind_from_string(value);
      if (!kind) throw bad("unknown construct kind '" + value + "'");
    } else if (key == "required") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) t.required_context.push_back(item);
      }
    } else if (key == "layout") {
      if (value != "block" && value != "inline") throw bad("layout must be 'block' or 'inline'");
      t.inline_body = value == "inline";
    } else {
      throw bad("unknown template key '" + key + "'");
    }
  }
  if (!kind) throw Error(ErrorCode::InvalidArgument, "template has no '# construct:' line",
                         ErrorLocation{std::string(origin), 0});
  if (!saw_header || !saw_footer) {
    throw Error(ErrorCode::InvalidArgument, "template needs '--- header' and '--- footer' sections",
                ErrorLocation{std::string(origin), 0});
  }
  auto join = [](std::vector<std::string> lines) {
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "\n" : "") + lines[i];
    return out;
  };
  t.construct_kind = *kind;
  t.header_pattern = join(header_lines);
  t.footer_pattern = join(footer_lines);

  std::set<std::string> used = holes_in(t.header_pattern);
  auto footer_holes = holes_in(t.footer_pattern);
  used.insert(footer_holes.begin(), footer_holes.end());
  const auto& supplied = supplied_holes(*kind);
  for (const auto& h : used) {
    if (!supplied.count(h)) {
      throw Error(ErrorCode::InvalidArgument,
                  "hole '" + h + "' is not available for " + std::string(to_string(*kind)) + " templates",
                  ErrorLocation{std::string(origin), 0});
    }
    if (std::find(t.required_context.begin(), t.required_context.end(), h) == t.required_context.end()) {
      throw Error(ErrorCode::InvalidArgument, "hole '" + h + "' is used but not listed in '# required:'",
                  ErrorLocation{std::string(origin), 0});
    }
  }
  return t;
}

std::string serialize_template(const PatchTemplate& t) {
  std::string out = "# construct: " + std::string(to_string(t.construct_kind)) + "\n# required:";
  for (std::size_t i = 0; i < t.required_context.size(); ++i) {
    out += (i ? ", " : " ") + t.required_context[i];
  }
  out += "\n# layout: ";
  out += t.inline_body ? "inline" : "block";
  out += "\n--- header\n" + t.header_pattern + "\n--- footer\n" + t.footer_pattern + "\n";
  return out;
}

TemplateLibrary TemplateLibrary::builtin() {
  TemplateLibrary lib;
  for (auto text : kBuiltin) lib.set(parse_template(text, "builtin"));
  return lib;
}

TemplateLibrary TemplateLibrary::load_directory(const std::filesystem::path& dir, bool with_builtin) {
  TemplateLibrary lib = with_builtin ? builtin() : TemplateLibrary{};
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::FileNotReadable, "template directory '" + dir.string() + "' not found");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".vt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotReadable, "cannot read '" + f.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    lib.set(parse_template(ss.str(), f.string()));
  }
  return lib;
}

void TemplateLibrary::set(PatchTemplate t) { templates_[t.construct_kind] = std::move(t); }

void TemplateLibrary::erase(ConstructKind kind) { templates_.erase(kind); }

bool TemplateLibrary::has(ConstructKind kind) const { return templates_.count(kind) > 0; }

const PatchTemplate& TemplateLibrary::get(ConstructKind kind) const {
  auto it = templates_.find(kind);
  if (it == templates_.end()) {
    throw Error(ErrorCode::TemplateMissing,
                "no patch template for construct '" + std::string(to_string(kind)) + "'",
                std::nullopt, {std::string(to_string(kind))});
  }
  return it->second;
}

std::vector<ConstructKind> TemplateLibrary::kinds() const {
  std::vector<ConstructKind> out;
  for (const auto& [k, _] : templates_) out.push_back(k);
  return out;
}

}  // namespace uvmarvel
