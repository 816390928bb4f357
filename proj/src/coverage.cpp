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

#include "uvmarvel/coverage.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "uvmarvel/error.hpp"
#include "uvmarvel/json_io.hpp"

namespace uvmarvel {

namespace {

constexpr std::array<std::pair<CoverageCategory, std::string_view>, 5> kCategories = {{
    {CoverageCategory::Line, "LINE"},
    {CoverageCategory::Branch, "BRANCH"},
    {CoverageCategory::Condition, "CONDITION"},
    {CoverageCategory::Toggle, "TOGGLE"},
    {CoverageCategory::Functional, "FUNCTIONAL"},
}};

constexpr std::array<std::pair<CoverageStatus, std::string_view>, 3> kStatuses = {{
    {CoverageStatus::Covered, "COVERED"},
    {CoverageStatus::Uncovered, "UNCOVERED"},
    {CoverageStatus::Partial, "PARTIAL"},
}};

constexpr std::string_view kMagic = "# uvmarvel-coverage v1";

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string escape_field(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::optional<std::string> unescape_field(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i >= s.size()) return std::nullopt;
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case '-': out += '-'; break;
      default: return std::nullopt;
    }
  }
  return out;
}

// Optional field: "-" stands for empty, "\-" for a literal dash.
std::string optional_field(const std::optional<std::string>& v) {
  if (!v) return "-";
  if (*v == "-") return "\\-";
  return escape_field(*v);
}

std::optional<SourceLocation> parse_location(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  std::string num(text.substr(colon + 1));
  if (num.empty() || !std::all_of(num.begin(), num.end(), ::isdigit) || num.size() > 9) return std::nullopt;
  SourceLocation loc{std::string(text.substr(0, colon)), std::stoi(num)};
  if (loc.line < 1) return std::nullopt;
  return loc;
}

// Builds an item from the five or six raw (already unescaped) fields.
std::optional<CoverageItem> make_item(const std::vector<std::string>& f, std::string& why) {
  if (f.size() < 5 || f.size() > 6) {
    why = "expected 5 or 6 fields, found " + std::to_string(f.size());
    return std::nullopt;
  }
  CoverageItem item;
  auto cat = coverage_category_from_string(upper(trim(f[0])));
  if (!cat) {
    why = "unknown category '" + f[0] + "'";
    return std::nullopt;
  }
  auto st = coverage_status_from_string(upper(trim(f[1])));
  if (!st) {
    why = "unknown status '" + f[1] + "'";
    return std::nullopt;
  }
  if (*cat == CoverageCategory::Line && *st == CoverageStatus::Partial) {
    why = "a line item cannot be partially covered";
    return std::nullopt;
  }
  item.category = *cat;
  item.status = *st;
  item.hierarchical_name = trim(f[2]);
  if (item.hierarchical_name.empty() || item.hierarchical_name == "-") {
    why = "missing hierarchical name";
    return std::nullopt;
  }
  auto loc = parse_location(trim(f[3]));
  if (!loc) {
    why = "malformed source location '" + f[3] + "'";
    return std::nullopt;
  }
  item.source = *loc;
  if (f[4] != "-" && !f[4].empty()) item.expression = f[4];
  if (f.size() == 6 && f[5] != "-" && !f[5].empty()) item.detail = f[5];
  return item;
}

CoverageReport parse_normalized(std::string_view text, std::string_view source_name) {
  CoverageReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      std::string body = trim(std::string_view(line).substr(1));
      if (body.rfind("run_label:", 0) == 0) report.run_label = trim(std::string_view(body).substr(10));
      continue;
    }
    std::vector<std::string> fields;
    std::string why;
    bool escape_ok = true;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      std::string_view raw = std::string_view(line).substr(start, tab == std::string::npos ? std::string::npos : tab - start);
      std::optional<std::string> field;
      if (raw == "-") {
        field = "-";
      } else if (raw == "\\-") {
        field = std::string("\x01");  // literal dash marker, restored below
      } else {
        field = unescape_field(raw);
      }
      if (!field) {
        escape_ok = false;
        why = "bad escape sequence";
        break;
      }
      fields.push_back(*field);
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    std::optional<CoverageItem> item;
    if (escape_ok) item = make_item(fields, why);
    if (item) {
      if (item->expression == "\x01") item->expression = "-";
      if (item->detail == "\x01") item->detail = "-";
      report.items.push_back(std::move(*item));
    } else {
      ++report.malformed_items;
      report.warnings.push_back(std::string(source_name) + ":" + std::to_string(line_no) +
                                ": skipped malformed item: " + why);
    }
  }
  return report;
}

std::string decode_entities(std::string_view s) {
  static const std::map<std::string, std::string> named = {
      {"lt", "<"}, {"gt", ">"}, {"amp", "&"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}, {"#39", "'"}};
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += s[i];
      continue;
    }
    std::string name(s.substr(i + 1, semi - i - 1));
    if (auto it = named.find(name); it != named.end()) {
      out += it->second;
    } else if (name.size() > 1 && name[0] == '#') {
      try {
        long code = name[1] == 'x' || name[1] == 'X' ? std::stol(name.substr(2), nullptr, 16) : std::stol(name.substr(1));
        if (code > 0 && code < 128) {
          out += static_cast<char>(code);
        } else {
          out += '?';
        }
      } catch (const std::exception&) {
        out += std::string(s.substr(i, semi - i + 1));
      }
    } else {
      out += std::string(s.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

std::string strip_tags(const std::string& s) {
  static const std::regex tag("<[^>]*>");
  return std::regex_replace(s, tag, "");
}

CoverageReport parse_html(std::string_view text, std::string_view source_name) {
  CoverageReport report;
  std::string doc(text);
  static const std::regex title(R"(<title[^>]*>([\s\S]*?)</title>)", std::regex::icase);
  std::smatch m;
  if (std::regex_search(doc, m, title)) report.run_label = trim(decode_entities(strip_tags(m[1].str())));

  static const std::regex table(R"(<table[^>]*class\s*=\s*["'][^"']*\bcovtable\b[^"']*["'][^>]*>([\s\S]*?)</table>)",
                                std::regex::icase);
  static const std::regex row(R"(<tr[^>]*>([\s\S]*?)</tr>)", std::regex::icase);
  static const std::regex cell(R"(<t([dh])[^>]*>([\s\S]*?)</t[dh]>)", std::regex::icase);
  bool any_table = false;
  for (std::sregex_iterator t(doc.begin(), doc.end(), table), end; t != end; ++t) {
    any_table = true;
    std::string body = (*t)[1].str();
    for (std::sregex_iterator r(body.begin(), body.end(), row); r != end; ++r) {
      std::string cells_text = (*r)[1].str();
      std::vector<std::string> fields;
      bool header = false;
      for (std::sregex_iterator c(cells_text.begin(), cells_text.end(), cell); c != end; ++c) {
        header = header || (*c)[1].str() == "h" || (*c)[1].str() == "H";
        fields.push_back(trim(decode_entities(strip_tags((*c)[2].str()))));
      }
      if (header || fields.empty()) continue;
      std::string why;
      auto item = make_item(fields, why);
      if (item) {
        report.items.push_back(std::move(*item));
      } else {
        ++report.malformed_items;
        report.warnings.push_back(std::string(source_name) + ": skipped malformed table row: " + why);
      }
    }
  }
  if (!any_table) {
    throw Error(ErrorCode::UnrecognizedFormat, "HTML report has no <table class=\"covtable\">",
                ErrorLocation{std::string(source_name), 0});
  }
  return report;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool status_rank_higher(CoverageStatus a, CoverageStatus b) {
  auto rank = [](CoverageStatus s) {
    switch (s) {
      case CoverageStatus::Uncovered: return 0;
      case CoverageStatus::Partial: return 1;
      case CoverageStatus::Covered: return 2;
    }
    return 0;
  };
  return rank(a) > rank(b);
}

std::string basename_of(std::string_view path) {
  auto slash = path.find_last_of("/\\");
  return std::string(slash == std::string_view::npos ? path : path.substr(slash + 1));
}

}  // namespace

std::string_view to_string(CoverageCategory c) {
  for (const auto& [k, n] : kCategories) {
    if (k == c) return n;
  }
  return "LINE";
}

std::string_view to_string(CoverageStatus s) {
  for (const auto& [k, n] : kStatuses) {
    if (k == s) return n;
  }
  return "UNCOVERED";
}

std::optional<CoverageCategory> coverage_category_from_string(std::string_view text) {
  for (const auto& [k, n] : kCategories) {
    if (n == text) return k;
  }
  return std::nullopt;
}

std::optional<CoverageStatus> coverage_status_from_string(std::string_view text) {
  for (const auto& [k, n] : kStatuses) {
    if (n == text) return k;
  }
  return std::nullopt;
}

std::string CoverageItem::key() const {
  return std::string(to_string(category)) + "|" + hierarchical_name + "|" + source.file + ":" +
         std::to_string(source.line) + "|" + expression.value_or("");
}

const CoverageItem* CoverageReport::find(std::uint32_t id) const {
  for (const auto& i : items) {
    if (i.id == id) return &i;
  }
  return nullptr;
}

const CoverageItem* CoverageReport::find_key(std::string_view key) const {
  for (const auto& i : items) {
    if (i.key() == key) return &i;
  }
  return nullptr;
}

void CoverageReport::normalize() {
  for (std::size_t i = 0; i < items.size(); ++i) items[i].id = static_cast<std::uint32_t>(i + 1);
  bool scorable = std::any_of(items.begin(), items.end(),
                              [](const CoverageItem& i) { return counts_toward_score(i.category); });
  if (scorable) {
    auto s = compute_score(*this);
    score = s.score;
    per_category_scores = s.per_category;
  } else {
    score = 0.0;
    per_category_scores.clear();
  }
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

ScoreResult compute_score(const CoverageReport& report, const std::set<std::uint32_t>& excluded) {
  std::map<CoverageCategory, std::pair<std::size_t, std::size_t>> counts;  // covered, total
  for (const auto& item : report.items) {
    if (!counts_toward_score(item.category) || excluded.count(item.id)) continue;
    auto& c = counts[item.category];
    c.second++;
    if (item.status == CoverageStatus::Covered) c.first++;
  }
  if (counts.empty()) throw Error(ErrorCode::NoItems, "coverage report has no scorable items");
  ScoreResult r;
  double sum = 0.0;
  for (const auto& [cat, c] : counts) {
    double pct = round2(100.0 * static_cast<double>(c.first) / static_cast<double>(c.second));
    r.per_category[cat] = pct;
    sum += pct;
  }
  r.score = round2(sum / static_cast<double>(counts.size()));
  return r;
}

CoverageReport parse_report_text(std::string_view text, std::string_view source_name) {
  std::string head = trim(text.substr(0, std::min<std::size_t>(text.size(), 4096)));
  CoverageReport report;
  if (head.rfind(kMagic, 0) == 0) {
    report = parse_normalized(text, source_name);
  } else if (!head.empty() && head[0] == '{') {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::UnrecognizedFormat, "invalid coverage JSON", ErrorLocation{std::string(source_name), 0});
    }
    return coverage_report_from_json(j, source_name);
  } else if (std::regex_search(std::string(text), std::regex(R"(<table[^>]*covtable)", std::regex::icase))) {
    report = parse_html(text, source_name);
  } else {
    throw Error(ErrorCode::UnrecognizedFormat,
                "neither a normalized coverage report nor a covtable HTML report",
                ErrorLocation{std::string(source_name), 0});
  }
  report.normalize();
  return report;
}

CoverageReport parse_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotReadable, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report_text(ss.str(), path.string());
}

std::string serialize_report(const CoverageReport& report) {
  std::ostringstream out;
  out << kMagic << "\n";
  out << "# run_label: " << report.run_label << "\n";
  for (const auto& i : report.items) {
    out << to_string(i.category) << '\t' << to_string(i.status) << '\t' << escape_field(i.hierarchical_name) << '\t'
        << escape_field(i.source.file) << ':' << i.source.line << '\t' << optional_field(i.expression);
    if (i.detail) out << '\t' << optional_field(i.detail);
    out << "\n";
  }
  return out.str();
}

std::string render_report_html(const CoverageReport& report) {
  std::ostringstream out;
  out << "<html><head><title>" << html_escape(report.run_label) << "</title></head><body>\n"
      << "<table class=\"covtable\">\n"
      << "<tr><th>Category</th><th>Status</th><th>Hierarchy</th><th>Source</th><th>Expression</th>"
         "<th>Detail</th></tr>\n";
  for (const auto& i : report.items) {
    out << "<tr><td>" << to_string(i.category) << "</td><td>" << to_string(i.status) << "</td><td>"
        << html_escape(i.hierarchical_name) << "</td><td>" << html_escape(i.source.file) << ":" << i.source.line
        << "</td><td>" << html_escape(i.expression.value_or("-")) << "</td><td>"
        << html_escape(i.detail.value_or("-")) << "</td></tr>\n";
  }
  out << "</table>\n</body></html>\n";
  return out.str();
}

std::vector<std::uint32_t> merge_upward(CoverageReport& base, const CoverageReport& delta) {
  std::map<std::string, CoverageStatus> best;
  for (const auto& d : delta.items) {
    auto [it, inserted] = best.emplace(d.key(), d.status);
    if (!inserted && status_rank_higher(d.status, it->second)) it->second = d.status;
  }
  std::vector<std::uint32_t> improved;
  for (auto& item : base.items) {
    auto it = best.find(item.key());
    if (it == best.end() || !status_rank_higher(it->second, item.status)) continue;
    item.status = it->second;
    improved.push_back(item.id);
  }
  if (!improved.empty()) {
    auto s = compute_score(base);
    base.score = s.score;
    base.per_category_scores = s.per_category;
  }
  return improved;
}

std::optional<std::string> item_module(const CoverageItem& item, const DesignModel& model) {
  if (auto m = model.resolve_hierarchy(item.hierarchical_name)) return m;
  // fall back to the file the item points at
  auto mods = model.modules_in_file(item.source.file);
  if (mods.size() == 1) return mods[0];
  return std::nullopt;
}

std::size_t UncoveredSummary::total_items() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.item_ids.size() + g.omitted;
  return n;
}

UncoveredSummary extract_uncovered(const CoverageReport& report, std::size_t budget, const DesignModel* model) {
  if (budget < 1) throw Error(ErrorCode::InvalidArgument, "context budget must be at least 1");
  std::map<std::pair<CoverageCategory, std::string>, std::vector<const CoverageItem*>> grouped;
  for (const auto& item : report.items) {
    if (item.status == CoverageStatus::Covered) continue;
    std::string module = item.hierarchical_name;
    if (model) {
      if (auto m = item_module(item, *model)) module = *m;
    }
    grouped[{item.category, module}].push_back(&item);
  }
  UncoveredSummary summary;
  summary.context_budget = budget;
  for (auto& [key, items] : grouped) {
    std::stable_sort(items.begin(), items.end(), [](const CoverageItem* a, const CoverageItem* b) {
      return std::tie(a->source, a->id) < std::tie(b->source, b->id);
    });
    UncoveredGroup g;
    g.category = key.first;
    g.module = key.second;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i < budget) {
        g.item_ids.push_back(items[i]->id);
      } else {
        ++g.omitted;
      }
    }
    summary.groups.push_back(std::move(g));
  }
  return summary;
}

std::string UncoveredSummary::render_text(const CoverageReport& report) const {
  std::ostringstream out;
  for (const auto& g : groups) {
    out << "[" << to_string(g.category) << "] " << g.module;
    if (g.omitted) out << " (+" << g.omitted << " more)";
    out << "\n";
    for (auto id : g.item_ids) {
      const CoverageItem* i = report.find(id);
      if (!i) continue;
      out << "  #" << i->id << " " << to_string(i->status) << " " << i->hierarchical_name << " "
          << i->source.file << ":" << i->source.line;
      if (i->expression) out << " expr=" << *i->expression;
      if (i->detail) out << " detail=" << *i->detail;
      out << "\n";
    }
  }
  return out.str();
}

SeedSet seed_signals(const CoverageItem& item, const DesignModel* model) {
  if (item.status == CoverageStatus::Covered) {
    throw Error(ErrorCode::InvalidArgument, "item #" + std::to_string(item.id) + " is already covered");
  }
  SeedSet seeds;
  seeds.origin = std::to_string(item.id);
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::NoSeedsFound, "item #" + std::to_string(item.id) + " (" + item.key() + "): " + why);
  };

  std::optional<std::string> module;
  const ModuleDef* mod = nullptr;
  if (model) {
    module = item_module(item, *model);
    if (!module) throw fail("hierarchy '" + item.hierarchical_name + "' does not resolve to a module");
    mod = &model->module(*module);
  }
  auto known = [&](const std::string& name) {
    return !mod || ((mod->is_port(name) || mod->find_signal(name)) && !mod->constants.count(name));
  };
  auto add = [&](const std::string& name) {
    if (known(name)) seeds.signals.insert(SignalRef{module.value_or(""), name, std::nullopt});
  };

  switch (item.category) {
    case CoverageCategory::Toggle: {
      std::string text = item.expression.value_or("");
      auto ids = scan_identifiers(text);
      if (!ids.empty()) add(ids.front());
      break;
    }
    case CoverageCategory::Branch:
    case CoverageCategory::Condition:
    case CoverageCategory::Functional:
      for (const auto& n : scan_identifiers(item.expression.value_or(""))) add(n);
      break;
    case CoverageCategory::Line: {
      if (model) {
        // innermost statement covering the line
        const Statement* best = nullptr;
        for (StatementId id : mod->statements) {
          const Statement& s = model->statement(id);
          if (basename_of(s.span.file) != basename_of(item.source.file)) continue;
          if (s.span.line_start > item.source.line || s.span.line_end < item.source.line) continue;
          if (!best || s.id > best->id) best = &s;
        }
        if (best) {
          for (const auto& n : best->signal_names()) add(n);
        }
      } else {
        std::string text = item.detail.value_or("") + " " + item.expression.value_or("");
        for (const auto& n : scan_identifiers(text)) add(n);
      }
      break;
    }
  }
  if (seeds.signals.empty()) throw fail("no resolvable signal");
  return seeds;
}

}  // namespace uvmarvel
