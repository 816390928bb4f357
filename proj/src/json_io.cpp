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

#include "uvmarvel/json_io.hpp"

#include "uvmarvel/error.hpp"

namespace uvmarvel {

namespace {

Json optional_text(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }

Json names(const std::set<SignalRef>& refs) {
  Json out = Json::array();
  for (const auto& r : refs) out.push_back(to_json(r));
  return out;
}

}  // namespace

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const SignalRef& ref) {
  std::string text = ref.module_name.empty() ? ref.signal_name : ref.module_name + "." + ref.signal_name;
  if (ref.bit_range) {
    text += "[" + std::to_string(ref.bit_range->msb);
    if (ref.bit_range->lsb != ref.bit_range->msb) text += ":" + std::to_string(ref.bit_range->lsb);
    text += "]";
  }
  return text;
}

Json to_json(const Statement& s) {
  Json j;
  j["id"] = s.id;
  j["kind"] = std::string(to_string(s.kind));
  j["module"] = s.module_name;
  j["file"] = s.span.file;
  j["line_start"] = s.span.line_start;
  j["line_end"] = s.span.line_end;
  j["parent"] = s.parent_id ? Json(*s.parent_id) : Json(nullptr);
  j["children"] = s.children;
  Json reads = Json::array(), writes = Json::array();
  for (const auto& r : s.reads) reads.push_back(to_json(SignalRef{"", r.signal_name, r.bit_range}));
  for (const auto& w : s.writes) writes.push_back(to_json(SignalRef{"", w.signal_name, w.bit_range}));
  j["reads"] = reads;
  j["writes"] = writes;
  if (!s.header.empty()) j["header"] = s.header;
  return j;
}

Json to_json(const DesignModel& model) {
  Json j;
  j["top"] = model.top_module.empty() ? Json(nullptr) : Json(model.top_module);
  j["black_boxes"] = model.black_boxes;
  Json files = Json::array();
  for (const auto& f : model.files) files.push_back({{"path", f.path}, {"modules", f.modules}});
  j["files"] = files;
  Json modules = Json::array();
  for (const auto& m : model.modules) {
    Json jm;
    jm["name"] = m.name;
    jm["file"] = m.file;
    Json ports = Json::array();
    for (const auto& p : m.ports) {
      ports.push_back({{"name", p.name},
                       {"direction", std::string(to_string(p.direction))},
                       {"width", p.width ? Json(*p.width) : Json(nullptr)}});
    }
    jm["ports"] = ports;
    Json params = Json::object();
    for (const auto& p : m.parameters) params[p.name] = p.value ? Json(*p.value) : Json(p.value_text);
    jm["parameters"] = params;
    Json signals = Json::array();
    for (const auto& s : m.signals) {
      signals.push_back({{"name", s.name}, {"net_type", s.net_type}, {"width", s.width ? Json(*s.width) : Json(nullptr)}});
    }
    jm["signals"] = signals;
    Json insts = Json::array();
    for (const auto& i : m.instances) {
      Json b = Json::array();
      for (const auto& pb : i.bindings) {
        b.push_back({{"formal", pb.formal}, {"actual", pb.actual_text}, {"statement", pb.statement}});
      }
      insts.push_back({{"instance", i.instance_name}, {"module", i.child_module}, {"bindings", b}});
    }
    jm["instances"] = insts;
    jm["statements"] = m.statements;
    modules.push_back(jm);
  }
  j["modules"] = modules;
  Json stmts = Json::array();
  for (const auto& s : model.statements) stmts.push_back(to_json(s));
  j["statements"] = stmts;
  return j;
}

Json to_json(const DependencySlice& slice) {
  Json j;
  Json by_file = Json::object();
  for (const auto& [m, ids] : slice.statements_by_file) by_file[m] = ids;
  j["statements_by_file"] = by_file;
  Json frontiers = Json::array();
  for (const auto& f : slice.iteration_frontiers) frontiers.push_back(names(f));
  j["iteration_frontiers"] = frontiers;
  j["entry_ports"] = slice.entry_ports;
  j["visited_signals"] = names(slice.visited_signals);
  j["terminal_signals"] = names(slice.terminal_signals);
  j["support_statements"] = slice.support_statements;
  j["unresolved_instances"] = slice.unresolved_instances;
  j["partial"] = slice.partial;
  j["unreachable_from_io"] = slice.unreachable_from_io;
  j["size"] = slice.size();
  return j;
}

Json to_json(const FilteredDUT& dut) {
  Json j;
  Json files = Json::array();
  for (const auto& f : dut.files) {
    Json prov = Json::array();
    for (const auto& p : f.provenance) {
      prov.push_back({{"out_line", p.out_line}, {"file", p.file}, {"line", p.line}, {"statements", p.statements}});
    }
    files.push_back({{"path", f.path}, {"module", f.module_name}, {"text", f.text}, {"provenance", prov}});
  }
  j["files"] = files;
  j["emitted_statements"] = dut.emitted_statements;
  j["dropped_statements"] = dut.dropped_statements;
  j["warnings"] = dut.warnings;
  j["line_count"] = dut.line_count();
  return j;
}

Json to_json(const CoverageItem& item) {
  return {{"id", item.id},
          {"category", std::string(to_string(item.category))},
          {"status", std::string(to_string(item.status))},
          {"hierarchical_name", item.hierarchical_name},
          {"file", item.source.file},
          {"line", item.source.line},
          {"expression", optional_text(item.expression)},
          {"detail", optional_text(item.detail)}};
}

Json to_json(const CoverageReport& report) {
  Json j;
  j["run_label"] = report.run_label;
  j["score"] = report.score;
  Json per = Json::object();
  for (const auto& [c, v] : report.per_category_scores) per[std::string(to_string(c))] = v;
  j["per_category_scores"] = per;
  Json items = Json::array();
  for (const auto& i : report.items) items.push_back(to_json(i));
  j["items"] = items;
  j["malformed_items"] = report.malformed_items;
  return j;
}

CoverageReport coverage_report_from_json(const Json& j, std::string_view source_name) {
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::UnrecognizedFormat, "coverage JSON: " + why, ErrorLocation{std::string(source_name), 0});
  };
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array()) throw bad("missing 'items' array");
  CoverageReport report;
  report.run_label = j.value("run_label", std::string());
  std::size_t index = 0;
  for (const auto& ji : j["items"]) {
    ++index;
    try {
      CoverageItem item;
      auto cat = coverage_category_from_string(ji.at("category").get<std::string>());
      auto st = coverage_status_from_string(ji.at("status").get<std::string>());
      if (!cat || !st) throw std::invalid_argument("unknown category or status");
      if (*cat == CoverageCategory::Line && *st == CoverageStatus::Partial) {
        throw std::invalid_argument("a line item cannot be partially covered");
      }
      item.category = *cat;
      item.status = *st;
      item.hierarchical_name = ji.at("hierarchical_name").get<std::string>();
      item.source.file = ji.at("file").get<std::string>();
      item.source.line = ji.at("line").get<int>();
      if (item.hierarchical_name.empty() || item.source.line < 1) throw std::invalid_argument("empty name or bad line");
      if (ji.contains("expression") && !ji["expression"].is_null()) item.expression = ji["expression"].get<std::string>();
      if (ji.contains("detail") && !ji["detail"].is_null()) item.detail = ji["detail"].get<std::string>();
      report.items.push_back(std::move(item));
    } catch (const std::exception& e) {
      ++report.malformed_items;
      report.warnings.push_back(std::string(source_name) + ": item " + std::to_string(index) +
                                ": skipped malformed item: " + e.what());
    }
  }
  report.normalize();
  return report;
}

Json to_json(const UncoveredSummary& summary, const CoverageReport& report) {
  Json j;
  j["context_budget"] = summary.context_budget;
  Json groups = Json::array();
  for (const auto& g : summary.groups) {
    Json items = Json::array();
    for (auto id : g.item_ids) {
      if (const auto* i = report.find(id)) items.push_back(to_json(*i));
    }
    groups.push_back({{"category", std::string(to_string(g.category))},
                      {"module", g.module},
                      {"items", items},
                      {"omitted", g.omitted}});
  }
  j["groups"] = groups;
  j["total_items"] = summary.total_items();
  return j;
}

namespace {

Json annotations_json(const std::vector<Annotation>& as) {
  Json out = Json::array();
  for (const auto& a : as) out.push_back({{"key", a.key}, {"value", a.value}});
  return out;
}

}  // namespace

Json to_json(const IRDocument& doc) {
  Json j;
  j["module_name"] = doc.module_name;
  j["module_annotations"] = annotations_json(doc.module_annotations);
  Json ifaces = Json::array();
  for (const auto& d : doc.interfaces) {
    Json sigs = Json::array();
    for (const auto& s : d.signals) {
      sigs.push_back({{"name", s.name},
                      {"direction", std::string(to_string(s.direction))},
                      {"width", s.width},
                      {"role_tag", s.role_tag}});
    }
    Json ranges = Json::array();
    for (const auto& r : d.address_ranges) ranges.push_back({{"base", r.base}, {"size", r.size}});
    ifaces.push_back({{"name", d.name},
                      {"protocol", std::string(to_string(d.protocol))},
                      {"role", std::string(to_string(d.role))},
                      {"signals", sigs},
                      {"address_ranges", ranges},
                      {"annotations", annotations_json(d.annotations)}});
  }
  j["interfaces"] = ifaces;
  Json regs = Json::array();
  for (const auto& r : doc.registers) {
    regs.push_back({{"name", r.name},
                    {"offset", r.offset},
                    {"width", r.width},
                    {"reset_value", r.reset_value},
                    {"access", std::string(to_string(r.access))},
                    {"interface", r.interface_name.empty() ? Json(nullptr) : Json(r.interface_name)},
                    {"annotations", annotations_json(r.annotations)}});
  }
  j["registers"] = regs;
  Json clocks = Json::array(), resets = Json::array();
  for (const auto& c : doc.timing.clocks) clocks.push_back({{"name", c.name}, {"period", optional_text(c.period)}});
  for (const auto& r : doc.timing.resets) resets.push_back({{"name", r.name}, {"active_low", r.active_low}});
  j["timing"] = {{"clocks", clocks},
                 {"resets", resets},
                 {"constraints", doc.timing.constraints},
                 {"annotations", annotations_json(doc.timing.annotations)}};
  Json points = Json::array();
  for (const auto& p : doc.functional_points) {
    points.push_back({{"id", p.id},
                      {"description", p.description},
                      {"tags", p.tags},
                      {"annotations", annotations_json(p.annotations)}});
  }
  j["functional_points"] = points;
  return j;
}

Json to_json(const IRFinding& f) {
  return {{"severity", std::string(to_string(f.severity))}, {"code", f.code}, {"where", f.where}, {"message", f.message}};
}

}  // namespace uvmarvel

namespace uvmarvel {

Json to_json(const SpecializedComponent& c) {
  Json fills = Json::object();
  for (const auto& [id, text] : c.region_fills) fills[id] = text;
  return Json{{"skeleton", c.skeleton_id},
              {"interface", c.interface_name},
              {"attempts", c.attempts},
              {"region_fills", fills},
              {"output", c.output_text}};
}

Json to_json(const PromptBundle& b) {
  return Json{{"item", to_json(b.uncovered_item)},
              {"entry_ports", b.entry_ports},
              {"included_modules", b.included_modules},
              {"truncated_modules", b.truncated_modules},
              {"token_estimate", b.token_estimate},
              {"task_directive", b.task_directive},
              {"filtered_dut", b.filtered_dut},
              {"text", b.text}};
}

Json to_json(const SequenceCandidate& c) {
  Json j{{"id", c.id},
         {"source_model", c.source_model},
         {"target_items", c.target_items},
         {"status", std::string(to_string(c.status))},
         {"newly_covered", c.newly_covered},
         {"checkers_ok", c.checkers_ok},
         {"body", c.body}};
  j["error_log"] = c.error_log ? Json(*c.error_log) : Json(nullptr);
  return j;
}

Json to_json(const WaiverCandidate& w) {
  return Json{{"target_item", w.target_item},
              {"justification", w.justification},
              {"proposing_models", std::vector<std::string>(w.proposing_models.begin(), w.proposing_models.end())}};
}

Json to_json(const VerificationReport& r) {
  Json runs = Json::array();
  for (const auto& run : r.runs) runs.push_back(Json{{"run_label", run.run_label}, {"coverage", to_json(run.report)}});
  Json cands = Json::array();
  for (const auto& c : r.candidates) cands.push_back(to_json(c));
  Json waivers = Json::array();
  for (const auto& w : r.waivers) waivers.push_back(to_json(w));
  Json j{{"runs", runs},
         {"error_logs", r.error_logs},
         {"waivers", waivers},
         {"candidates", cands},
         {"final_score", r.final_score},
         {"iterations", r.iterations},
         {"llm_calls", r.llm_calls},
         {"stop_reason", r.stop_reason}};
  j["srg"] = r.srg ? Json(*r.srg) : Json(nullptr);
  return j;
}

}  // namespace uvmarvel

namespace uvmarvel {

namespace {

SignalRef signal_from_text(const std::string& text) {
  SignalRef r;
  std::string rest = text;
  auto br = rest.find('[');
  if (br != std::string::npos && rest.back() == ']') {
    std::string range = rest.substr(br + 1, rest.size() - br - 2);
    rest = rest.substr(0, br);
    auto colon = range.find(':');
    try {
      int msb = std::stoi(range.substr(0, colon));
      int lsb = colon == std::string::npos ? msb : std::stoi(range.substr(colon + 1));
      r.bit_range = BitRange{msb, lsb};
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "slice JSON: bad bit range in '" + text + "'");
    }
  }
  auto dot = rest.find('.');
  if (dot == std::string::npos) {
    r.signal_name = rest;
  } else {
    r.module_name = rest.substr(0, dot);
    r.signal_name = rest.substr(dot + 1);
  }
  return r;
}

std::set<SignalRef> signals_from(const Json& j) {
  std::set<SignalRef> out;
  for (const auto& s : j) out.insert(signal_from_text(s.get<std::string>()));
  return out;
}

}  // namespace

DependencySlice slice_from_json(const Json& j, const DesignModel& model) {
  if (!j.is_object() || !j.contains("statements_by_file") || !j["statements_by_file"].is_object()) {
    throw Error(ErrorCode::InvalidArgument, "slice JSON: missing 'statements_by_file' object");
  }
  auto check = [&](StatementId id, const std::string* module) {
    if (id >= model.statements.size()) {
      throw Error(ErrorCode::InvalidArgument, "slice JSON: statement " + std::to_string(id) + " is not in the design");
    }
    if (module && model.statement(id).module_name != *module) {
      throw Error(ErrorCode::InvalidArgument, "slice JSON: statement " + std::to_string(id) + " does not belong to '" + *module + "'");
    }
  };
  DependencySlice s;
  try {
    for (const auto& [mod, ids] : j["statements_by_file"].items()) {
      if (!model.find_module(mod)) throw Error(ErrorCode::InvalidArgument, "slice JSON: unknown module '" + mod + "'");
      for (const auto& id : ids) {
        check(id.get<StatementId>(), &mod);
        s.statements_by_file[mod].insert(id.get<StatementId>());
      }
    }
    for (const auto& id : j.value("support_statements", Json::array())) {
      check(id.get<StatementId>(), nullptr);
      s.support_statements.insert(id.get<StatementId>());
    }
    for (const auto& f : j.value("iteration_frontiers", Json::array())) s.iteration_frontiers.push_back(signals_from(f));
    s.entry_ports = j.value("entry_ports", std::set<std::string>{});
    s.visited_signals = signals_from(j.value("visited_signals", Json::array()));
    s.terminal_signals = signals_from(j.value("terminal_signals", Json::array()));
    s.unresolved_instances = j.value("unresolved_instances", std::vector<std::string>{});
    s.partial = j.value("partial", false);
    s.unreachable_from_io = j.value("unreachable_from_io", false);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("slice JSON: ") + e.what());
  }
  return s;
}

}  // namespace uvmarvel
