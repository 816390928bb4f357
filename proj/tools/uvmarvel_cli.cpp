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

// Command-line front end. Results go to stdout (text or --json); logs and a
// one-line error JSON go to stderr. Exit status: 0 ok, 1 domain error,
// 2 usage error.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "uvmarvel/bus_protocol.hpp"
#include "uvmarvel/coverage.hpp"
#include "uvmarvel/error.hpp"
#include "uvmarvel/ir_model.hpp"
#include "uvmarvel/json_io.hpp"
#include "uvmarvel/llm_client.hpp"
#include "uvmarvel/refinement.hpp"
#include "uvmarvel/signal_tracker.hpp"
#include "uvmarvel/simulator.hpp"
#include "uvmarvel/verilog_model.hpp"
#include "uvmarvel/verilog_patcher.hpp"

namespace fs = std::filesystem;
using namespace uvmarvel;

namespace {

constexpr const char* kVersion = "0.1.0";

// Usage problems found after CLI11 has parsed the line.
struct UsageError : std::runtime_error {
  UsageError(std::string msg, const CLI::App* sub) : std::runtime_error(std::move(msg)), app(sub) {}
  const CLI::App* app;
};

std::string fmt2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotReadable, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotReadable, "cannot write " + p.string());
  out << text;
}

Json read_json(const fs::path& p) {
  Json j = Json::parse(read_file(p), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::UnrecognizedFormat, p.string() + " is not valid JSON");
  return j;
}

// --design accepts files and directories; a directory contributes its .v
// files and may name the top module in a TOP file.
struct DesignArgs {
  std::vector<std::string> inputs;
  std::string top;

  void add(CLI::App* app, bool required) {
    auto* o = app->add_option("--design", inputs, "Verilog files or design directories");
    if (required) o->required();
    app->add_option("--top", top, "Top module (defaults to the TOP file of a design directory)");
  }

  bool given() const { return !inputs.empty(); }

  DesignModel load(const CLI::App* app) const {
    std::vector<fs::path> files;
    std::string top_name = top;
    for (const auto& in : inputs) {
      fs::path p(in);
      if (fs::is_directory(p)) {
        std::vector<fs::path> vs;
        for (const auto& e : fs::directory_iterator(p)) {
          if (e.path().extension() == ".v") vs.push_back(e.path());
        }
        std::sort(vs.begin(), vs.end());
        files.insert(files.end(), vs.begin(), vs.end());
        if (top_name.empty() && fs::exists(p / "TOP")) {
          top_name = read_file(p / "TOP");
          top_name.erase(std::remove_if(top_name.begin(), top_name.end(), ::isspace), top_name.end());
        }
      } else {
        files.push_back(p);
      }
    }
    if (top_name.empty()) throw UsageError("--top is required", app);
    spdlog::debug("parsing {} file(s), top {}", files.size(), top_name);
    return parse_design(files, top_name);
  }
};

struct Output {
  bool json = false;
  bool text = false;
  void add(CLI::App* app) {
    auto* j = app->add_flag("--json", json, "Machine-readable JSON output");
    app->add_flag("--text", text, "Human-readable text output (default)")->excludes(j);
  }
};

void emit(const Output& o, const Json& j, const std::string& text) {
  if (o.json) {
    std::cout << dump_json(j);
  } else {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  }
}

void log_warnings(const std::vector<std::string>& ws) {
  for (const auto& w : ws) spdlog::warn("{}", w);
}

// ---------------------------------------------------------------- dump-model

void cmd_dump_model(const CLI::App* app, const DesignArgs& d, const Output& o) {
  DesignModel m = d.load(app);
  std::ostringstream t;
  t << "top " << m.top_module << ": " << m.modules.size() << " modules, " << m.statements.size() << " statements\n";
  for (const auto& s : m.statements) {
    t << "#" << s.id << " " << to_string(s.kind) << " " << s.module_name << " " << s.span.file << ":" << s.span.line_start;
    if (s.span.line_end != s.span.line_start) t << "-" << s.span.line_end;
    t << " reads={";
    bool first = true;
    for (const auto& r : s.reads) t << (std::exchange(first, false) ? "" : ",") << r.signal_name;
    t << "} writes={";
    first = true;
    for (const auto& w : s.writes) t << (std::exchange(first, false) ? "" : ",") << w.signal_name;
    t << "}\n";
  }
  emit(o, to_json(m), t.str());
}

// ---------------------------------------------------------------- trace

SeedSet seeds_from(const DesignModel& m, const std::vector<std::string>& raw) {
  SeedSet seeds;
  for (const auto& arg : raw) {
    std::stringstream ss(arg);
    std::string one;
    while (std::getline(ss, one, ',')) {
      if (one.empty()) continue;
      SignalRef ref = parse_seed(m, one);
      bool known = false;
      for (const auto& mod : m.modules) {
        if (!ref.module_name.empty() && mod.name != ref.module_name) continue;
        known = known || mod.is_port(ref.signal_name) || mod.find_signal(ref.signal_name);
      }
      if (!known) throw Error(ErrorCode::InvalidArgument, "seed '" + one + "' names no signal of the design");
      seeds.signals.insert(ref);
    }
  }
  return seeds;
}

std::string slice_text(const DependencySlice& slice, const DesignModel& m) {
  std::ostringstream t;
  std::size_t modules = slice.statements_by_file.size();
  t << "slice: " << slice.size() << " statements in " << modules << " module(s), " << slice.iteration_frontiers.size()
    << " iteration(s)\n";
  t << "entry ports:";
  for (const auto& p : slice.entry_ports) t << " " << p;
  t << "\n";
  if (slice.partial) t << "partial: unresolved instances present\n";
  for (const auto& [mod, ids] : slice.statements_by_file) {
    t << "== " << mod << "\n";
    std::vector<StatementId> order(ids.begin(), ids.end());
    std::sort(order.begin(), order.end(), [&](StatementId a, StatementId b) {
      return m.statement(a).span.offset_begin < m.statement(b).span.offset_begin;
    });
    for (auto id : order) {
      const Statement& s = m.statement(id);
      std::string first_line = s.raw_text.substr(0, s.raw_text.find('\n'));
      t << s.span.file << ":" << s.span.line_start;
      if (s.span.line_end != s.span.line_start) t << "-" << s.span.line_end;
      t << "  [" << to_string(s.kind) << "] " << first_line << "\n";
    }
  }
  return t.str();
}

struct TraceArgs {
  std::vector<std::string> seeds;
  bool expand_clock_reset = false;
};

void cmd_trace(const CLI::App* app, const DesignArgs& d, const TraceArgs& a, const Output& o) {
  DesignModel m = d.load(app);
  SeedSet seeds = seeds_from(m, a.seeds);
  if (seeds.signals.empty()) throw UsageError("--seed needs at least one signal", app);
  TraceOptions opt;
  opt.expand_clock_reset = a.expand_clock_reset;
  DependencySlice slice = trace_cross_file(seeds, m, opt);
  for (const auto& u : slice.unresolved_instances) spdlog::warn("unresolved instance {}", u);
  emit(o, to_json(slice), slice_text(slice, m));
}

// ---------------------------------------------------------------- patch

struct PatchArgs {
  std::string slice_file;
  std::vector<std::string> seeds;
  std::string templates;
  std::string out_dir;
};

void cmd_patch(const CLI::App* app, const DesignArgs& d, const PatchArgs& a, const Output& o) {
  DesignModel m = d.load(app);
  DependencySlice slice;
  if (!a.slice_file.empty()) {
    slice = slice_from_json(read_json(a.slice_file), m);
  } else {
    SeedSet seeds = seeds_from(m, a.seeds);
    if (seeds.signals.empty()) throw UsageError("give --slice or --seed", app);
    slice = trace_cross_file(seeds, m);
  }
  TemplateLibrary lib = a.templates.empty() ? TemplateLibrary::builtin() : TemplateLibrary::load_directory(a.templates);
  FilteredDUT dut = patch(slice, m, lib);
  log_warnings(dut.warnings);
  if (a.out_dir.empty()) {
    emit(o, to_json(dut), dut.combined_text());
    return;
  }
  fs::path dir(a.out_dir);
  Json full = to_json(dut);
  Json files = Json::array();
  for (const auto& f : dut.files) {
    write_file(dir / f.path, f.text);
    files.push_back((dir / f.path).string());
  }
  Json sidecar = full;
  for (auto& f : sidecar["files"]) f.erase("text");
  write_file(dir / "provenance.json", dump_json(sidecar));
  Json summary{{"output_dir", dir.string()},
               {"files", files},
               {"provenance", (dir / "provenance.json").string()},
               {"emitted_statements", full["emitted_statements"]},
               {"dropped_statements", full["dropped_statements"]},
               {"warnings", dut.warnings}};
  std::ostringstream t;
  for (const auto& f : files) t << "wrote " << f.get<std::string>() << "\n";
  t << "wrote " << (dir / "provenance.json").string() << "\n";
  t << dut.emitted_statements.size() << " statements emitted, " << dut.dropped_statements.size() << " dropped\n";
  emit(o, summary, t.str());
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string report;
  std::size_t budget = 200;
};

void cmd_analyze(const CLI::App* app, const DesignArgs& d, const AnalyzeArgs& a, const Output& o) {
  CoverageReport r = parse_report(a.report);
  log_warnings(r.warnings);
  std::optional<DesignModel> m;
  if (d.given()) m = d.load(app);
  UncoveredSummary s = extract_uncovered(r, a.budget, m ? &*m : nullptr);
  Json j{{"report", to_json(r)}, {"uncovered", to_json(s, r)}, {"warnings", r.warnings}};
  std::ostringstream t;
  if (!r.run_label.empty()) t << r.run_label << "\n";
  t << "score: " << fmt2(r.score);
  if (!r.per_category_scores.empty()) {
    t << " (";
    bool first = true;
    for (const auto& [c, v] : r.per_category_scores) t << (std::exchange(first, false) ? "" : ", ") << to_string(c) << " " << fmt2(v);
    t << ")";
  }
  t << "\n" << r.items.size() << " items, " << s.total_items() << " not covered, " << r.malformed_items << " malformed\n";
  t << s.render_text(r);
  emit(o, j, t.str());
}

// ---------------------------------------------------------------- ir validate

struct IrArgs {
  std::string file;
};

void cmd_ir_validate(const CLI::App* app, const DesignArgs& d, const IrArgs& a, const Output& o) {
  IRDocument doc = parse_ir(a.file);
  std::optional<DesignModel> m;
  if (d.given()) m = d.load(app);
  auto findings = validate_ir(doc, m ? &*m : nullptr);
  std::size_t errors = 0, warnings = 0;
  Json fj = Json::array();
  std::ostringstream t;
  for (const auto& f : findings) {
    (f.severity == Severity::Error ? errors : warnings)++;
    fj.push_back(to_json(f));
    t << (f.severity == Severity::Error ? "error   " : "warning ") << f.code << "  " << f.where << ": " << f.message << "\n";
  }
  t << a.file << ": " << errors << " error(s), " << warnings << " warning(s)\n";
  Json j{{"file", a.file}, {"module", doc.module_name}, {"valid", errors == 0}, {"errors", errors},
         {"warnings", warnings}, {"findings", fj}};
  emit(o, j, t.str());
  if (errors) throw Error(ErrorCode::ValidationFailed, a.file + ": " + std::to_string(errors) + " validation error(s)");
}

// ---------------------------------------------------------------- specialize

struct SpecializeArgs {
  std::string ir;
  std::string lib;
  std::string llm;
  std::string out_dir;
  int max_attempts = 3;
};

void cmd_specialize(const SpecializeArgs& a, const Output& o) {
  IRDocument doc = parse_ir(a.ir);
  SkeletonLibrary lib = SkeletonLibrary::load(a.lib);
  auto llm = make_llm_client(a.llm, "llm");
  std::vector<IRFinding> warnings;
  auto selection = select_skeletons(doc, lib, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}: {}", w.where, w.message);
  SpecializeOptions opt;
  opt.max_attempts = a.max_attempts;
  Json comps = Json::array();
  std::ostringstream t;
  for (const auto& sel : selection) {
    const InterfaceDesc& iface = *doc.find_interface(sel.interface_name);
    SpecializedComponent c = specialize(*sel.skeleton, doc, iface, *llm, opt);
    fs::path file = fs::path(a.out_dir) / (sel.interface_name + "_" + std::string(to_string(sel.skeleton->component_kind)) + ".sv");
    write_file(file, c.output_text);
    Json cj = to_json(c);
    cj.erase("output");
    cj["file"] = file.string();
    comps.push_back(cj);
    t << "wrote " << file.string() << " (" << c.skeleton_id << ", " << c.attempts << " attempt(s))\n";
  }
  Json wj = Json::array();
  for (const auto& w : warnings) wj.push_back(to_json(w));
  emit(o, Json{{"output_dir", a.out_dir}, {"components", comps}, {"warnings", wj}}, t.str());
}

// ---------------------------------------------------------------- refine / report

std::string report_text(const Json& r) {
  std::ostringstream t;
  t << "stop reason: " << r.value("stop_reason", "") << " after " << r.value("iterations", 0) << " iteration(s)\n";
  t << "coverage history:\n";
  for (const auto& run : r.at("runs")) {
    t << "  " << std::left << std::setw(10) << run.at("run_label").get<std::string>() << " "
      << fmt2(run.at("coverage").at("score").get<double>()) << "\n";
  }
  t << "final score (waived items excluded): " << fmt2(r.at("final_score").get<double>()) << "\n";
  t << "waivers: " << r.at("waivers").size() << "\n";
  for (const auto& w : r.at("waivers")) {
    std::string why = w.at("justification").get<std::string>();
    std::string models;
    for (const auto& mdl : w.at("proposing_models")) models += (models.empty() ? "" : ", ") + mdl.get<std::string>();
    t << "  #" << w.at("target_item").get<int>() << " by " << models << ": " << why.substr(0, why.find('\n')) << "\n";
  }
  std::map<std::string, int> by_status;
  for (const auto& c : r.at("candidates")) by_status[c.at("status").get<std::string>()]++;
  t << "candidates: " << r.at("candidates").size();
  for (const auto& [s, n] : by_status) t << ", " << s << " " << n;
  t << "\n";
  t << "srg: " << (r.at("srg").is_null() ? std::string("n/a") : fmt2(r.at("srg").get<double>())) << "\n";
  t << "llm calls: " << r.value("llm_calls", 0) << "\n";
  t << "error log entries: " << r.at("error_logs").size() << "\n";
  for (const auto& e : r.at("error_logs")) t << "  " << e.get<std::string>() << "\n";
  return t.str();
}

struct RefineArgs {
  std::string report;
  std::vector<std::string> llms;
  std::string sim;
  std::string out;
  RefineConfig cfg;
};

void cmd_refine(const CLI::App* app, const DesignArgs& d, RefineArgs& a, const Output& o) {
  if (a.llms.size() != 3) throw UsageError("refine needs exactly three --llm label=spec options", app);
  std::vector<std::unique_ptr<LlmClient>> owned;
  std::vector<LlmClient*> llms;
  std::set<std::string> labels;
  for (const auto& spec : a.llms) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--llm expects label=spec, got '" + spec + "'", app);
    std::string label = spec.substr(0, eq);
    if (!labels.insert(label).second) throw UsageError("duplicate --llm label '" + label + "'", app);
    owned.push_back(make_llm_client(spec.substr(eq + 1), label));
    llms.push_back(owned.back().get());
  }
  try {
    a.cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what(), app);
  }
  DesignModel m = d.load(app);
  CoverageReport r = parse_report(a.report);
  log_warnings(r.warnings);
  auto sim = make_sim_runner(a.sim);
  VerificationReport vr = refine(m, r, llms, sim.get(), a.cfg);
  spdlog::info("refinement stopped ({}) after {} iteration(s), score {}", vr.stop_reason, vr.iterations, fmt2(vr.final_score));
  Json j = to_json(vr);
  if (!a.out.empty()) write_file(a.out, dump_json(j));
  emit(o, j, report_text(j));
}

struct ReportArgs {
  std::string input;
  std::string srg;
};

void cmd_report(const CLI::App* app, const ReportArgs& a, const Output& o) {
  if (a.input.empty() == a.srg.empty()) throw UsageError("give exactly one of --input or --srg", app);
  if (!a.input.empty()) {
    Json r = read_json(a.input);
    for (const char* k : {"runs", "waivers", "candidates", "error_logs", "final_score", "srg"}) {
      if (!r.contains(k)) throw Error(ErrorCode::UnrecognizedFormat, a.input + " is not a verification report (no '" + k + "')");
    }
    Json hist = Json::array();
    for (const auto& run : r["runs"]) hist.push_back({{"run_label", run["run_label"]}, {"score", run["coverage"]["score"]}});
    Json j{{"final_score", r["final_score"]}, {"history", hist}, {"waivers", r["waivers"]},
           {"candidates", r["candidates"].size()}, {"error_logs", r["error_logs"]}, {"srg", r["srg"]},
           {"stop_reason", r.value("stop_reason", "")}, {"iterations", r.value("iterations", 0)}};
    emit(o, j, report_text(r));
    return;
  }
  Json rows = read_json(a.srg);
  if (!rows.is_array()) throw Error(ErrorCode::UnrecognizedFormat, a.srg + ": expected a JSON array of results");
  std::vector<SrgEntry> entries;
  try {
    for (const auto& e : rows) {
      entries.push_back({e.at("testbench_id").get<std::string>(), e.at("compiled").get<bool>(), e.at("simulated").get<bool>(),
                         e.at("checkers_passed").get<bool>()});
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::UnrecognizedFormat, a.srg + ": " + e.what());
  }
  double srg = compute_srg(entries);
  std::size_t ok = std::count_if(entries.begin(), entries.end(),
                                 [](const SrgEntry& e) { return e.compiled && e.simulated && e.checkers_passed; });
  emit(o, Json{{"srg", srg}, {"passed", ok}, {"total", entries.size()}},
       "srg: " + fmt2(srg) + " (" + std::to_string(ok) + "/" + std::to_string(entries.size()) + ")\n");
}

void print_error_json(const std::string& code, const std::string& message, const Error* e = nullptr) {
  Json err{{"code", code}, {"message", message}};
  if (e && e->where()) {
    err["file"] = e->where()->file;
    err["line"] = e->where()->line;
  }
  if (e) err["details"] = e->details();
  std::cerr << Json{{"error", err}}.dump() << std::endl;
}

const CLI::App* deepest_parsed(const CLI::App* app) {
  for (const auto* sub : app->get_subcommands()) return deepest_parsed(sub);
  return app;
}

// Help text with the full command path in the usage line.
std::string help_for(const CLI::App* app) {
  std::string prefix;
  for (const CLI::App* p = app->get_parent(); p; p = p->get_parent()) {
    prefix = p->get_name() + (prefix.empty() ? "" : " " + prefix);
  }
  return app->help(prefix);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage-driven testbench refinement toolkit", "uvmarvel"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read option defaults from a TOML-style file ([subcommand] sections)");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "Log verbosity on stderr")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();
  app.require_subcommand(1);

  std::function<void()> action;

  DesignArgs dump_design;
  Output dump_out;
  auto* dump = app.add_subcommand("dump-model", "Parse a design and print its statement model");
  dump_design.add(dump, true);
  dump_out.add(dump);
  dump->callback([&] { action = [&] { cmd_dump_model(dump, dump_design, dump_out); }; });

  DesignArgs trace_design;
  TraceArgs trace_args;
  Output trace_out;
  auto* trace = app.add_subcommand("trace", "Backward dependency slice from seed signals");
  trace_design.add(trace, true);
  trace->add_option("--seed", trace_args.seeds, "Seed signals: sig, module.sig or hier.path.sig; comma-separated")->required();
  trace->add_flag("--expand-clock-reset", trace_args.expand_clock_reset, "Trace through clock and reset signals");
  trace_out.add(trace);
  trace->callback([&] { action = [&] { cmd_trace(trace, trace_design, trace_args, trace_out); }; });

  DesignArgs patch_design;
  PatchArgs patch_args;
  Output patch_out;
  auto* patch_cmd = app.add_subcommand("patch", "Rebuild a slice into a standalone filtered design");
  patch_design.add(patch_cmd, true);
  auto* slice_opt = patch_cmd->add_option("--slice", patch_args.slice_file, "Slice JSON written by 'trace --json'");
  patch_cmd->add_option("--seed", patch_args.seeds, "Trace these seeds instead of reading a slice")->excludes(slice_opt);
  patch_cmd->add_option("--templates", patch_args.templates, "Directory of .vt templates overriding the built-in set");
  patch_cmd->add_option("-o,--output", patch_args.out_dir, "Write one .v per module plus provenance.json here");
  patch_out.add(patch_cmd);
  patch_cmd->callback([&] { action = [&] { cmd_patch(patch_cmd, patch_design, patch_args, patch_out); }; });

  DesignArgs analyze_design;
  AnalyzeArgs analyze_args;
  Output analyze_out;
  auto* analyze = app.add_subcommand("analyze", "Score a coverage report and list what is not covered");
  analyze->add_option("--report", analyze_args.report, "Coverage report (normalized text, covtable HTML or JSON)")->required();
  analyze_design.add(analyze, false);
  analyze->add_option("--budget", analyze_args.budget, "Maximum uncovered items listed")->capture_default_str()->check(CLI::PositiveNumber);
  analyze_out.add(analyze);
  analyze->callback([&] { action = [&] { cmd_analyze(analyze, analyze_design, analyze_args, analyze_out); }; });

  auto* ir = app.add_subcommand("ir", "Design intermediate representation tools");
  ir->require_subcommand(1);
  DesignArgs ir_design;
  IrArgs ir_args;
  Output ir_out;
  auto* validate = ir->add_subcommand("validate", "Parse an IR file and check its consistency");
  validate->add_option("file", ir_args.file, "IR file")->required();
  ir_design.add(validate, false);
  ir_out.add(validate);
  validate->callback([&] { action = [&] { cmd_ir_validate(validate, ir_design, ir_args, ir_out); }; });

  SpecializeArgs spec_args;
  Output spec_out;
  auto* spec = app.add_subcommand("specialize", "Fill protocol skeletons for every interface of an IR file");
  spec->add_option("--ir", spec_args.ir, "IR file")->required();
  spec->add_option("--protocol-lib", spec_args.lib, "Skeleton library directory")->required();
  spec->add_option("--llm", spec_args.llm, "mock:<transcript.json> or http:<url>[#model]")->required();
  spec->add_option("-o,--output", spec_args.out_dir, "Output directory")->required();
  spec->add_option("--max-attempts", spec_args.max_attempts, "Attempts per component")->capture_default_str()->check(CLI::PositiveNumber);
  spec_out.add(spec);
  spec->callback([&] { action = [&] { cmd_specialize(spec_args, spec_out); }; });

  DesignArgs refine_design;
  RefineArgs refine_args;
  Output refine_out;
  auto* refine_cmd = app.add_subcommand("refine", "Close coverage with model-generated sequences and waivers");
  refine_design.add(refine_cmd, true);
  refine_cmd->add_option("--report", refine_args.report, "Baseline coverage report")->required();
  refine_cmd->add_option("--llm", refine_args.llms, "label=spec, given three times (mock:<file> or http:<url>[#model])")->required();
  refine_cmd->add_option("--sim", refine_args.sim, "mock:<script.json> or exec:<command>")->required();
  refine_cmd->add_option("--target", refine_args.cfg.target_score, "Stop at this score")->capture_default_str();
  refine_cmd->add_option("--points-per-iter", refine_args.cfg.points_per_iter, "Uncovered points per iteration")->capture_default_str();
  refine_cmd->add_option("--repair-attempts", refine_args.cfg.repair_attempts, "Error-feedback calls per model and point")->capture_default_str();
  refine_cmd->add_option("--waiver-quorum", refine_args.cfg.waiver_quorum, "Models that must agree on a waiver")->capture_default_str();
  refine_cmd->add_option("--max-iters", refine_args.cfg.max_iters, "Iteration limit")->capture_default_str();
  refine_cmd->add_option("--context-budget", refine_args.cfg.context_budget, "Prompt budget in tokens")->capture_default_str();
  refine_cmd->add_option("-o,--output", refine_args.out, "Write the verification report JSON here");
  refine_out.add(refine_cmd);
  refine_cmd->callback([&] { action = [&] { cmd_refine(refine_cmd, refine_design, refine_args, refine_out); }; });

  ReportArgs report_args;
  Output report_out;
  auto* report = app.add_subcommand("report", "Summarize a verification report or compute SRG");
  auto* in_opt = report->add_option("--input", report_args.input, "Verification report JSON from 'refine'");
  report->add_option("--srg", report_args.srg, "JSON array of {testbench_id, compiled, simulated, checkers_passed}")->excludes(in_opt);
  report_out.add(report);
  report->callback([&] { action = [&] { cmd_report(report, report_args, report_out); }; });

  // unknown keys in a config file are usage errors, not silently dropped
  app.allow_config_extras(CLI::config_extras_mode::error);
  for (auto* sub : app.get_subcommands({})) {
    sub->allow_config_extras(CLI::config_extras_mode::error);
    for (auto* nested : sub->get_subcommands({})) nested->allow_config_extras(CLI::config_extras_mode::error);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const CLI::App* where = deepest_parsed(&app);
    std::string msg = e.what();
    if (where == &app && !app.remaining().empty()) msg = "unknown subcommand '" + app.remaining().front() + "'";
    std::cerr << "error: " << msg << "\n\n" << help_for(where);
    return 2;
  }

  auto logger = spdlog::stderr_color_mt("uvmarvel");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << help_for(e.app);
    return 2;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    print_error_json(std::string(to_string(e.code())), e.what(), &e);
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    print_error_json("Internal", e.what());
    return 1;
  }
}
