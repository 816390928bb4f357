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

#include <gtest/gtest.h>

#include <random>
#include <tuple>

#include "test_paths.hpp"
#include "uvmarvel/error.hpp"
#include "uvmarvel/verilog_patcher.hpp"

namespace uvmarvel {
namespace {

using testing::data_dir;
using testing::design_files;
using testing::read_text;

DesignModel toy_model() {
  return parse_design(design_files("toy_sub", {"handshake.v", "fsm.v", "top.v"}), "toy_top");
}

DesignModel reparse(const FilteredDUT& dut, std::string_view top = {}) {
  std::vector<SourceInput> src;
  for (const auto& f : dut.files) src.push_back({f.path, f.text});
  return parse_sources(src, top);
}

DependencySlice slice_of(const DesignModel& m, const std::set<StatementId>& ids) {
  DependencySlice s;
  for (StatementId id : ids) s.statements_by_file[m.statement(id).module_name].insert(id);
  return s;
}

std::set<StatementId> subtree(const DesignModel& m, StatementId id) {
  std::set<StatementId> out{id};
  for (StatementId c : m.statement(id).children) {
    auto sub = subtree(m, c);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

using Shape = std::tuple<std::string, StatementKind, std::set<std::string>, std::set<std::string>>;

std::multiset<Shape> shapes(const DesignModel& m) {
  std::multiset<Shape> out;
  for (const auto& s : m.statements) {
    std::set<std::string> r, w;
    for (const auto& x : s.reads) r.insert(x.signal_name);
    for (const auto& x : s.writes) w.insert(x.signal_name);
    out.insert({s.module_name, s.kind, r, w});
  }
  return out;
}

std::size_t conserved(const FilteredDUT& dut) {
  std::set<StatementId> ids;
  for (const auto& f : dut.files) {
    for (const auto& p : f.provenance) ids.insert(p.statements.begin(), p.statements.end());
  }
  return ids.size();
}

std::size_t original_lines(const DesignModel& m) {
  std::size_t n = 0;
  for (const auto& f : m.files) n += static_cast<std::size_t>(std::count(f.source.begin(), f.source.end(), '\n'));
  return n;
}

TEST(PatchTemplates, BuiltinMatchesShippedFiles) {
  TemplateLibrary builtin = TemplateLibrary::builtin();
  TemplateLibrary shipped = TemplateLibrary::load_directory(data_dir() / "templates", false);
  ASSERT_EQ(shipped.kinds().size(), 5u);
  for (auto kind : builtin.kinds()) {
    EXPECT_EQ(builtin.get(kind).header_pattern, shipped.get(kind).header_pattern) << to_string(kind);
    EXPECT_EQ(builtin.get(kind).footer_pattern, shipped.get(kind).footer_pattern) << to_string(kind);
    EXPECT_EQ(builtin.get(kind).required_context, shipped.get(kind).required_context);
  }
}

TEST(PatchTemplates, InstantiationsParse) {
  TemplateLibrary lib = TemplateLibrary::builtin();
  const auto& shell = lib.get(ConstructKind::ModuleShell);
  const auto& always = lib.get(ConstructKind::AlwaysBlock);
  const auto& kase = lib.get(ConstructKind::CaseBlock);
  const auto& assign = lib.get(ConstructKind::ContinuousAssign);
  const auto& inst = lib.get(ConstructKind::InstanceConnection);
  std::map<std::string, std::string> sh = {
      {"module_name", "t"}, {"parameter_header", ""}, {"port_list", "  input clk, input [1:0] s, output reg q"}};
  std::string text = shell.render_header(sh) + "\n" +
                     always.render_header({{"sensitivity_list", "@(posedge clk)"}}) + "\n" +
                     kase.render_header({{"case_keyword", "case"}, {"case_selector", "s"}}) + "\n" +
                     "2'd1: q <= 1'b1;\n" +
                     kase.render_footer({{"default_item", "default: ;\n"}}) + "\n" +
                     always.render_footer({}) + "\n" + assign.render_header({}) + " " + "w = s[0]" +
                     assign.render_footer({}) + "\n" +
                     inst.render_header({{"child_module", "c"}, {"parameter_override", ""}, {"instance_name", "u"}}) +
                     "\n.a(q)\n" + inst.render_footer({}) + "\n" + shell.render_footer(sh) + "\n";
  DesignModel m = parse_sources({{"t.v", text}});
  std::vector<StatementKind> kinds;
  for (const auto& s : m.statements) kinds.push_back(s.kind);
  EXPECT_EQ(kinds, (std::vector<StatementKind>{StatementKind::AlwaysBlock, StatementKind::CaseBlock,
                                                StatementKind::CaseBranch, StatementKind::ProceduralAssign,
                                                StatementKind::CaseBranch, StatementKind::ContinuousAssign,
                                                StatementKind::InstanceConnection}));
}

TEST(PatchTemplates, ParseRejectsUnknownHoleAndSerializes) {
  EXPECT_THROW(parse_template("# construct: AlwaysBlock\n# required: x\n--- header\nalways {{x}}\n--- footer\nend\n",
                              "bad.vt"),
               Error);
  EXPECT_THROW(parse_template("# construct: Nope\n--- header\n--- footer\n", "bad.vt"), Error);
  auto t = TemplateLibrary::builtin().get(ConstructKind::CaseBlock);
  auto again = parse_template(serialize_template(t), "again");
  EXPECT_EQ(again.header_pattern, t.header_pattern);
  EXPECT_EQ(again.footer_pattern, t.footer_pattern);
}

TEST(VerilogPatcher, MissingTemplateIsReported) {
  DesignModel m = toy_model();
  TemplateLibrary lib = TemplateLibrary::builtin();
  lib.erase(ConstructKind::CaseBlock);
  try {
    patch(slice_of(m, {17}), m, lib);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TemplateMissing);
  }
}

TEST(VerilogPatcher, ClassifyFragment) {
  DesignModel m = toy_model();
  EXPECT_EQ(classify_fragment({21, 24}, m), ConstructKind::CaseBlock);
  EXPECT_EQ(classify_fragment({19}, m), ConstructKind::AlwaysBlock);
  EXPECT_EQ(classify_fragment({17}, m), ConstructKind::ContinuousAssign);
  EXPECT_EQ(classify_fragment({23}, m), ConstructKind::CaseBlock);
  EXPECT_EQ(classify_fragment({50, 51}, m), ConstructKind::InstanceConnection);
  EXPECT_EQ(classify_fragment({18}, m), ConstructKind::ModuleShell);
  EXPECT_THROW(classify_fragment({19, 36}, m), Error);
  EXPECT_THROW(classify_fragment({0, 17}, m), Error);
  try {
    classify_fragment({17, 19}, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MixedContext);
  }
}

TEST(VerilogPatcher, ReconstructSensitivity) {
  DesignModel m = toy_model();
  EXPECT_EQ(reconstruct_sensitivity({3}, m), "@(posedge clk or negedge rst_n)");
  // the header of fsm's state register sits on line 35 of the source
  std::string fsm = read_text(data_dir() / "designs/toy_sub/fsm.v");
  std::string line35 = [&] {
    std::istringstream in(fsm);
    std::string l;
    for (int i = 0; i < 35; ++i) std::getline(in, l);
    return l;
  }();
  std::string recovered = reconstruct_sensitivity({37}, m);
  EXPECT_NE(line35.find(recovered), std::string::npos) << recovered;
  EXPECT_EQ(reconstruct_sensitivity({19}, m), "@(*)");

  std::string src =
      "module s(input clk, input d, output reg q, output reg r, output reg p);\n"
      "  always @(posedge clk) p <= d;\n"
      "  always begin q = d; end\n"
      "  always begin r <= d; end\n"
      "endmodule\n";
  DesignModel s = parse_sources({{"s.v", src}}, "s");
  EXPECT_EQ(reconstruct_sensitivity({3}, s), "@(*)");
  EXPECT_EQ(reconstruct_sensitivity({5}, s), "@(posedge clk)");
}

TEST(VerilogPatcher, FullSliceIsIdentity) {
  DesignModel m = toy_model();
  std::set<StatementId> all;
  for (const auto& s : m.statements) all.insert(s.id);
  DependencySlice slice = slice_of(m, all);
  for (const auto& p : m.top()->ports) slice.entry_ports.insert(p.name);
  FilteredDUT dut = patch(slice, m);
  EXPECT_TRUE(dut.dropped_statements.empty());
  DesignModel again = reparse(dut, "toy_top");
  EXPECT_EQ(shapes(again), shapes(m));
  for (const auto& mod : m.modules) {
    const ModuleDef& r = again.module(mod.name);
    ASSERT_EQ(r.ports.size(), mod.ports.size()) << mod.name;
    for (const auto& p : mod.ports) {
      ASSERT_NE(r.find_port(p.name), nullptr);
      EXPECT_EQ(r.find_port(p.name)->direction, p.direction);
      EXPECT_EQ(r.find_port(p.name)->width, p.width);
    }
  }
  EXPECT_EQ(conserved(dut), all.size());
}

TEST(VerilogPatcher, TwoCaseBranchesRegainDefaultAndEndcase) {
  DesignModel m = toy_model();
  std::set<StatementId> ids = subtree(m, 21);
  auto more = subtree(m, 29);
  ids.insert(more.begin(), more.end());
  FilteredDUT dut = patch(slice_of(m, ids), m);
  ASSERT_EQ(dut.files.size(), 1u);
  const std::string& text = dut.files[0].text;
  EXPECT_NE(text.find("default: ;"), std::string::npos) << text;
  EXPECT_NE(text.find("endcase"), std::string::npos);
  EXPECT_NE(text.find("always @(*) begin"), std::string::npos);
  EXPECT_EQ(text.find("REQ:"), std::string::npos);
  DesignModel again = reparse(dut);
  int branches = 0, cases = 0;
  for (const auto& s : again.statements) {
    branches += s.kind == StatementKind::CaseBranch;
    cases += s.kind == StatementKind::CaseBlock;
  }
  EXPECT_EQ(cases, 1);
  EXPECT_EQ(branches, 3);  // two kept plus the injected default
  EXPECT_EQ(conserved(dut), ids.size());
}

TEST(VerilogPatcher, HandshakeSliceIsStable) {
  DesignModel m = toy_model();
  SeedSet seeds;
  seeds.signals.insert({"handshake", "ack", {}});
  DependencySlice slice = trace_cross_file(seeds, m);
  FilteredDUT dut = patch(slice, m);
  EXPECT_TRUE(dut.dropped_statements.empty());
  EXPECT_EQ(conserved(dut), slice.size());
  DesignModel filtered = reparse(dut, "toy_top");
  DependencySlice again = trace_cross_file(seeds, filtered);
  EXPECT_EQ(again.size(), slice.size());
  EXPECT_EQ(again.entry_ports, slice.entry_ports);
  EXPECT_LE(dut.line_count(), original_lines(m));
  const FilteredFile* top = dut.find("toy_top");
  ASSERT_NE(top, nullptr);
  EXPECT_NE(top->text.find(".clk(clk)"), std::string::npos);
}

TEST(VerilogPatcher, ProvenancePointsAtOriginalLines) {
  DesignModel m = toy_model();
  FilteredDUT dut = patch(slice_of(m, subtree(m, 38)), m);
  std::map<std::string, std::vector<std::string>> sources;
  for (const auto& f : m.files) {
    std::istringstream in(f.source);
    std::string l;
    while (std::getline(in, l)) sources[f.path].push_back(l);
  }
  for (const auto& f : dut.files) {
    std::istringstream in(f.text);
    std::string l;
    std::size_t i = 0;
    while (std::getline(in, l)) {
      const auto& p = f.provenance.at(i++);
      if (p.statements.empty()) continue;
      // a line that carries statements is copied from its origin
      std::string orig = sources[p.file].at(static_cast<std::size_t>(p.line - 1));
      auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
        return s;
      };
      EXPECT_EQ(strip(l), strip(orig));
    }
    EXPECT_EQ(i, f.provenance.size());
  }
}

TEST(VerilogPatcher, TruncationKeepsShell) {
  DesignModel m = toy_model();
  std::set<StatementId> all;
  for (const auto& s : m.statements) all.insert(s.id);
  FilteredDUT dut = patch(slice_of(m, all), m);
  const FilteredFile* fsm = dut.find("fsm");
  ASSERT_NE(fsm, nullptr);
  ASSERT_GT(fsm->body_chunks.size(), 2u);
  std::string cut = fsm->truncated(1);
  EXPECT_NO_THROW(parse_sources({{"fsm.v", cut}}));
  EXPECT_LT(cut.size(), fsm->text.size());
}

// random sub-slices of every corpus design
TEST(VerilogPatcher, RandomSubSlicesHoldInvariants) {
  std::vector<std::string> designs;
  for (const auto& e : std::filesystem::directory_iterator(data_dir() / "designs")) {
    designs.push_back(e.path().filename().string());
  }
  std::sort(designs.begin(), designs.end());
  std::mt19937 rng(20260);
  for (const auto& d : designs) {
    auto files = testing::all_design_files(d);
    auto top_file = data_dir() / "designs" / d / "TOP";
    std::string top = std::filesystem::exists(top_file) ? read_text(top_file) : "";
    top.erase(std::remove_if(top.begin(), top.end(), ::isspace), top.end());
    ASSERT_FALSE(top.empty()) << d;
    DesignModel m = parse_design(files, top);
    for (int trial = 0; trial < 12; ++trial) {
      std::set<StatementId> ids;
      std::size_t want = 1 + rng() % std::max<std::size_t>(1, m.statements.size() / 3);
      while (ids.size() < want) ids.insert(static_cast<StatementId>(rng() % m.statements.size()));
      DependencySlice slice = slice_of(m, ids);
      FilteredDUT dut;
      ASSERT_NO_THROW(dut = patch(slice, m)) << d << " trial " << trial;
      EXPECT_EQ(conserved(dut) + dut.dropped_statements.size(), ids.size());
      EXPECT_TRUE(dut.dropped_statements.empty());
      EXPECT_LE(dut.line_count(), original_lines(m)) << d;
      // re-patching the traced filtered design does not grow it
      DesignModel f = reparse(dut);
      std::set<StatementId> all;
      for (const auto& s : f.statements) all.insert(s.id);
      FilteredDUT second = patch(slice_of(f, all), f);
      EXPECT_EQ(shapes(reparse(second)), shapes(f)) << d;
    }
  }
}

}  // namespace
}  // namespace uvmarvel
