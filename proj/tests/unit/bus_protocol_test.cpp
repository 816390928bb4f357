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

#include "test_paths.hpp"
#include "uvmarvel/bus_protocol.hpp"
#include "uvmarvel/error.hpp"

namespace uvmarvel {
namespace {

namespace fs = std::filesystem;
using testing::data_dir;

const SkeletonLibrary& library() {
  static const SkeletonLibrary lib = SkeletonLibrary::load(data_dir() / "protocols");
  return lib;
}

IRDocument pwrctrl_ir() { return parse_ir(data_dir() / "ir" / "pwrctrl.ir"); }

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no uvmarvel::Error thrown";
  return Error(ErrorCode::InvalidArgument, "none");
}

// Scratch copy of the shipped library that a test may damage.
class ScratchLibrary {
 public:
  explicit ScratchLibrary(const std::string& name) : dir_(fs::temp_directory_path() / ("uvm_lib_" + name)) {
    fs::remove_all(dir_);
    fs::copy(data_dir() / "protocols", dir_, fs::copy_options::recursive);
  }
  ~ScratchLibrary() { fs::remove_all(dir_); }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
};

TEST(SkeletonLibrary, ShippedLibraryIsComplete) {
  const auto& lib = library();
  EXPECT_EQ(lib.protocols(), (std::vector<Protocol>{Protocol::APB, Protocol::AHB, Protocol::AXI, Protocol::PChannel,
                                                     Protocol::QChannel}));
  for (auto p : lib.protocols()) {
    for (auto k : {ComponentKind::Interface, ComponentKind::Driver, ComponentKind::Monitor, ComponentKind::Agent}) {
      const Skeleton& sk = lib.get(p, k);
      SCOPED_TRACE(sk.id());
      std::string concat;
      std::set<std::string> ids;
      for (const auto& r : sk.regions) {
        concat += r.text;
        EXPECT_TRUE(ids.insert(r.id).second);
      }
      EXPECT_EQ(concat, sk.body);
      EXPECT_FALSE(sk.editable().empty());
      for (const auto* r : sk.editable()) EXPECT_TRUE(r->hint.has_value()) << r->id;
      EXPECT_TRUE(verify_frozen_regions(sk, sk.body).empty());
    }
  }
  ASSERT_NE(lib.env(), nullptr);
  EXPECT_EQ(lib.env()->id(), "common/env");
}

TEST(SkeletonLibrary, IncompleteOrExtraSkeletonsAreRejected) {
  {
    ScratchLibrary s("missing");
    fs::remove(s.dir() / "ahb" / "monitor.svt");
    EXPECT_EQ(error_of([&] { SkeletonLibrary::load(s.dir()); }).code(), ErrorCode::LibraryInvalid);
  }
  {
    ScratchLibrary s("extra");
    fs::copy_file(s.dir() / "apb" / "driver.svt", s.dir() / "apb" / "scoreboard.svt");
    EXPECT_EQ(error_of([&] { SkeletonLibrary::load(s.dir()); }).code(), ErrorCode::LibraryInvalid);
  }
  {
    ScratchLibrary s("unknown");
    fs::create_directory(s.dir() / "pcie");
    EXPECT_EQ(error_of([&] { SkeletonLibrary::load(s.dir()); }).code(), ErrorCode::LibraryInvalid);
  }
}

TEST(SkeletonParse, MarkerErrors) {
  const char* bad[] = {
      "a\n//<<EDIT x hint>>\nb\n",                              // never closed
      "a\n//<<END x>>\n",                                       // stray END
      "//<<EDIT x h>>\n//<<EDIT y h>>\n//<<END y>>\n//<<END x>>\n",  // nested
      "//<<EDIT x h>>\n//<<END x>>\n//<<EDIT x h>>\n//<<END x>>\n",  // duplicate id
      "//<<EDIT F1 h>>\n//<<END F1>>\n",                        // reserved id
      "//<<EDIT x h>>\n//<<END y>>\n",                          // mismatched END
      "//<<EDIT x h>\n",                                        // malformed marker
  };
  for (const char* text : bad) {
    EXPECT_EQ(error_of([&] { parse_skeleton(text, Protocol::APB, ComponentKind::Driver); }).code(),
              ErrorCode::LibraryInvalid)
        << text;
  }
}

TEST(SkeletonParse, RegionsAlternateAndCarryMarkers) {
  auto sk = parse_skeleton("head\n//<<EDIT a fill me>>\ndefault\n//<<END a>>\ntail\n", Protocol::APB,
                           ComponentKind::Agent);
  ASSERT_EQ(sk.regions.size(), 3u);
  EXPECT_EQ(sk.regions[0].text, "head\n//<<EDIT a fill me>>\n");
  EXPECT_EQ(sk.regions[1].id, "a");
  EXPECT_EQ(sk.regions[1].text, "default\n");
  EXPECT_EQ(sk.regions[1].hint, "fill me");
  EXPECT_EQ(sk.regions[2].text, "//<<END a>>\ntail\n");
  EXPECT_EQ(assemble(sk, {{"a", "x\ny\n"}}), "head\n//<<EDIT a fill me>>\nx\ny\n//<<END a>>\ntail\n");
}

TEST(SelectSkeletons, OneApbInterface) {
  auto sel = select_skeletons(pwrctrl_ir(), library());
  ASSERT_EQ(sel.size(), 4u);
  std::vector<std::string> ids;
  for (const auto& s : sel) {
    ids.push_back(s.skeleton->id());
    EXPECT_EQ(s.interface_name, "apb0");
  }
  EXPECT_EQ(ids, (std::vector<std::string>{"apb/interface", "apb/driver", "apb/monitor", "apb/agent"}));
}

TEST(SelectSkeletons, NoInterfacesAndAdditivity) {
  IRDocument empty;
  empty.module_name = "m";
  EXPECT_TRUE(select_skeletons(empty, library()).empty());

  auto doc = pwrctrl_ir();
  InterfaceDesc axi;
  axi.name = "mem";
  axi.protocol = Protocol::AXI;
  doc.interfaces.push_back(axi);
  auto sel = select_skeletons(doc, library());
  ASSERT_EQ(sel.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(*sel[i].skeleton->protocol, i < 4 ? Protocol::APB : Protocol::AXI);
  }
}

TEST(SelectSkeletons, CustomWarnsAndMissingProtocolThrows) {
  auto doc = pwrctrl_ir();
  doc.interfaces[0].protocol = Protocol::Custom;
  std::vector<IRFinding> warnings;
  EXPECT_TRUE(select_skeletons(doc, library(), &warnings).empty());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].severity, Severity::Warning);

  ScratchLibrary s("noaxi");
  fs::remove_all(s.dir() / "apb");
  auto lib = SkeletonLibrary::load(s.dir());
  EXPECT_EQ(error_of([&] { select_skeletons(pwrctrl_ir(), lib); }).code(), ErrorCode::ProtocolUnsupported);
}

TEST(VerifyFrozen, AnyEditableFillsAreAccepted) {
  const Skeleton& sk = library().get(Protocol::APB, ComponentKind::Driver);
  std::map<std::string, std::string> fills;
  for (const auto* r : sk.editable()) fills[r->id] = "  // anything " + r->id + "\n  //<<END nonsense>>\n";
  fills["checks"] = "";
  EXPECT_TRUE(verify_frozen_regions(sk, assemble(sk, fills)).empty());
}

TEST(VerifyFrozen, DeletedFrozenLine) {
  const Skeleton& sk = library().get(Protocol::APB, ComponentKind::Driver);
  const std::string line = "    vif.drv_cb.penable <= 1'b1;\n";
  std::string out = sk.body;
  auto at = out.find(line);
  ASSERT_NE(at, std::string::npos);
  out.erase(at, line.size());
  std::string owner;
  for (const auto* r : sk.frozen()) {
    if (r->text.find(line) != std::string::npos) owner = r->id;
  }
  EXPECT_EQ(verify_frozen_regions(sk, out), std::vector<std::string>{owner});
}

TEST(VerifyFrozen, SwappedFrozenBlocksReportBoth) {
  const Skeleton& sk = library().get(Protocol::APB, ComponentKind::Interface);
  auto f = sk.frozen();
  ASSERT_EQ(f.size(), 3u);
  auto e = sk.editable();
  std::string out = f[0]->text + e[0]->text + f[2]->text + e[1]->text + f[1]->text;
  EXPECT_EQ(verify_frozen_regions(sk, out), (std::vector<std::string>{"F1", "F2"}));
}

TEST(VerifyFrozen, TextOutsideTheFrozenFrame) {
  const Skeleton& sk = library().get(Protocol::QChannel, ComponentKind::Agent);
  EXPECT_EQ(verify_frozen_regions(sk, "// preface\n" + sk.body), std::vector<std::string>{"F0"});
  auto tail = verify_frozen_regions(sk, sk.body + "// trailer\n");
  EXPECT_EQ(tail, std::vector<std::string>{sk.frozen().back()->id});
}

// Freeze soundness over random outputs: whatever is accepted reassembles
// exactly from the extracted fills.
TEST(VerifyFrozen, FreezeSoundnessProperty) {
  std::mt19937 rng(7);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<const Skeleton*> all;
  for (auto p : library().protocols()) {
    for (auto k : {ComponentKind::Interface, ComponentKind::Driver, ComponentKind::Monitor, ComponentKind::Agent}) {
      all.push_back(&library().get(p, k));
    }
  }
  int accepted = 0, rejected = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const Skeleton& sk = *all[pick(all.size())];
    std::map<std::string, std::string> fills;
    for (const auto* r : sk.editable()) {
      // fills may even quote frozen text
      std::string fill = pick(4) == 0 ? sk.frozen()[pick(sk.frozen().size())]->text : "  x" + std::to_string(trial) + ";\n";
      fills[r->id] = fill;
    }
    std::string out = assemble(sk, fills);
    int mutation = static_cast<int>(pick(4));
    if (mutation == 1) {
      out.erase(pick(out.size()), 1);
    } else if (mutation == 2) {
      out.insert(pick(out.size() + 1), "Z");
    }
    auto violated = verify_frozen_regions(sk, out);
    if (violated.empty()) {
      ++accepted;
      auto got = extract_fills(sk, out);
      ASSERT_TRUE(got.has_value());
      EXPECT_EQ(assemble(sk, *got), out) << sk.id();
    } else {
      ++rejected;
      EXPECT_FALSE(extract_fills(sk, out).has_value());
    }
    if (mutation == 0 || mutation == 3) EXPECT_TRUE(violated.empty()) << sk.id() << " trial " << trial;
  }
  EXPECT_GT(accepted, 100);
  EXPECT_GT(rejected, 50);
}

TEST(ExtractCodeBlock, FencesAndFallback) {
  EXPECT_EQ(extract_code_block("intro\n```systemverilog\na\nb\n```\nouttro"), "a\nb\n");
  EXPECT_EQ(extract_code_block("no fence"), "no fence");
  EXPECT_EQ(extract_code_block("```\nx ``` y\n```"), "x ``` y\n");
}

TEST(Specialize, EchoFillsKeepFrozenRegions) {
  const Skeleton& sk = library().get(Protocol::APB, ComponentKind::Driver);
  auto doc = pwrctrl_ir();
  std::map<std::string, std::string> echo;
  for (const auto* r : sk.editable()) echo[r->id] = "  // " + r->hint.value_or("") + "\n";
  FunctionClient llm([&](const std::string&) { return "```\n" + assemble(sk, echo) + "```\n"; }, "echo");
  auto out = specialize(sk, doc, doc.interfaces[0], llm);
  EXPECT_EQ(out.attempts, 1);
  EXPECT_EQ(out.region_fills, echo);
  EXPECT_EQ(out.output_text, assemble(sk, echo));
  EXPECT_EQ(out.skeleton_id, "apb/driver");
  // frozen regions byte-for-byte
  std::size_t pos = 0;
  for (const auto* r : sk.frozen()) {
    auto at = out.output_text.find(r->text, pos);
    ASSERT_NE(at, std::string::npos) << r->id;
    pos = at + r->text.size();
  }
}

TEST(Specialize, AdversarialClientExhaustsAttempts) {
  const Skeleton& sk = library().get(Protocol::APB, ComponentKind::Driver);
  auto doc = pwrctrl_ir();
  std::string tampered = sk.body;
  const std::string line = "vif.drv_cb.penable <= 1'b1;";
  tampered.replace(tampered.find(line), line.size(), "vif.drv_cb.penable <= 1'b0;");
  std::vector<std::string> prompts;
  FunctionClient llm(
      [&](const std::string& p) {
        prompts.push_back(p);
        return tampered;
      },
      "adversary");
  auto e = error_of([&] { specialize(sk, doc, doc.interfaces[0], llm); });
  EXPECT_EQ(e.code(), ErrorCode::FrozenRegionViolation);
  ASSERT_EQ(prompts.size(), 3u);
  EXPECT_EQ(e.details().size(), 1u);
  EXPECT_EQ(prompt_key(prompts[0]), "specialize:apb:driver:apb0:1");
  EXPECT_EQ(prompt_key(prompts[2]), "specialize:apb:driver:apb0:3");
  EXPECT_EQ(prompts[0].find("Rejected attempts"), std::string::npos);
  EXPECT_NE(prompts[1].find("Rejected attempts"), std::string::npos);
  EXPECT_NE(prompts[2].find("attempt 2 changed frozen region(s): " + e.details()[0]), std::string::npos);
}

TEST(Specialize, RepairedOnSecondAttempt) {
  const Skeleton& sk = library().get(Protocol::AXI, ComponentKind::Driver);
  IRDocument doc;
  doc.module_name = "dma";
  doc.interfaces.push_back({"mem", Protocol::AXI, InterfaceRole::Manager, {}, {}, {}});
  int calls = 0;
  FunctionClient llm([&](const std::string&) { return ++calls == 1 ? std::string("garbage") : sk.body; }, "fixer");
  auto out = specialize(sk, doc, doc.interfaces[0], llm);
  EXPECT_EQ(out.attempts, 2);
  EXPECT_EQ(out.output_text, sk.body);
}

TEST(Specialize, ScriptedPwrctrlDriverUsesFixtureSignals) {
  const Skeleton& sk = library().get(Protocol::APB, ComponentKind::Driver);
  auto doc = pwrctrl_ir();
  auto run = [&] {
    auto llm = ScriptedClient::from_file(data_dir() / "scenarios" / "specialize_pwrctrl.json", "a");
    return specialize(sk, doc, doc.interfaces[0], *llm);
  };
  auto out = run();
  std::string all_fills;
  for (const auto& [id, text] : out.region_fills) all_fills += text;
  for (const char* name : {"psel", "penable", "pwrite", "paddr", "pwdata", "prdata", "pready"}) {
    EXPECT_NE(all_fills.find(name), std::string::npos) << name;
  }
  EXPECT_NE(out.region_fills.at("item_constraints").find("8'h14"), std::string::npos);
  EXPECT_EQ(run().output_text, out.output_text);  // determinism
}

TEST(Specialize, UnavailableClientPropagates) {
  const Skeleton& sk = library().get(Protocol::APB, ComponentKind::Monitor);
  auto doc = pwrctrl_ir();
  ScriptedClient empty({}, "silent");
  EXPECT_EQ(error_of([&] { specialize(sk, doc, doc.interfaces[0], empty); }).code(), ErrorCode::LlmUnavailable);
}

TEST(Specialize, PromptCarriesInterfaceAndSkeleton) {
  const Skeleton& sk = library().get(Protocol::APB, ComponentKind::Interface);
  auto doc = pwrctrl_ir();
  std::string p = build_specialize_prompt(sk, doc, doc.interfaces[0], 1, "");
  EXPECT_EQ(prompt_key(p), "specialize:apb:interface:apb0:1");
  EXPECT_NE(p.find("signal paddr input width=8 role=addr"), std::string::npos);
  EXPECT_NE(p.find("TIMER offset=0x10 reset=0x10 width=16 access=RW"), std::string::npos);
  EXPECT_NE(p.find(sk.body), std::string::npos);
  EXPECT_NE(p.find("- signals: one declaration per IR signal"), std::string::npos);
}

}  // namespace
}  // namespace uvmarvel
