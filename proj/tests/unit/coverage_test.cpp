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
#include "uvmarvel/coverage.hpp"
#include "uvmarvel/error.hpp"
#include "uvmarvel/json_io.hpp"

namespace uvmarvel {

void PrintTo(const CoverageItem& i, std::ostream* os) { *os << dump_json(to_json(i)); }

namespace {

using testing::data_dir;
using testing::design_files;
using testing::fixture_dir;
using testing::read_text;

DesignModel toy_model() {
  return parse_design(design_files("toy_sub", {"handshake.v", "fsm.v", "top.v"}), "toy_top");
}

CoverageReport fixture_report() { return parse_report(data_dir() / "coverage" / "toy_sub.cov"); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no uvmarvel::Error thrown";
  return ErrorCode::InvalidArgument;
}

std::set<std::string> seed_names(const SeedSet& s) {
  std::set<std::string> out;
  for (const auto& r : s.signals) out.insert(r.signal_name);
  return out;
}

TEST(CoverageParse, SingleUncoveredLineItem) {
  auto r = parse_report_text("# uvmarvel-coverage v1\nLINE\tUNCOVERED\ttop.u_fsm\tfsm.v:42\t-\n");
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].category, CoverageCategory::Line);
  EXPECT_EQ(r.items[0].status, CoverageStatus::Uncovered);
  EXPECT_EQ(r.items[0].hierarchical_name, "top.u_fsm");
  EXPECT_EQ(r.items[0].source, (SourceLocation{"fsm.v", 42}));
  EXPECT_FALSE(r.items[0].expression);
  EXPECT_EQ(r.items[0].id, 1u);
}

TEST(CoverageParse, EmptyBodyHasNoItemsAndNoScore) {
  auto r = parse_report_text("# uvmarvel-coverage v1\n# run_label: empty\n");
  EXPECT_TRUE(r.items.empty());
  EXPECT_EQ(r.run_label, "empty");
  EXPECT_EQ(code_of([&] { compute_score(r); }), ErrorCode::NoItems);
}

TEST(CoverageParse, FixtureMatchesJsonTwin) {
  auto r = fixture_report();
  EXPECT_EQ(r.items.size(), 20u);
  EXPECT_EQ(r.malformed_items, 0u);
  EXPECT_EQ(dump_json(to_json(r)), read_text(data_dir() / "coverage" / "toy_sub.json"));
}

TEST(CoverageParse, HtmlDialectMatchesJsonTwin) {
  auto r = parse_report(data_dir() / "coverage" / "toy_sub.html");
  EXPECT_EQ(dump_json(to_json(r)), read_text(data_dir() / "coverage" / "toy_sub.json"));
}

TEST(CoverageParse, JsonTwinParsesBack) {
  auto r = parse_report(data_dir() / "coverage" / "toy_sub.json");
  EXPECT_EQ(r.items, fixture_report().items);
}

TEST(CoverageParse, MalformedItemsAreSkippedAndCounted) {
  std::string text =
      "# uvmarvel-coverage v1\n"
      "LINE\tPARTIAL\ttop.u\ta.v:3\t-\n"         // a line is hit or not
      "BRANCH\tCOVERED\ttop.u\ta.v\tx\n"         // no line number
      "BOGUS\tCOVERED\ttop.u\ta.v:4\t-\n"
      "TOGGLE\tUNCOVERED\ttop.u\ta.v:5\tsig\n";
  auto r = parse_report_text(text, "bad.cov");
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].expression, "sig");
  EXPECT_EQ(r.malformed_items, 3u);
  ASSERT_EQ(r.warnings.size(), 3u);
  EXPECT_NE(r.warnings[0].find("bad.cov:2"), std::string::npos);
}

TEST(CoverageParse, UnknownFormatIsRejected) {
  EXPECT_EQ(code_of([] { parse_report_text("hello world\n"); }), ErrorCode::UnrecognizedFormat);
  EXPECT_EQ(code_of([] { parse_report_text("<html><table><tr><td>x</td></tr></table></html>"); }),
            ErrorCode::UnrecognizedFormat);
  EXPECT_EQ(code_of([] { parse_report("/nonexistent/report.cov"); }), ErrorCode::FileNotReadable);
}

TEST(CoverageScore, OneOfTwoLines) {
  auto r = parse_report_text(
      "# uvmarvel-coverage v1\nLINE\tCOVERED\tt\ta.v:1\t-\nLINE\tUNCOVERED\tt\ta.v:2\t-\n");
  auto s = compute_score(r);
  EXPECT_DOUBLE_EQ(s.per_category.at(CoverageCategory::Line), 50.0);
  EXPECT_DOUBLE_EQ(s.score, 50.0);
  EXPECT_EQ(s.per_category.size(), 1u);
}

TEST(CoverageScore, AllCovered) {
  auto r = fixture_report();
  for (auto& i : r.items) i.status = CoverageStatus::Covered;
  auto s = compute_score(r);
  EXPECT_DOUBLE_EQ(s.score, 100.0);
  for (const auto& [c, v] : s.per_category) EXPECT_DOUBLE_EQ(v, 100.0) << to_string(c);
}

TEST(CoverageScore, FixtureHandArithmetic) {
  // LINE 4/5, BRANCH 3/5, CONDITION 2/2, TOGGLE 4/8 -> (80+60+100+50)/4
  auto r = fixture_report();
  EXPECT_DOUBLE_EQ(r.score, 72.50);
  EXPECT_DOUBLE_EQ(r.per_category_scores.at(CoverageCategory::Line), 80.0);
  EXPECT_DOUBLE_EQ(r.per_category_scores.at(CoverageCategory::Branch), 60.0);
  EXPECT_DOUBLE_EQ(r.per_category_scores.at(CoverageCategory::Condition), 100.0);
  EXPECT_DOUBLE_EQ(r.per_category_scores.at(CoverageCategory::Toggle), 50.0);
}

TEST(CoverageScore, PartialCountsAsUncoveredAndExclusionsShrinkDenominator) {
  auto r = parse_report_text(
      "# uvmarvel-coverage v1\nBRANCH\tPARTIAL\tt\ta.v:1\tx\nBRANCH\tCOVERED\tt\ta.v:2\ty\n"
      "BRANCH\tUNCOVERED\tt\ta.v:3\tz\n");
  EXPECT_DOUBLE_EQ(compute_score(r).score, 33.33);
  EXPECT_DOUBLE_EQ(compute_score(r, {1}).score, 50.0);
  EXPECT_DOUBLE_EQ(compute_score(r, {1, 3}).score, 100.0);
}

TEST(CoverageScore, FunctionalItemsAreReportedButNotScored) {
  auto r = parse_report_text(
      "# uvmarvel-coverage v1\nFUNCTIONAL\tUNCOVERED\tt.cg\tenv.sv:9\tcp_len\nLINE\tCOVERED\tt\ta.v:1\t-\n");
  EXPECT_EQ(r.items.size(), 2u);
  EXPECT_DOUBLE_EQ(r.score, 100.0);
  EXPECT_FALSE(r.per_category_scores.count(CoverageCategory::Functional));
}

// Hand grouping of the fixture's seven uncovered items, source-ordered.
TEST(CoverageExtract, FixtureGroupingWithDesign) {
  auto model = toy_model();
  auto r = fixture_report();
  auto s = extract_uncovered(r, 10, &model);
  ASSERT_EQ(s.groups.size(), 4u);
  auto check = [&](std::size_t g, CoverageCategory c, const std::string& m, std::vector<std::uint32_t> ids) {
    SCOPED_TRACE(g);
    EXPECT_EQ(s.groups[g].category, c);
    EXPECT_EQ(s.groups[g].module, m);
    EXPECT_EQ(s.groups[g].item_ids, ids);
    EXPECT_EQ(s.groups[g].omitted, 0u);
  };
  check(0, CoverageCategory::Line, "fsm", {3});
  check(1, CoverageCategory::Branch, "fsm", {7, 8});
  check(2, CoverageCategory::Toggle, "fsm", {20, 19});
  check(3, CoverageCategory::Toggle, "handshake", {16, 15});
  EXPECT_EQ(s.total_items(), 7u);
}

TEST(CoverageExtract, WithoutDesignGroupsByHierarchy) {
  auto s = extract_uncovered(fixture_report(), 10);
  ASSERT_EQ(s.groups.size(), 4u);
  EXPECT_EQ(s.groups[3].module, "toy_top.u_hs");
}

TEST(CoverageExtract, AllCoveredIsEmpty) {
  auto r = fixture_report();
  for (auto& i : r.items) i.status = CoverageStatus::Covered;
  EXPECT_TRUE(extract_uncovered(r, 5).groups.empty());
}

TEST(CoverageExtract, BudgetTruncatesWithAnnotation) {
  auto r = parse_report_text(
      "# uvmarvel-coverage v1\nTOGGLE\tUNCOVERED\tt.u\ta.v:9\tc\nTOGGLE\tUNCOVERED\tt.u\ta.v:1\ta\n"
      "TOGGLE\tPARTIAL\tt.u\ta.v:5\tb\n");
  auto s = extract_uncovered(r, 1);
  ASSERT_EQ(s.groups.size(), 1u);
  EXPECT_EQ(s.groups[0].item_ids, std::vector<std::uint32_t>{2});
  EXPECT_EQ(s.groups[0].omitted, 2u);
  std::string text = s.render_text(r);
  EXPECT_NE(text.find("+2 more"), std::string::npos);
  EXPECT_EQ(text.find('<'), std::string::npos);
  EXPECT_EQ(code_of([&] { extract_uncovered(r, 0); }), ErrorCode::InvalidArgument);
}

TEST(CoverageExtract, HtmlInputRendersWithoutMarkup) {
  auto r = parse_report(data_dir() / "coverage" / "toy_sub.html");
  std::string text = extract_uncovered(r, 3).render_text(r);
  for (const char* tag : {"<td", "</", "<span", "&amp;", "href", "<code"}) EXPECT_EQ(text.find(tag), std::string::npos) << tag;
}

TEST(CoverageSeeds, ToggleYieldsToggledSignal) {
  CoverageItem item{1, CoverageCategory::Toggle, "top.u_arb", {"arb.v", 3}, CoverageStatus::Uncovered, "grant", {}};
  EXPECT_EQ(seed_names(seed_signals(item, nullptr)), (std::set<std::string>{"grant"}));
}

TEST(CoverageSeeds, ConditionYieldsEveryIdentifier) {
  CoverageItem item{1, CoverageCategory::Condition, "top.u", {"a.v", 3}, CoverageStatus::Partial, "(req && !busy)", {}};
  EXPECT_EQ(seed_names(seed_signals(item, nullptr)), (std::set<std::string>{"busy", "req"}));
}

// Oracle: the innermost statement covering fsm.v:39 in the hand-annotated
// model fixture.
TEST(CoverageSeeds, LineItemMatchesAnnotatedStatement) {
  auto golden = Json::parse(read_text(fixture_dir() / "toy_sub_model.golden.json"));
  std::set<std::string> expected;
  int best = -1;
  for (const auto& g : golden["statements"]) {
    if (g["module"] != "fsm" || g["line_start"].get<int>() > 39 || g["line_end"].get<int>() < 39) continue;
    if (g["id"].get<int>() < best) continue;
    best = g["id"].get<int>();
    expected.clear();
    for (const auto& n : g["reads"]) expected.insert(n.get<std::string>());
    for (const auto& n : g["writes"]) expected.insert(n.get<std::string>());
  }
  ASSERT_EQ(expected, (std::set<std::string>{"next_state", "state"}));
  auto model = toy_model();
  CoverageItem item{1, CoverageCategory::Line, "toy_top.u_fsm", {"fsm.v", 39}, CoverageStatus::Uncovered, {}, {}};
  auto seeds = seed_signals(item, &model);
  EXPECT_EQ(seed_names(seeds), expected);
  for (const auto& r : seeds.signals) EXPECT_EQ(r.module_name, "fsm");
}

TEST(CoverageSeeds, FixtureItemsResolveAgainstDesign) {
  auto model = toy_model();
  auto r = fixture_report();
  EXPECT_EQ(seed_names(seed_signals(*r.find(7), &model)), (std::set<std::string>{"beat_cnt"}));
  EXPECT_EQ(seed_names(seed_signals(*r.find(16), &model)), (std::set<std::string>{"idle"}));
  EXPECT_EQ(seed_names(seed_signals(*r.find(8), &model)), (std::set<std::string>{"state"}));  // XFER is a constant
}

TEST(CoverageSeeds, Errors) {
  auto model = toy_model();
  CoverageItem ghost{1, CoverageCategory::Toggle, "toy_top.u_fsm", {"fsm.v", 3}, CoverageStatus::Uncovered, "ghost", {}};
  EXPECT_EQ(code_of([&] { seed_signals(ghost, &model); }), ErrorCode::NoSeedsFound);
  CoverageItem blank{2, CoverageCategory::Line, "toy_top.u_fsm", {"fsm.v", 1}, CoverageStatus::Uncovered, {}, {}};
  EXPECT_EQ(code_of([&] { seed_signals(blank, &model); }), ErrorCode::NoSeedsFound);
  CoverageItem nowhere{3, CoverageCategory::Toggle, "toy_top.u_nope", {"nope.v", 3}, CoverageStatus::Uncovered, "x", {}};
  EXPECT_EQ(code_of([&] { seed_signals(nowhere, &model); }), ErrorCode::NoSeedsFound);
  CoverageItem done{4, CoverageCategory::Toggle, "toy_top.u_fsm", {"fsm.v", 3}, CoverageStatus::Covered, "state", {}};
  EXPECT_EQ(code_of([&] { seed_signals(done, &model); }), ErrorCode::InvalidArgument);
}

TEST(CoverageMerge, StatusesOnlyGoUp) {
  auto base = fixture_report();
  auto delta = fixture_report();
  delta.items[2].status = CoverageStatus::Covered;     // fsm.v:49
  delta.items[0].status = CoverageStatus::Uncovered;   // would regress, ignored
  delta.items[6].status = CoverageStatus::Partial;     // fsm.v:30 upgraded to partial
  auto improved = merge_upward(base, delta);
  EXPECT_EQ(improved, (std::vector<std::uint32_t>{3, 7}));
  EXPECT_EQ(base.items[0].status, CoverageStatus::Covered);
  EXPECT_DOUBLE_EQ(base.per_category_scores.at(CoverageCategory::Line), 100.0);
}

// ---- properties over generated reports ----

class ReportGen {
 public:
  explicit ReportGen(unsigned seed) : rng_(seed) {}

  CoverageReport generate() {
    CoverageReport r;
    r.run_label = "run " + word();
    int n = pick(1, 40);
    for (int k = 0; k < n; ++k) {
      CoverageItem i;
      i.category = static_cast<CoverageCategory>(pick(0, 4));
      int st = pick(0, 2);
      if (i.category == CoverageCategory::Line && st == 2) st = 1;
      i.status = static_cast<CoverageStatus>(st);
      i.hierarchical_name = "top.u_" + word();
      i.source = {word() + ".v", pick(1, 500)};
      if (pick(0, 3)) i.expression = expression();
      if (!pick(0, 3)) i.detail = expression();
      r.items.push_back(i);
    }
    if (std::none_of(r.items.begin(), r.items.end(), [](auto& i) { return counts_toward_score(i.category); })) {
      r.items[0].category = CoverageCategory::Toggle;
    }
    r.normalize();
    return r;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::string word() {
    static const char* words[] = {"fsm", "arb", "fifo", "ctl", "dma", "x"};
    return words[pick(0, 5)];
  }
  // Includes the characters the normalized format has to escape.
  std::string expression() {
    static const char* parts[] = {"a", "&&", "!b", "\t", "\\", "-", "\n", "c[3:0]", " ", "x == 4'd7"};
    std::string e;
    int n = pick(1, 4);
    for (int k = 0; k < n; ++k) e += parts[pick(0, 9)];
    return e;
  }
  std::mt19937 rng_;
};

TEST(CoverageProperties, NormalizedRoundTripIsIdentity) {
  for (unsigned seed = 1; seed <= 200; ++seed) {
    auto r = ReportGen(seed).generate();
    auto back = parse_report_text(serialize_report(r));
    SCOPED_TRACE(seed);
    EXPECT_EQ(back.items, r.items);
    EXPECT_EQ(back.run_label, r.run_label);
    EXPECT_EQ(back.score, r.score);
    EXPECT_EQ(back.per_category_scores, r.per_category_scores);
    EXPECT_EQ(back.malformed_items, 0u);
  }
}

// HTML cell text is whitespace-insensitive at its edges and "-" marks an
// empty cell, so compare against that canonical form.
std::vector<CoverageItem> html_canonical(std::vector<CoverageItem> items) {
  auto canon = [](std::optional<std::string>& v) {
    if (!v) return;
    auto b = v->find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
      v.reset();
      return;
    }
    *v = v->substr(b, v->find_last_not_of(" \t\r\n") - b + 1);
    if (*v == "-") v.reset();
  };
  for (auto& i : items) {
    canon(i.expression);
    canon(i.detail);
  }
  return items;
}

TEST(CoverageProperties, HtmlAndJsonViewsAgree) {
  for (unsigned seed = 1; seed <= 100; ++seed) {
    auto r = ReportGen(seed).generate();
    SCOPED_TRACE(seed);
    EXPECT_EQ(parse_report_text(render_report_html(r)).items, html_canonical(r.items));
    EXPECT_EQ(parse_report_text(dump_json(to_json(r))).items, r.items);
  }
}

TEST(CoverageProperties, LosslessExtractionAndOrdering) {
  for (unsigned seed = 1; seed <= 200; ++seed) {
    auto r = ReportGen(seed).generate();
    std::size_t budget = seed % 4 + 1;
    auto s = extract_uncovered(r, budget);
    std::set<std::uint32_t> expected, retained;
    for (const auto& i : r.items) {
      if (i.status != CoverageStatus::Covered) expected.insert(i.id);
    }
    std::size_t total = 0;
    for (const auto& g : s.groups) {
      EXPECT_LE(g.item_ids.size(), budget);
      for (std::size_t k = 0; k < g.item_ids.size(); ++k) {
        const auto* item = r.find(g.item_ids[k]);
        ASSERT_NE(item, nullptr);
        EXPECT_NE(item->status, CoverageStatus::Covered);
        EXPECT_EQ(item->category, g.category);
        if (k) EXPECT_LE(r.find(g.item_ids[k - 1])->source, item->source);
        retained.insert(g.item_ids[k]);
      }
      total += g.item_ids.size() + g.omitted;
    }
    EXPECT_EQ(total, expected.size()) << seed;
    // before truncation accounting: an unbounded budget keeps everything
    std::set<std::uint32_t> all;
    for (const auto& g : extract_uncovered(r, 1000).groups) all.insert(g.item_ids.begin(), g.item_ids.end());
    EXPECT_EQ(all, expected) << seed;
    EXPECT_TRUE(std::includes(expected.begin(), expected.end(), retained.begin(), retained.end()));
  }
}

TEST(CoverageProperties, ScoreIsBoundedRecomputableAndMonotone) {
  for (unsigned seed = 1; seed <= 200; ++seed) {
    auto r = ReportGen(seed).generate();
    SCOPED_TRACE(seed);
    EXPECT_GE(r.score, 0.0);
    EXPECT_LE(r.score, 100.0);
    // independent recomputation from raw counts
    std::map<CoverageCategory, std::pair<int, int>> counts;
    for (const auto& i : r.items) {
      if (i.category == CoverageCategory::Functional) continue;
      counts[i.category].second++;
      if (i.status == CoverageStatus::Covered) counts[i.category].first++;
    }
    double mean = 0;
    for (const auto& [c, n] : counts) mean += 100.0 * n.first / n.second;
    mean /= static_cast<double>(counts.size());
    EXPECT_NEAR(r.score, mean, 0.05);

    for (auto& i : r.items) {
      if (i.status == CoverageStatus::Covered) continue;
      double before = compute_score(r).score;
      i.status = CoverageStatus::Covered;
      EXPECT_GE(compute_score(r).score, before);
    }
  }
}

}  // namespace
}  // namespace uvmarvel
