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

// Coverage report ingestion, scoring and uncovered-item extraction.
//
// Two input formats are understood: a normalized tab-separated text format
// (the canonical interchange) and a minimal HTML dialect built around a
// `<table class="covtable">`. See docs/coverage-format.md.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "uvmarvel/signal_tracker.hpp"
#include "uvmarvel/verilog_model.hpp"

namespace uvmarvel {

enum class CoverageCategory { Line, Branch, Condition, Toggle, Functional };
enum class CoverageStatus { Covered, Uncovered, Partial };

std::string_view to_string(CoverageCategory c);
std::string_view to_string(CoverageStatus s);
std::optional<CoverageCategory> coverage_category_from_string(std::string_view text);
std::optional<CoverageStatus> coverage_status_from_string(std::string_view text);

/// Code-coverage categories, i.e. those that count toward the score.
inline bool counts_toward_score(CoverageCategory c) { return c != CoverageCategory::Functional; }

struct SourceLocation {
  std::string file;
  int line = 0;
  auto operator<=>(const SourceLocation&) const = default;
};

struct CoverageItem {
  std::uint32_t id = 0;  // 1-based position in the report
  CoverageCategory category = CoverageCategory::Line;
  std::string hierarchical_name;
  SourceLocation source;
  CoverageStatus status = CoverageStatus::Uncovered;
  std::optional<std::string> expression;
  std::optional<std::string> detail;

  /// Identity across runs: category, hierarchy, location and expression.
  std::string key() const;
  bool operator==(const CoverageItem&) const = default;
};

struct CoverageReport {
  std::vector<CoverageItem> items;
  double score = 0.0;
  std::map<CoverageCategory, double> per_category_scores;
  std::string run_label;
  std::size_t malformed_items = 0;
  std::vector<std::string> warnings;

  const CoverageItem* find(std::uint32_t id) const;
  const CoverageItem* find_key(std::string_view key) const;
  /// Renumbers ids 1..n and recomputes scores (scores stay 0 when empty).
  void normalize();
};

struct ScoreResult {
  double score = 0.0;
  std::map<CoverageCategory, double> per_category;
};

double round2(double value);

/// Per-category covered/total * 100 (Partial counts as not covered) and their
/// unweighted mean, all rounded to 2 decimals. Items whose ids are in
/// `excluded` (waived points) leave the denominator. Throws NoItems.
ScoreResult compute_score(const CoverageReport& report, const std::set<std::uint32_t>& excluded = {});

/// Detects normalized text, covtable HTML or the JSON view from the content.
/// Throws UnrecognizedFormat.
CoverageReport parse_report_text(std::string_view text, std::string_view source_name = "<report>");
/// Throws FileNotReadable or UnrecognizedFormat.
CoverageReport parse_report(const std::filesystem::path& path);

std::string serialize_report(const CoverageReport& report);
std::string render_report_html(const CoverageReport& report);

/// Raises item statuses in `base` to those of matching items (by key) in
/// `delta`; statuses never go down. Unknown delta items are ignored.
/// Returns the ids of base items that improved.
std::vector<std::uint32_t> merge_upward(CoverageReport& base, const CoverageReport& delta);

struct UncoveredGroup {
  CoverageCategory category = CoverageCategory::Line;
  std::string module;  // resolved module, or the hierarchical name without a design
  std::vector<std::uint32_t> item_ids;  // retained, in source order
  std::size_t omitted = 0;              // items cut by the budget
};

struct UncoveredSummary {
  std::vector<UncoveredGroup> groups;  // ordered by (category, module)
  std::size_t context_budget = 0;

  std::size_t total_items() const;
  /// Compact structured text without markup.
  std::string render_text(const CoverageReport& report) const;
};

/// Groups Uncovered/Partial items by (category, module). With a design,
/// hierarchical names are resolved to module names. Throws InvalidArgument
/// when budget < 1.
UncoveredSummary extract_uncovered(const CoverageReport& report, std::size_t budget,
                                   const DesignModel* model = nullptr);

/// Resolves an item's scope to a module name.
std::optional<std::string> item_module(const CoverageItem& item, const DesignModel& model);

/// Seed signals for an uncovered item. Throws NoSeedsFound, or
/// InvalidArgument for a covered item.
SeedSet seed_signals(const CoverageItem& item, const DesignModel* model);

}  // namespace uvmarvel
