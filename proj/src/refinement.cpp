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

#include "uvmarvel/refinement.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <sstream>

#include "uvmarvel/error.hpp"

namespace uvmarvel {

namespace {

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string with_newline(std::string s) {
  if (!s.empty() && s.back() != '\n') s += '\n';
  return s;
}

std::string render_item(const CoverageItem& item) {
  std::ostringstream os;
  os << "## Coverage point\n"
     << "id: " << item.id << "\n"
     << "category: " << to_string(item.category) << "\n"
     << "status: " << to_string(item.status) << "\n"
     << "hierarchy: " << item.hierarchical_name << "\n"
     << "location: " << item.source.file << ":" << item.source.line << "\n";
  if (item.expression) os << "expression: " << *item.expression << "\n";
  if (item.detail) os << "detail: " << *item.detail << "\n";
  return os.str();
}

const char* kDirective =
    "## Task\n"
    "Write a UVM sequence that drives the entry ports so that the coverage point above is hit,\n"
    "or argue that no stimulus can ever hit it.\n"
    "The first line of the reply must be exactly SEQUENCE or WAIVER.\n"
    "SEQUENCE: follow with one fenced code block holding a class that extends uvm_sequence.\n"
    "WAIVER: follow with the reasoning that shows the point is unreachable.\n";

// Modules in the order the trace first reached them.
std::vector<std::string> dependency_order(const DependencySlice& slice, const FilteredDUT& fdut) {
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < slice.iteration_frontiers.size(); ++i) {
    for (const auto& s : slice.iteration_frontiers[i]) first_seen.emplace(s.module_name, i);
  }
  std::vector<std::string> mods;
  for (const auto& f : fdut.files) mods.push_back(f.module_name);
  std::stable_sort(mods.begin(), mods.end(), [&](const std::string& a, const std::string& b) {
    auto ra = first_seen.count(a) ? first_seen[a] : SIZE_MAX;
    auto rb = first_seen.count(b) ? first_seen[b] : SIZE_MAX;
    return ra != rb ? ra < rb : a < b;
  });
  return mods;
}

bool is_scorable_left(const CoverageReport& r, const std::set<std::uint32_t>& excluded) {
  return std::any_of(r.items.begin(), r.items.end(), [&](const CoverageItem& i) {
    return counts_toward_score(i.category) && !excluded.count(i.id);
  });
}

double score_without(const CoverageReport& r, const std::set<std::uint32_t>& excluded) {
  if (!is_scorable_left(r, excluded)) return 100.0;
  return compute_score(r, excluded).score;
}

struct LlmOutcome {
  std::optional<std::string> reply;
  std::string error;
};

}  // namespace

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

PromptBundle assemble_prompt(const CoverageItem& item, const DependencySlice& slice, const FilteredDUT& fdut,
                             const DesignModel& model, std::size_t budget, const std::string& key) {
  auto module = item_module(item, model);
  if (!module) throw Error(ErrorCode::InvalidArgument, "item #" + std::to_string(item.id) + " has no module in the design");
  const FilteredFile* own = fdut.find(*module);
  if (!own) throw Error(ErrorCode::InvalidArgument, "filtered DUT has no file for module '" + *module + "'");

  PromptBundle b;
  b.uncovered_item = item;
  b.entry_ports.assign(slice.entry_ports.begin(), slice.entry_ports.end());
  b.task_directive = kDirective;

  std::string prefix = "# key: " + key + "\n" + render_item(item) + "## Entry ports\n";
  for (const auto& p : b.entry_ports) prefix += p + "\n";
  prefix += "## Filtered DUT\n";
  const std::string suffix = std::string("\n") + kDirective;

  auto fits = [&](const std::string& dut) { return estimate_tokens(prefix) + estimate_tokens(dut) + estimate_tokens(suffix) <= budget; };
  auto whole = [](const FilteredFile& f) { return "// file: " + f.path + "\n" + with_newline(f.text); };

  std::string dut = whole(*own);
  if (!fits(dut)) {
    throw Error(ErrorCode::BudgetTooSmall, "budget of " + std::to_string(budget) + " tokens cannot hold module '" + *module +
                                               "' (needs about " +
                                               std::to_string(estimate_tokens(prefix + dut + suffix)) + ")");
  }
  b.included_modules.push_back(*module);
  for (const auto& name : dependency_order(slice, fdut)) {
    if (name == *module) continue;
    const FilteredFile& f = *fdut.find(name);
    if (fits(dut + whole(f))) {
      dut += whole(f);
      b.included_modules.push_back(name);
      continue;
    }
    // largest prefix of constructs that still fits; nothing further after it
    for (std::size_t k = f.body_chunks.size(); k-- > 0;) {
      std::string part = "// file: " + f.path + " (truncated)\n" + with_newline(f.truncated(k));
      if (fits(dut + part)) {
        dut += part;
        b.included_modules.push_back(name);
        b.truncated_modules.push_back(name);
        break;
      }
    }
    break;
  }
  b.filtered_dut = dut;
  b.text = prefix + dut + suffix;
  b.token_estimate = estimate_tokens(prefix) + estimate_tokens(dut) + estimate_tokens(suffix);
  return b;
}

std::string_view to_string(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::Proposed: return "Proposed";
    case CandidateStatus::CompileFailed: return "CompileFailed";
    case CandidateStatus::SimFailed: return "SimFailed";
    case CandidateStatus::Ran: return "Ran";
  }
  return "?";
}

ParsedReply parse_reply(std::string_view reply) {
  std::size_t pos = 0;
  std::string first;
  while (pos < reply.size()) {
    auto eol = reply.find('\n', pos);
    std::string line = trim_copy(reply.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    pos = eol == std::string_view::npos ? reply.size() : eol + 1;
    if (!line.empty()) {
      first = line;
      break;
    }
  }
  ParsedReply p;
  if (first == "SEQUENCE") {
    p.kind = ReplyKind::Sequence;
  } else if (first == "WAIVER") {
    p.kind = ReplyKind::Waiver;
  } else {
    throw Error(ErrorCode::UnparseableResult, "first line must be SEQUENCE or WAIVER, got '" + first.substr(0, 60) + "'");
  }
  std::string_view rest = reply.substr(pos);
  auto open = rest.find("```");
  std::optional<std::string> block;
  if (open != std::string_view::npos) {
    auto body_start = rest.find('\n', open);
    auto close = body_start == std::string_view::npos ? std::string_view::npos : rest.find("```", body_start + 1);
    if (close == std::string_view::npos) throw Error(ErrorCode::UnparseableResult, "unterminated code block");
    block = std::string(rest.substr(body_start + 1, close - body_start - 1));
  }
  if (p.kind == ReplyKind::Sequence) {
    if (!block || trim_copy(*block).empty()) throw Error(ErrorCode::UnparseableResult, "SEQUENCE reply has no code block");
    p.body = *block;
  } else {
    p.body = trim_copy(block ? std::string_view(*block) : rest);
    if (p.body.empty()) throw Error(ErrorCode::UnparseableResult, "WAIVER reply has no justification");
  }
  return p;
}

void RefineConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "invalid configuration: " + what); };
  if (context_budget < 1) bad("context_budget must be at least 1");
  if (points_per_iter < 1) bad("points_per_iter must be at least 1");
  if (repair_attempts < 0) bad("repair_attempts must not be negative");
  if (waiver_quorum < 1 || waiver_quorum > 3) bad("waiver_quorum must be between 1 and 3");
  if (!(target_score > 0.0 && target_score <= 100.0)) bad("target_score must be in (0, 100]");
  if (max_iters < 1) bad("max_iters must be at least 1");
}

VerificationReport refine(const DesignModel& design, const CoverageReport& report, const std::vector<LlmClient*>& llms,
                          SimRunner* sim, const RefineConfig& config) {
  config.validate();
  if (llms.size() != 3 || std::find(llms.begin(), llms.end(), nullptr) != llms.end()) {
    throw Error(ErrorCode::InvalidArgument, "refinement needs exactly three language model clients");
  }
  if (!sim) throw Error(ErrorCode::SimulatorUnavailable, "no simulator runner configured");

  VerificationReport out;
  CoverageReport cur = report;
  if (is_scorable_left(cur, {})) {
    auto s = compute_score(cur);
    cur.score = s.score;
    cur.per_category_scores = s.per_category;
  }
  out.runs.push_back({"baseline", cur});

  std::set<std::uint32_t> waived, attempted;
  std::atomic<std::size_t> calls{0};

  auto ask = [&](LlmClient* llm, const std::string& prompt) {
    LlmOutcome o;
    ++calls;
    try {
      o.reply = llm->complete(prompt, config.llm_params);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    return o;
  };

  out.stop_reason = "iteration limit";
  for (int iter = 1; iter <= config.max_iters + 1; ++iter) {
    if (score_without(cur, waived) >= config.target_score) {
      out.stop_reason = "target reached";
      break;
    }
    if (iter > config.max_iters) break;

    std::vector<const CoverageItem*> open;
    std::map<std::string, std::size_t> cluster;
    std::map<std::uint32_t, std::string> module_of;
    for (const auto& item : cur.items) {
      if (item.status == CoverageStatus::Covered || waived.count(item.id)) continue;
      open.push_back(&item);
      auto m = item_module(item, design);
      module_of[item.id] = m.value_or(item.hierarchical_name);
      ++cluster[module_of[item.id]];
    }
    if (open.empty()) {
      out.stop_reason = "no uncovered items";
      break;
    }
    std::stable_sort(open.begin(), open.end(), [&](const CoverageItem* a, const CoverageItem* b) {
      bool ta = attempted.count(a->id), tb = attempted.count(b->id);
      if (ta != tb) return !ta;
      const auto &ma = module_of[a->id], &mb = module_of[b->id];
      if (cluster[ma] != cluster[mb]) return cluster[ma] > cluster[mb];
      if (ma != mb) return ma < mb;
      return a->id < b->id;
    });
    if (open.size() > static_cast<std::size_t>(config.points_per_iter)) open.resize(static_cast<std::size_t>(config.points_per_iter));
    std::vector<CoverageItem> batch;
    for (const auto* i : open) batch.push_back(*i);

    out.iterations = iter;
    bool progress = false;
    const std::string tag = "iter" + std::to_string(iter);
    for (const auto& item : batch) {
      attempted.insert(item.id);
      const std::string where = "item #" + std::to_string(item.id) + " (" + tag + ")";
      PromptBundle bundle;
      try {
        SeedSet seeds = seed_signals(item, &design);
        DependencySlice slice = trace_cross_file(seeds, design, config.trace_options);
        FilteredDUT fdut = patch(slice, design);
        bundle = assemble_prompt(item, slice, fdut, design, config.context_budget,
                                 "refine:" + std::to_string(item.id) + ":" + tag);
      } catch (const Error& e) {
        out.error_logs.push_back(where + " deferred: " + std::string(to_string(e.code())) + ": " + e.what());
        continue;
      }

      std::vector<std::future<LlmOutcome>> pending;
      for (auto* llm : llms) pending.push_back(std::async(std::launch::async, ask, llm, bundle.text));
      std::vector<LlmOutcome> first;
      for (auto& f : pending) first.push_back(f.get());

      const std::string base_prompt = bundle.text.substr(bundle.text.find('\n') + 1);
      std::vector<std::pair<std::string, std::string>> votes;  // model, justification
      bool any_usable = false;
      for (std::size_t m = 0; m < llms.size(); ++m) {
        const std::string label = llms[m]->label();
        LlmOutcome o = first[m];
        int repairs = 0, seq_no = 0;
        auto repair = [&](const std::string& last_reply, const std::string& problem) {
          if (repairs >= config.repair_attempts) return false;
          ++repairs;
          std::string prompt = "# key: repair:" + std::to_string(item.id) + ":" + tag + ":" + std::to_string(repairs) + "\n" +
                               base_prompt + "\n## Previous reply\n" + with_newline(last_reply) + "## Problem\n" +
                               with_newline(problem) + "Fix the problem and reply in the same format.\n";
          o = ask(llms[m], prompt);
          return true;
        };
        while (true) {
          if (!o.reply) {
            out.error_logs.push_back(where + " model " + label + " unavailable: " + o.error);
            break;
          }
          ParsedReply parsed;
          try {
            parsed = parse_reply(*o.reply);
          } catch (const Error& e) {
            out.error_logs.push_back(where + " model " + label + " reply unparseable: " + e.what());
            if (repair(*o.reply, std::string("The reply could not be parsed: ") + e.what())) continue;
            break;
          }
          any_usable = true;
          if (parsed.kind == ReplyKind::Waiver) {
            votes.emplace_back(label, parsed.body);
            break;
          }
          SequenceCandidate cand;
          cand.id = tag + "-item" + std::to_string(item.id) + "-" + label + "-" + std::to_string(++seq_no);
          cand.source_model = label;
          cand.target_items = {item.id};
          cand.body = parsed.body;
          SimResult r = sim->run(SimRequest{cand.id, cand.body, cand.id, {item}});
          cand.checkers_ok = r.checkers_ok;
          if (!r.compile_ok || !r.sim_ok) {
            cand.status = r.compile_ok ? CandidateStatus::SimFailed : CandidateStatus::CompileFailed;
            cand.error_log = r.error_text;
            out.error_logs.push_back(cand.id + " " + std::string(to_string(cand.status)) + ": " + r.error_text);
            std::string reply = *o.reply;
            out.candidates.push_back(std::move(cand));
            if (repair(reply, std::string(r.compile_ok ? "Simulation failed" : "Compilation failed") + ":\n" + r.error_text)) {
              continue;
            }
            break;
          }
          cand.status = CandidateStatus::Ran;
          // coverage of runs that reached Ran only
          cand.newly_covered = merge_upward(cur, r.delta);
          for (auto id : cand.newly_covered) {
            if (auto* it = cur.find(id); it && it->status == CoverageStatus::Covered) waived.erase(id);
          }
          if (!cand.newly_covered.empty()) progress = true;
          out.candidates.push_back(std::move(cand));
          break;
        }
      }
      if (!any_usable) out.error_logs.push_back(where + " deferred: no model produced a usable reply");

      const CoverageItem* now = cur.find(item.id);
      if (now && now->status != CoverageStatus::Covered && static_cast<int>(votes.size()) >= config.waiver_quorum) {
        WaiverCandidate w;
        w.target_item = item.id;
        w.justification = votes.front().second;
        for (const auto& v : votes) w.proposing_models.insert(v.first);
        out.waivers.push_back(std::move(w));
        waived.insert(item.id);
        progress = true;
      }
    }
    out.runs.push_back({tag, cur});
    out.runs.back().report.run_label = tag;

    bool untried = false;
    for (const auto& item : cur.items) {
      if (item.status != CoverageStatus::Covered && !waived.count(item.id) && !attempted.count(item.id)) untried = true;
    }
    if (!progress && !untried) {
      out.stop_reason = "no improvement";
      break;
    }
  }

  // a waiver never survives its item being covered
  std::erase_if(out.waivers, [&](const WaiverCandidate& w) {
    const auto* it = cur.find(w.target_item);
    return it && it->status == CoverageStatus::Covered;
  });
  std::set<std::uint32_t> excluded;
  for (const auto& w : out.waivers) excluded.insert(w.target_item);
  out.final_score = score_without(cur, excluded);

  std::vector<SrgEntry> srg;
  for (const auto& c : out.candidates) {
    srg.push_back({c.id, c.status != CandidateStatus::CompileFailed, c.status == CandidateStatus::Ran,
                   c.status == CandidateStatus::Ran && c.checkers_ok});
  }
  if (!srg.empty()) out.srg = compute_srg(srg);
  out.llm_calls = calls.load();
  return out;
}

double compute_srg(const std::vector<SrgEntry>& results) {
  if (results.empty()) throw Error(ErrorCode::EmptyResults, "no generation results to score");
  std::size_t ok = 0;
  for (const auto& r : results) {
    if (r.compiled && r.simulated && r.checkers_passed) ++ok;
  }
  return round2(100.0 * static_cast<double>(ok) / static_cast<double>(results.size()));
}

}  // namespace uvmarvel
