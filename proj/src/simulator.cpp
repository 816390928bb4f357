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

#include "uvmarvel/simulator.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "uvmarvel/error.hpp"
#include "uvmarvel/json_io.hpp"

namespace uvmarvel {

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotReadable, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScriptedSimRunner::Rule rule_from_json(const Json& j, const std::filesystem::path& base_dir, bool matcher) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "simulator rule must be an object");
  ScriptedSimRunner::Rule r;
  r.sequence = j.value("sequence", "");
  r.match = j.value("match", "");
  if (matcher && r.sequence.empty() && r.match.empty()) {
    throw Error(ErrorCode::InvalidArgument, "simulator rule needs 'sequence' or 'match'");
  }
  r.compile_ok = j.value("compile_ok", true);
  r.sim_ok = j.value("sim_ok", true);
  r.checkers_ok = j.value("checkers_ok", true);
  r.error = j.value("error", "");
  r.covers = j.value("covers", std::vector<std::string>{});
  r.covers_targets = j.value("covers_targets", false);
  if (j.contains("delta")) r.delta_text = slurp(base_dir / j.at("delta").get<std::string>());
  for (const auto& k : r.covers) item_from_key(k);  // validate early
  return r;
}

}  // namespace

std::string sequence_id(std::string_view body) {
  static const std::regex re(R"(\bclass\s+([A-Za-z_][A-Za-z0-9_$]*))");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(body.begin(), body.end(), m, re)) return m[1].str();
  return "";
}

CoverageItem item_from_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    auto bar = key.find('|', pos);
    if (bar == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "bad coverage item key '" + std::string(key) + "'");
    parts.emplace_back(key.substr(pos, bar - pos));
    pos = bar + 1;
  }
  parts.emplace_back(key.substr(pos));  // expressions may contain '|'
  CoverageItem item;
  auto cat = coverage_category_from_string(parts[0]);
  auto colon = parts[2].rfind(':');
  if (!cat || colon == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "bad coverage item key '" + std::string(key) + "'");
  }
  item.category = *cat;
  item.hierarchical_name = parts[1];
  item.source.file = parts[2].substr(0, colon);
  try {
    item.source.line = std::stoi(parts[2].substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad line in coverage item key '" + std::string(key) + "'");
  }
  if (!parts[3].empty()) item.expression = parts[3];
  item.status = CoverageStatus::Covered;
  return item;
}

ScriptedSimRunner::ScriptedSimRunner(std::vector<Rule> rules, std::optional<Rule> fallback, std::string label)
    : rules_(std::move(rules)), fallback_(std::move(fallback)), label_(std::move(label)) {}

std::unique_ptr<ScriptedSimRunner> ScriptedSimRunner::from_json_text(std::string_view text,
                                                                     const std::filesystem::path& base_dir) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::SimulatorUnavailable, "simulator script is not a JSON object");
  }
  try {
    std::vector<Rule> rules;
    for (const auto& r : j.value("rules", Json::array())) rules.push_back(rule_from_json(r, base_dir, true));
    std::optional<Rule> fallback;
    if (j.contains("default")) fallback = rule_from_json(j.at("default"), base_dir, false);
    return std::make_unique<ScriptedSimRunner>(std::move(rules), std::move(fallback));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SimulatorUnavailable, std::string("simulator script: ") + e.what());
  }
}

std::unique_ptr<ScriptedSimRunner> ScriptedSimRunner::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SimulatorUnavailable, "cannot read simulator script " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), path.parent_path());
}

SimResult ScriptedSimRunner::run(const SimRequest& request) {
  ++runs_;
  const std::string seq = sequence_id(request.body);
  const Rule* rule = nullptr;
  for (const auto& r : rules_) {
    bool hit = !r.sequence.empty() ? r.sequence == seq : request.body.find(r.match) != std::string::npos;
    if (hit) {
      rule = &r;
      break;
    }
  }
  if (!rule && fallback_) rule = &*fallback_;
  SimResult res;
  res.delta.run_label = request.run_label;
  if (!rule) {
    res.compile_ok = res.sim_ok = res.checkers_ok = true;
    return res;
  }
  res.compile_ok = rule->compile_ok;
  res.sim_ok = rule->compile_ok && rule->sim_ok;
  res.checkers_ok = res.sim_ok && rule->checkers_ok;
  res.error_text = rule->error;
  if (!res.sim_ok) return res;
  if (!rule->delta_text.empty()) res.delta = parse_report_text(rule->delta_text, "<delta>");
  for (const auto& k : rule->covers) res.delta.items.push_back(item_from_key(k));
  if (rule->covers_targets) {
    for (auto t : request.targets) {
      t.status = CoverageStatus::Covered;
      res.delta.items.push_back(std::move(t));
    }
  }
  res.delta.run_label = request.run_label;
  return res;
}

ExecSimRunner::ExecSimRunner(std::string command) : command_(std::move(command)) {}

SimResult ExecSimRunner::run(const SimRequest& request) {
  namespace fs = std::filesystem;
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() / ("uvmarvel_sim_" + std::to_string(::getpid()) + "_" + std::to_string(++counter));
  fs::create_directories(dir);
  fs::path seq = dir / "sequence.sv", cov = dir / "coverage.cov", log = dir / "run.log";
  {
    std::ofstream out(seq, std::ios::binary);
    out << request.body;
  }
  auto quote = [](const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
  };
  std::string cmd = command_ + " " + quote(seq.string()) + " " + quote(request.run_label) + " " + quote(cov.string()) +
                    " > " + quote(log.string()) + " 2>&1";
  int status = std::system(cmd.c_str());
  int code = status == -1 ? -1 : WEXITSTATUS(status);
  SimResult res;
  res.compile_ok = code != 3;
  res.sim_ok = code == 0;
  res.checkers_ok = res.sim_ok;
  if (code == 127) {
    fs::remove_all(dir);
    throw Error(ErrorCode::SimulatorUnavailable, "simulator command not found: " + command_);
  }
  if (fs::exists(log)) res.error_text = res.sim_ok ? "" : slurp(log);
  if (res.sim_ok && fs::exists(cov)) res.delta = parse_report(cov);
  res.delta.run_label = request.run_label;
  fs::remove_all(dir);
  return res;
}

std::unique_ptr<SimRunner> make_sim_runner(std::string_view spec) {
  if (spec.rfind("mock:", 0) == 0) return ScriptedSimRunner::from_file(std::string(spec.substr(5)));
  if (spec.rfind("exec:", 0) == 0 && spec.size() > 5) return std::make_unique<ExecSimRunner>(std::string(spec.substr(5)));
  throw Error(ErrorCode::SimulatorUnavailable, "unknown simulator spec '" + std::string(spec) + "' (use mock:<file> or exec:<cmd>)");
}

}  // namespace uvmarvel
