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

#include "uvmarvel/signal_tracker.hpp"

#include <deque>
#include <functional>

#include "uvmarvel/error.hpp"

namespace uvmarvel {

namespace {

// Per-module lookup of statements by referenced signal name.
struct ModuleIndex {
  std::map<std::string, std::vector<StatementId>, std::less<>> by_signal;
  std::set<std::string> terminals;
};

ModuleIndex build_index(const DesignModel& model, const ModuleDef& mod, const TraceOptions& opt) {
  ModuleIndex idx;
  for (StatementId id : mod.statements) {
    for (const auto& name : model.statement(id).signal_names()) idx.by_signal[name].push_back(id);
  }
  if (!opt.expand_clock_reset) idx.terminals = clock_reset_signals(model, mod.name);
  return idx;
}

bool module_knows(const ModuleDef& mod, const ModuleIndex& idx, const std::string& name) {
  return mod.is_port(name) || mod.find_signal(name) || idx.by_signal.count(name);
}

struct BfsState {
  std::set<std::string> visited;
  std::set<StatementId> statements;
  std::set<std::string> terminals;
};

struct BfsDelta {
  std::vector<std::string> new_signals;
  std::vector<StatementId> new_statements;
};

// Backward worklist over one module, continuing from `state`.
BfsDelta run_bfs(const DesignModel& model, const ModuleIndex& idx, const std::set<std::string>& seeds,
                 BfsState& state) {
  BfsDelta delta;
  std::deque<std::string> queue(seeds.begin(), seeds.end());
  while (!queue.empty()) {
    std::string s = std::move(queue.front());
    queue.pop_front();
    if (!state.visited.insert(s).second) continue;
    delta.new_signals.push_back(s);
    auto it = idx.by_signal.find(s);
    if (it == idx.by_signal.end()) continue;
    for (StatementId t : it->second) {
      if (state.statements.insert(t).second) delta.new_statements.push_back(t);
      for (const auto& x : model.statement(t).signal_names()) {
        if (x == s || state.visited.count(x)) continue;
        if (idx.terminals.count(x) && !seeds.count(x)) {
          state.terminals.insert(x);
          continue;
        }
        queue.push_back(x);
      }
    }
  }
  return delta;
}

const PortBinding* binding_for(const Instance& inst, std::string_view formal) {
  for (const auto& b : inst.bindings) {
    if (b.formal == formal) return &b;
  }
  return nullptr;
}

}  // namespace

std::set<StatementId> DependencySlice::all_statements() const {
  std::set<StatementId> out;
  for (const auto& [_, ids] : statements_by_file) out.insert(ids.begin(), ids.end());
  return out;
}

std::size_t DependencySlice::size() const {
  std::size_t n = 0;
  for (const auto& [_, ids] : statements_by_file) n += ids.size();
  return n;
}

std::set<std::string> clock_reset_signals(const DesignModel& model, std::string_view module_name) {
  std::set<std::string> out;
  for (StatementId id : model.module(module_name).statements) {
    const Statement& s = model.statement(id);
    if (s.kind != StatementKind::AlwaysBlock) continue;
    for (const auto& item : s.sensitivity) {
      if (item.edge != Edge::None) out.insert(item.signal);
    }
  }
  return out;
}

SignalRef name_only(const SignalRef& ref) { return SignalRef{ref.module_name, ref.signal_name, std::nullopt}; }

SignalRef parse_seed(const DesignModel& model, std::string_view text) {
  auto dot = text.rfind('.');
  if (dot == std::string_view::npos) return SignalRef{"", std::string(text), std::nullopt};
  std::string_view scope = text.substr(0, dot);
  std::string name(text.substr(dot + 1));
  if (model.find_module(scope)) return SignalRef{std::string(scope), name, std::nullopt};
  auto resolved = model.resolve_hierarchy(scope);
  if (!resolved) {
    throw Error(ErrorCode::InvalidArgument, "cannot resolve seed scope '" + std::string(scope) + "'");
  }
  return SignalRef{*resolved, name, std::nullopt};
}

SingleFileTrace trace_single_file(const SeedSet& seeds, const DesignModel& model,
                                  std::string_view module_name, const TraceOptions& options) {
  const ModuleDef& mod = model.module(module_name);
  ModuleIndex idx = build_index(model, mod, options);
  std::set<std::string> names;
  for (const auto& s : seeds.signals) {
    if (s.module_name.empty() || s.module_name == mod.name) names.insert(s.signal_name);
  }
  BfsState state;
  run_bfs(model, idx, names, state);
  SingleFileTrace out;
  out.statements = std::move(state.statements);
  for (const auto& v : state.visited) out.visited.insert(SignalRef{mod.name, v, std::nullopt});
  for (const auto& t : state.terminals) out.terminals.insert(SignalRef{mod.name, t, std::nullopt});
  return out;
}

DependencySlice trace_cross_file(const SeedSet& seeds, const DesignModel& model,
                                 const TraceOptions& options) {
  const ModuleDef* top = model.top();
  if (!top) throw Error(ErrorCode::NoTopModule, "design model has no resolved top module");

  // submodules in model order, top last so signals it learns from siblings in
  // one iteration reach the other siblings in the next
  std::vector<const ModuleDef*> order;
  for (const auto& m : model.modules) {
    if (&m != top) order.push_back(&m);
  }
  order.push_back(top);

  std::map<std::string, ModuleIndex> index;
  std::map<std::string, BfsState> state;
  std::map<std::string, std::set<std::string>> seed_names;
  for (const ModuleDef* m : order) index.emplace(m->name, build_index(model, *m, options));

  DependencySlice slice;
  std::set<SignalRef> frontier;
  for (const auto& s : seeds.signals) {
    for (const ModuleDef* m : order) {
      if (!s.module_name.empty() && s.module_name != m->name) continue;
      if (!module_knows(*m, index[m->name], s.signal_name)) continue;
      frontier.insert(SignalRef{m->name, s.signal_name, std::nullopt});
      seed_names[m->name].insert(s.signal_name);
    }
  }

  // seeds stay expandable even when they are clocks
  for (const auto& [mod, names] : seed_names) {
    for (const auto& n : names) index[mod].terminals.erase(n);
  }

  std::set<std::string> unresolved;
  while (!frontier.empty()) {
    slice.iteration_frontiers.push_back(frontier);
    std::set<SignalRef> next;
    for (const ModuleDef* m : order) {
      std::set<std::string> local;
      for (const auto& f : frontier) {
        if (f.module_name == m->name) local.insert(f.signal_name);
      }
      if (local.empty()) continue;
      BfsState& st = state[m->name];
      const ModuleIndex& idx = index[m->name];
      BfsDelta delta = run_bfs(model, idx, local, st);

      // upward: a visited port maps to the parent's actuals
      for (const auto& sig : delta.new_signals) {
        if (!m->is_port(sig)) continue;
        for (const auto& [parent, inst_index] : model.instantiations_of(m->name)) {
          const Instance& inst = model.module(parent).instances[inst_index];
          const PortBinding* b = binding_for(inst, sig);
          if (!b) continue;
          if (state[parent].statements.insert(b->statement).second) {
            slice.statements_by_file[parent].insert(b->statement);
          }
          for (const auto& a : b->actuals) {
            if (!state[parent].visited.count(a.signal_name)) {
              next.insert(SignalRef{parent, a.signal_name, std::nullopt});
            }
          }
        }
      }
      // downward: a sliced binding maps to the child's formal
      for (StatementId id : delta.new_statements) {
        const Statement& s = model.statement(id);
        slice.statements_by_file[m->name].insert(id);
        if (s.kind != StatementKind::InstanceConnection || !s.instance_index) continue;
        const Instance& inst = m->instances[*s.instance_index];
        const ModuleDef* child = model.find_module(inst.child_module);
        if (!child || s.header.empty() || !child->is_port(s.header)) {
          unresolved.insert(m->name + "." + inst.instance_name);
          continue;
        }
        if (!state[child->name].visited.count(s.header)) {
          next.insert(SignalRef{child->name, s.header, std::nullopt});
        }
      }
    }
    frontier.clear();
    for (const auto& n : next) {
      if (state[n.module_name].visited.count(n.signal_name)) continue;
      if (index[n.module_name].terminals.count(n.signal_name)) {
        state[n.module_name].terminals.insert(n.signal_name);
        continue;
      }
      frontier.insert(n);
    }
  }

  for (const auto& [mod, st] : state) {
    for (const auto& v : st.visited) slice.visited_signals.insert(SignalRef{mod, v, std::nullopt});
    for (const auto& t : st.terminals) slice.terminal_signals.insert(SignalRef{mod, t, std::nullopt});
  }
  for (auto it = slice.statements_by_file.begin(); it != slice.statements_by_file.end();) {
    it = it->second.empty() ? slice.statements_by_file.erase(it) : std::next(it);
  }

  bool data_entry = false;
  for (const auto& v : state[top->name].visited) {
    if (top->is_port(v)) {
      slice.entry_ports.insert(v);
      data_entry = true;
    }
  }

  // clock/reset of sliced always blocks, followed up to the top's ports
  std::set<std::pair<std::string, std::string>> walked;
  std::function<void(const std::string&, const std::string&)> walk =
      [&](const std::string& mod_name, const std::string& sig) {
        if (!walked.emplace(mod_name, sig).second) return;
        const ModuleDef& mod = model.module(mod_name);
        if (&mod == top) {
          if (mod.is_port(sig)) slice.entry_ports.insert(sig);
          return;
        }
        if (!mod.is_port(sig)) return;
        for (const auto& [parent, inst_index] : model.instantiations_of(mod_name)) {
          const PortBinding* b = binding_for(model.module(parent).instances[inst_index], sig);
          if (!b) continue;
          if (!slice.statements_by_file.count(parent) ||
              !slice.statements_by_file[parent].count(b->statement)) {
            slice.support_statements.insert(b->statement);
          }
          for (const auto& a : b->actuals) walk(parent, a.signal_name);
        }
      };
  for (const auto& [mod_name, ids] : slice.statements_by_file) {
    for (StatementId id : ids) {
      const Statement& s = model.statement(id);
      if (s.kind != StatementKind::AlwaysBlock) continue;
      for (const auto& item : s.sensitivity) {
        if (item.edge != Edge::None) walk(mod_name, item.signal);
      }
    }
  }

  slice.unresolved_instances.assign(unresolved.begin(), unresolved.end());
  slice.partial = !unresolved.empty();
  slice.unreachable_from_io = !slice.empty() && !data_entry;
  return slice;
}

}  // namespace uvmarvel
