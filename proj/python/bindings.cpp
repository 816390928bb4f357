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

// Python extension. Values cross the boundary as JSON-shaped dicts; the
// package wrapper turns the JSON strings produced here into Python objects.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "uvmarvel/bus_protocol.hpp"
#include "uvmarvel/coverage.hpp"
#include "uvmarvel/error.hpp"
#include "uvmarvel/ir_model.hpp"
#include "uvmarvel/json_io.hpp"
#include "uvmarvel/llm_client.hpp"
#include "uvmarvel/refinement.hpp"
#include "uvmarvel/simulator.hpp"
#include "uvmarvel/signal_tracker.hpp"
#include "uvmarvel/verilog_model.hpp"
#include "uvmarvel/verilog_patcher.hpp"

namespace py = pybind11;
using namespace uvmarvel;

namespace {

SeedSet seeds_from(const DesignModel& m, const std::vector<std::string>& names) {
  SeedSet s;
  for (const auto& n : names) s.signals.insert(parse_seed(m, n));
  return s;
}

std::string json_text(const Json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the uvmarvel toolkit";

  static py::exception<Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      inst.attr("details") = e.details();
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<DesignModel>(m, "Design")
      .def_static("from_files", &parse_design, py::arg("files"), py::arg("top"))
      .def_static(
          "from_sources",
          [](const std::vector<std::pair<std::string, std::string>>& sources, const std::string& top) {
            std::vector<SourceInput> in;
            for (const auto& [path, text] : sources) in.push_back({path, text});
            return parse_sources(in, top);
          },
          py::arg("sources"), py::arg("top") = "")
      .def_property_readonly("top", [](const DesignModel& d) { return d.top_module; })
      .def_property_readonly("module_names",
                             [](const DesignModel& d) {
                               std::vector<std::string> n;
                               for (const auto& mod : d.modules) n.push_back(mod.name);
                               return n;
                             })
      .def_property_readonly("statement_count", [](const DesignModel& d) { return d.statements.size(); })
      .def("to_json", [](const DesignModel& d) { return json_text(to_json(d)); });

  m.def(
      "trace",
      [](const DesignModel& d, const std::vector<std::string>& seeds, bool expand) {
        TraceOptions opt;
        opt.expand_clock_reset = expand;
        return json_text(to_json(trace_cross_file(seeds_from(d, seeds), d, opt)));
      },
      py::arg("design"), py::arg("seeds"), py::arg("expand_clock_reset") = false);

  m.def(
      "patch",
      [](const DesignModel& d, const std::string& slice_json) {
        return json_text(to_json(patch(slice_from_json(Json::parse(slice_json), d), d)));
      },
      py::arg("design"), py::arg("slice_json"));

  m.def(
      "parse_coverage",
      [](const std::string& text, const std::string& name) { return json_text(to_json(parse_report_text(text, name))); },
      py::arg("text"), py::arg("source_name") = "<report>");

  m.def(
      "serialize_coverage",
      [](const std::string& text) { return serialize_report(parse_report_text(text)); }, py::arg("text"));

  m.def(
      "uncovered",
      [](const std::string& text, std::size_t budget, const DesignModel* d) {
        CoverageReport r = parse_report_text(text);
        return json_text(to_json(extract_uncovered(r, budget, d), r));
      },
      py::arg("text"), py::arg("budget") = 200, py::arg("design") = nullptr);

  m.def(
      "parse_ir", [](const std::string& text) { return json_text(to_json(parse_ir_text(text, "<ir>"))); },
      py::arg("text"));

  m.def(
      "validate_ir",
      [](const std::string& text, const DesignModel* d) {
        Json out = Json::array();
        for (const auto& f : validate_ir(parse_ir_text(text, "<ir>"), d)) out.push_back(to_json(f));
        return json_text(out);
      },
      py::arg("text"), py::arg("design") = nullptr);

  m.def(
      "compute_srg",
      [](const std::vector<std::tuple<std::string, bool, bool, bool>>& rows) {
        std::vector<SrgEntry> e;
        for (const auto& [id, c, s, k] : rows) e.push_back({id, c, s, k});
        return compute_srg(e);
      },
      py::arg("results"));

  m.def(
      "verify_frozen_regions",
      [](const std::string& skeleton, const std::string& output) {
        return verify_frozen_regions(parse_skeleton(skeleton, std::nullopt, ComponentKind::Driver), output);
      },
      py::arg("skeleton"), py::arg("output"));

  m.def(
      "refine",
      [](const DesignModel& d, const std::string& report_text, std::vector<std::pair<std::string, py::function>> llms,
         const std::string& sim_script, py::dict cfg) {
        RefineConfig c;
        if (cfg.contains("context_budget")) c.context_budget = cfg["context_budget"].cast<std::size_t>();
        if (cfg.contains("points_per_iter")) c.points_per_iter = cfg["points_per_iter"].cast<int>();
        if (cfg.contains("repair_attempts")) c.repair_attempts = cfg["repair_attempts"].cast<int>();
        if (cfg.contains("waiver_quorum")) c.waiver_quorum = cfg["waiver_quorum"].cast<int>();
        if (cfg.contains("target_score")) c.target_score = cfg["target_score"].cast<double>();
        if (cfg.contains("max_iters")) c.max_iters = cfg["max_iters"].cast<int>();
        std::vector<std::unique_ptr<FunctionClient>> owned;
        std::vector<LlmClient*> ptrs;
        for (auto& [label, fn] : llms) {
          auto call = [fn](const std::string& prompt) {
            py::gil_scoped_acquire gil;
            return fn(prompt).cast<std::string>();
          };
          owned.push_back(std::make_unique<FunctionClient>(call, label));
          ptrs.push_back(owned.back().get());
        }
        CoverageReport r = parse_report_text(report_text);
        auto sim = ScriptedSimRunner::from_json_text(sim_script);
        VerificationReport out;
        {
          py::gil_scoped_release release;
          out = refine(d, r, ptrs, sim.get(), c);
        }
        // the callables are destroyed with the GIL held
        owned.clear();
        return json_text(to_json(out));
      },
      py::arg("design"), py::arg("report_text"), py::arg("llms"), py::arg("sim_script"), py::arg("config") = py::dict());
}
