# Copyright 2026 The UVMarvel Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import re

import pytest

uvmarvel = pytest.importorskip("uvmarvel")


def toy_design(data_dir):
    files = sorted(str(p) for p in (data_dir / "designs" / "toy_sub").glob("*.v"))
    return uvmarvel.Design.from_files(files, "toy_top")


def test_design_loads(data_dir):
    d = toy_design(data_dir)
    assert d.top == "toy_top"
    assert d.module_names == ["fsm", "handshake", "toy_top"]
    assert d.statement_count == 63
    assert json.loads(d.to_json())["top"] == "toy_top"


def test_from_sources_and_parse_error():
    d = uvmarvel.Design.from_sources([("m.v", "module m(input a, output b); assign b = a; endmodule")], "m")
    assert d.statement_count == 1
    with pytest.raises(uvmarvel.Error) as info:
        uvmarvel.Design.from_sources([("bad.v", "module m(input a; endmodule")], "m")
    assert info.value.code == "SyntaxError"


def test_trace_then_patch(data_dir):
    d = toy_design(data_dir)
    s = uvmarvel.trace(d, ["handshake.ack"])
    assert s["entry_ports"] == ["clk", "req_in", "rst_n"]
    f = uvmarvel.patch(d, s)
    assert {x["module"] for x in f["files"]} <= {"fsm", "handshake", "toy_top"}
    assert f["emitted_statements"]


def test_bad_seed_raises_with_code(data_dir):
    d = toy_design(data_dir)
    with pytest.raises(uvmarvel.Error) as info:
        uvmarvel.trace(d, ["toy_top.u_zz.ack"])
    assert info.value.code == "InvalidArgument"


def test_coverage_round_trip(data_dir):
    text = (data_dir / "coverage" / "toy_sub.cov").read_text()
    report = uvmarvel.parse_coverage(text)
    again = uvmarvel.parse_coverage(uvmarvel.serialize_coverage(text))
    assert report["items"] == again["items"]
    summary = uvmarvel.uncovered(text, budget=3)
    assert all(len(g["items"]) <= 3 for g in summary["groups"])


def test_ir_validate(data_dir):
    text = (data_dir / "ir" / "pwrctrl.ir").read_text()
    assert uvmarvel.parse_ir(text)["interfaces"]
    assert uvmarvel.validate_ir(text) == []


def test_compute_srg():
    rows = [("t%d" % i, True, True, i != 0) for i in range(15)]
    assert uvmarvel.compute_srg(rows) == pytest.approx(93.33, abs=0.005)
    with pytest.raises(uvmarvel.Error) as info:
        uvmarvel.compute_srg([])
    assert info.value.code == "EmptyResults"


def test_verify_frozen_regions():
    skel = "class x;\n//<<EDIT body fields>>\n  int y;\n//<<END body>>\nendclass\n"
    ok = skel.replace("  int y;", "  int y;\n  int z;")
    assert uvmarvel.verify_frozen_regions(skel, ok) == []
    assert uvmarvel.verify_frozen_regions(skel, ok.replace("endclass\n", "")) != []


def test_refine_with_python_callables(data_dir):
    scen = data_dir / "scenarios" / "refine_toy"
    d = toy_design(data_dir)
    report = (scen / "coverage.cov").read_text()
    sim = json.loads((scen / "sim.json").read_text())
    seen = []

    def model(name):
        transcript = json.loads((scen / ("llm_%s.json" % name)).read_text())

        def call(prompt):
            key = re.search(r"^# key: (\S+)", prompt, re.M).group(1)
            seen.append(key)
            return transcript.get("@" + key, transcript.get("default", "SEQUENCE\nnothing"))

        return (name, call)

    out = uvmarvel.refine(d, report, [model("a"), model("b"), model("c")], sim, points_per_iter=5)
    assert out["final_score"] == 100
    assert out["stop_reason"] == "target reached"
    assert len(out["waivers"]) == 2
    assert len(seen) == out["llm_calls"] == 16


def test_refine_records_callable_failures(data_dir):
    scen = data_dir / "scenarios" / "refine_toy"
    d = toy_design(data_dir)

    def boom(prompt):
        raise RuntimeError("model offline")

    out = uvmarvel.refine(d, (scen / "coverage.cov").read_text(), [("a", boom)] * 3, {"rules": []}, max_iters=2)
    assert out["stop_reason"] in ("no improvement", "iteration limit")
    assert any("model offline" in e for e in json.dumps(out["error_logs"]).split("\\n"))
