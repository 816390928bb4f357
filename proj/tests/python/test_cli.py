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
import os
import subprocess

import pytest

jsonschema = pytest.importorskip("jsonschema")

HELP_PATHS = [
    [],
    ["dump-model"],
    ["trace"],
    ["patch"],
    ["analyze"],
    ["ir"],
    ["ir", "validate"],
    ["specialize"],
    ["refine"],
    ["report"],
]


def run(cli, *args, cwd=None):
    return subprocess.run([cli, *map(str, args)], capture_output=True, text=True, timeout=60, cwd=cwd)


def validate(schema_dir, name, doc):
    schema = json.loads((schema_dir / (name + ".schema.json")).read_text())
    jsonschema.Draft202012Validator(schema).validate(doc)


def error_of(proc):
    lines = [l for l in proc.stderr.splitlines() if l.strip()]
    return json.loads(lines[-1])


@pytest.mark.parametrize("path", HELP_PATHS, ids=lambda p: "-".join(p) or "root")
def test_help_matches_golden(cli, golden_dir, path):
    proc = run(cli, *path, "--help")
    assert proc.returncode == 0
    golden = golden_dir / "help" / (("_".join(path) or "uvmarvel") + ".txt")
    if os.environ.get("UVMARVEL_UPDATE_GOLDENS") == "1":
        golden.write_text(proc.stdout)
    assert proc.stdout == golden.read_text()


def test_every_subcommand_has_json_flag(cli):
    for path in HELP_PATHS:
        if path in ([], ["ir"]):
            continue
        assert "--json" in run(cli, *path, "--help").stdout


@pytest.fixture(scope="module")
def outputs(cli, data_dir, tmp_path_factory):
    """JSON produced by each subcommand on the bundled data."""
    tmp = tmp_path_factory.mktemp("cli")
    toy = data_dir / "designs" / "toy_sub"
    scen = data_dir / "scenarios" / "refine_toy"
    calls = {
        "dump-model": ["dump-model", "--design", toy, "--json"],
        "trace": ["trace", "--design", toy, "--seed", "handshake.ack", "--json"],
        "patch": ["patch", "--design", toy, "--seed", "handshake.ack", "--json"],
        "patch-out": ["patch", "--design", toy, "--seed", "handshake.ack", "-o", tmp / "filtered", "--json"],
        "analyze": ["analyze", "--report", data_dir / "coverage" / "toy_sub.cov", "--design", toy, "--json"],
        "ir-validate": ["ir", "validate", data_dir / "ir" / "pwrctrl.ir", "--design",
                        data_dir / "designs" / "pwrctrl", "--json"],
        "specialize": ["specialize", "--ir", data_dir / "ir" / "pwrctrl.ir", "--protocol-lib",
                       data_dir / "protocols", "--llm", "mock:%s" % (data_dir / "scenarios" / "specialize_pwrctrl.json"),
                       "-o", tmp / "tb", "--json"],
        "refine": ["refine", "--design", toy, "--report", scen / "coverage.cov",
                   "--llm", "a=mock:%s" % (scen / "llm_a.json"), "--llm", "b=mock:%s" % (scen / "llm_b.json"),
                   "--llm", "c=mock:%s" % (scen / "llm_c.json"), "--sim", "mock:%s" % (scen / "sim.json"),
                   "--points-per-iter", 5, "-o", tmp / "report.json", "--json"],
    }
    out = {}
    for name, args in calls.items():
        proc = run(cli, *args)
        assert proc.returncode == 0, (name, proc.stderr)
        out[name] = json.loads(proc.stdout)
    proc = run(cli, "report", "--input", tmp / "report.json", "--json")
    assert proc.returncode == 0, proc.stderr
    out["report"] = json.loads(proc.stdout)
    srg = tmp / "srg.json"
    srg.write_text(json.dumps([{"testbench_id": "t%d" % i, "compiled": True, "simulated": True,
                                "checkers_passed": i != 0} for i in range(15)]))
    proc = run(cli, "report", "--srg", srg, "--json")
    assert proc.returncode == 0, proc.stderr
    out["report-srg"] = json.loads(proc.stdout)
    out["provenance"] = json.loads((tmp / "filtered" / "provenance.json").read_text())
    out["_tmp"] = tmp
    return out


@pytest.mark.parametrize("name,schema", [
    ("dump-model", "dump-model"),
    ("trace", "trace"),
    ("patch", "patch"),
    ("patch-out", "patch"),
    ("provenance", "provenance"),
    ("analyze", "analyze"),
    ("ir-validate", "ir-validate"),
    ("specialize", "specialize"),
    ("refine", "refine"),
    ("report", "report"),
    ("report-srg", "report"),
])
def test_json_output_matches_schema(outputs, schema_dir, name, schema):
    validate(schema_dir, schema, outputs[name])


def test_pipeline_results(outputs):
    assert outputs["refine"]["final_score"] == 100
    assert outputs["report-srg"]["srg"] == pytest.approx(93.33, abs=0.005)
    assert outputs["ir-validate"]["findings"] == []
    tb = outputs["_tmp"] / "tb"
    assert len(list(tb.glob("*.sv"))) >= 4


def test_domain_error_exit_and_json(cli, data_dir, schema_dir):
    proc = run(cli, "trace", "--design", data_dir / "designs" / "toy_sub", "--seed", "toy_top.u_zz.ack", "--json")
    assert proc.returncode == 1
    err = error_of(proc)
    validate(schema_dir, "error", err)
    assert err["error"]["code"] == "InvalidArgument"


def test_missing_file_is_domain_error(cli, schema_dir, tmp_path):
    proc = run(cli, "analyze", "--report", tmp_path / "absent.cov", "--json")
    assert proc.returncode == 1
    validate(schema_dir, "error", error_of(proc))


def test_syntax_error_carries_location(cli, schema_dir, tmp_path):
    bad = tmp_path / "bad.v"
    bad.write_text("module m(input a;\nendmodule\n")
    proc = run(cli, "dump-model", "--design", bad, "--top", "m", "--json")
    assert proc.returncode == 1
    err = error_of(proc)
    validate(schema_dir, "error", err)
    assert err["error"]["code"] == "SyntaxError"
    assert "line" in err["error"]


def test_unknown_subcommand_is_usage_error(cli):
    proc = run(cli, "frobnicate")
    assert proc.returncode == 2
    assert "frobnicate" in proc.stderr


def test_missing_required_option_is_usage_error(cli, data_dir):
    scen = data_dir / "scenarios" / "refine_toy"
    proc = run(cli, "refine", "--design", data_dir / "designs" / "toy_sub", "--report", scen / "coverage.cov",
               "--llm", "a=mock:x", "--llm", "b=mock:x", "--llm", "c=mock:x")
    assert proc.returncode == 2
    assert "--sim" in proc.stderr


def test_no_subcommand_is_usage_error(cli):
    assert run(cli).returncode == 2


def test_config_file_precedence(cli, data_dir, tmp_path):
    scen = data_dir / "scenarios" / "refine_toy"
    cfg = tmp_path / "uvmarvel.toml"
    cfg.write_text("[refine]\npoints-per-iter = 5\ntarget = 100\n")
    base = ["--config", cfg, "refine", "--design", data_dir / "designs" / "toy_sub", "--report",
            scen / "coverage.cov", "--llm", "a=mock:%s" % (scen / "llm_a.json"),
            "--llm", "b=mock:%s" % (scen / "llm_b.json"), "--llm", "c=mock:%s" % (scen / "llm_c.json"),
            "--sim", "mock:%s" % (scen / "sim.json"), "--json"]
    from_file = json.loads(run(cli, *base).stdout)
    assert from_file["final_score"] == 100
    flagged = run(cli, *base, "--max-iters", 0)
    assert flagged.returncode != 0 or json.loads(flagged.stdout)["stop_reason"] == "iteration limit"
    cfg.write_text("[refine]\nno-such-option = 1\n")
    assert run(cli, *base).returncode == 2


def test_text_output_is_default(cli, data_dir):
    proc = run(cli, "analyze", "--report", data_dir / "coverage" / "toy_sub.cov")
    assert proc.returncode == 0
    with pytest.raises(ValueError):
        json.loads(proc.stdout)
