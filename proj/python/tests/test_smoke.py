import json
import os
import pathlib

import pytest

import ssurb

SCENARIOS = pathlib.Path(os.environ.get("SSURB_SCENARIO_DIR", pathlib.Path(__file__).parents[2] / "scenarios"))


def small(**extra):
    cfg = {"n": 3, "bufferUnitSize": 2, "seed": 7, "maxSteps": 20000,
           "workload": {"perNode": 2, "start": 10, "spacing": 40}}
    cfg.update(extra)
    return cfg


def test_parse_config_fills_defaults():
    cfg = ssurb.parse_config({"n": 4})
    assert cfg["n"] == 4
    assert cfg["bufferUnitSize"] == 4
    assert ssurb.parse_config(json.dumps(cfg)) == cfg


def test_config_error_names_field():
    with pytest.raises(ssurb.ConfigError) as info:
        ssurb.parse_config({"faults": {"omissionProb": 1.5}})
    assert info.value.path == "faults.omissionProb"
    assert isinstance(info.value, ValueError)


def test_run_passes_and_is_deterministic():
    a = ssurb.run(small())
    b = ssurb.run(small())
    assert a.passed
    assert a.report["endStatus"] == "complete"
    assert a.digest == b.digest
    assert a.digest == ssurb.trace_digest(a.trace)
    assert ssurb.run(small(seed=8)).digest != a.digest


def test_check_matches_run_report():
    out = ssurb.run(small())
    report, passed = ssurb.check(out.trace)
    assert passed
    assert report == out.report


def test_check_reports_bad_line():
    lines = ssurb.run(small()).trace.splitlines()
    lines[3] = "{not json"
    with pytest.raises(ssurb.TraceFormatError) as info:
        ssurb.check("\n".join(lines) + "\n")
    assert info.value.line == 4


def test_scenario_files_run():
    for path in sorted(SCENARIOS.glob("*.json")):
        out = ssurb.run(path.read_text())
        assert out.passed, path.name


def test_sweep_cells():
    summary = ssurb.sweep(small(), seeds="2", vary=["bufferUnitSize=1,4"], threads=2)
    assert len(summary["cells"]) == 2
    assert all(cell["failures"] == 0 for cell in summary["cells"])
