import csv
import json

import pytest

from gmsphere.cli import ConfigError, RunConfig, main, run

SMALL = ["--lmax", "8", "--cross-lmax", "6", "-q"]


def strip_timing(report):
    report = dict(report)
    report.pop("timing")
    return report


def test_small_smoke_run_scales_tolerances():
    rep = run(RunConfig(l_max=8, suites=("casimir", "rotation"), cross_route_lmax=6))
    assert rep["schema_version"] == 1
    assert all(c["passed"] for c in rep["checks"])
    assert all("l_max < 12" in c["tolerance_source"] for c in rep["checks"])
    assert rep["reference_values"][0]["published"] == -0.25
    assert rep["reference_values"][0]["measured"] == pytest.approx(-1.0)


def test_scan_only_report(tmp_path):
    csv_path = tmp_path / "scan.csv"
    rep = run(RunConfig(l_max=8, suites=("scan",), csv_path=str(csv_path)))
    assert rep["suites"] == ["scan"]
    assert rep["scan"]["argmin"] == [1.0, 0.0]
    assert "literature" not in rep
    rows = list(csv.reader(csv_path.open()))
    assert rows[0] == ["alpha", "beta", "R1", "R2"]
    assert len(rows) == 1 + 21 * 11


def test_deterministic_reports(tmp_path):
    path = tmp_path / "r.json"
    texts = []
    for _ in range(2):
        assert main(SMALL + ["--suite", "gamma", "--suite", "anomaly", "--report", str(path)]) == 0
        texts.append(json.loads(path.read_text()))
    assert strip_timing(texts[0]) == strip_timing(texts[1])
    assert list(texts[0])[:4] == ["schema_version", "config", "basis_ordering", "suites"]


def test_suite_order_is_canonical():
    rep = run(RunConfig(l_max=8, suites=("eigen", "casimir")))
    assert rep["suites"] == ["casimir", "eigen"]


def test_tolerance_override_recorded():
    rep = run(RunConfig(l_max=8, suites=("casimir",), tolerances={"casimir.C1": 1e-20}))
    c1 = [c for c in rep["checks"] if c["name"] == "casimir.C1"][0]
    assert c1["tolerance"] == 1e-20 and c1["tolerance_source"] == "override"
    assert not rep["passed"]


@pytest.mark.parametrize("argv", [
    ["--suite", "bogus"],
    ["--lmax", "6", "--buffer", "2"],
    ["--tol", "nope=1"],
    ["--tol", "casimir.C1"],
    ["--scan-alpha", "1:0:5"],
    ["--hbar", "-1"],
    ["--report", "/nonexistent-dir/x.json"],
])
def test_usage_errors_exit_2(argv):
    try:
        code = main(SMALL + argv)
    except SystemExit as e:
        code = e.code
    assert code == 2


def test_failing_check_exits_1():
    assert main(SMALL + ["--suite", "casimir", "--tol", "casimir.C1=1e-30"]) == 1


def test_config_invariant():
    with pytest.raises(ConfigError):
        RunConfig(l_max=6, buffer_algebraic=2).validate()
    RunConfig(l_max=7, buffer_algebraic=2).validate()


def test_resolution_problem_becomes_failed_check(monkeypatch):
    from gmsphere import dirac
    from gmsphere.grid import ResolutionError

    def boom(*a, **k):
        raise ResolutionError("grid too coarse")

    monkeypatch.setattr(dirac, "check_rotation_conjugation", boom)
    rep = run(RunConfig(l_max=8, suites=("rotation",)))
    assert not rep["passed"]
    assert rep["checks"][0]["name"] == "rotation.error"
    assert "grid too coarse" in rep["checks"][0]["notes"]
