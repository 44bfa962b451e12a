import csv
import json
import math
import random

import jsonschema
import pytest

from partial_bergman import report as rp
from partial_bergman.config import RunConfig
from partial_bergman.errors import QuadratureBudgetError, ToleranceUnreachableError

FAST = RunConfig(radii=(0.1, 0.4, 0.8))


def fixed(expected, measured, tol, ok):
    return lambda cfg: rp.Outcome(expected, measured, tol, ok)


def raising(exc):
    def run(cfg):
        raise exc

    return run


def one_check_report():
    return rp.run_checks([rp.Check("c1", "anchor one", fixed(1.0, 1.0 + 1e-12, 1e-9, True))], FAST)


def test_one_passing_check_csv_has_two_lines(tmp_path):
    out = tmp_path / "r.csv"
    rp.export_report(one_check_report(), "csv", out)
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == "check_id,anchor,expected,measured,tolerance,pass,runtime_ms"


def test_json_round_trip_reproduces_floats(tmp_path):
    rng = random.Random(7)
    values = [rng.uniform(-1e3, 1e3) for _ in range(50)] + [0.1, 1 / 3, 2.0, 1e-300, 5e-324, 1.7976931348623157e308, -0.0]
    checks = [rp.Check(f"c{i}", "anchor", fixed(v, v * (1 + 1e-16), abs(v) * 1e-12, True)) for i, v in enumerate(values)]
    report = rp.run_checks(checks, FAST)
    out = tmp_path / "r.json"
    rp.export_report(report, "json", out)
    back = rp.load_report(out)
    for a, b in zip(report.checks, back.checks):
        assert a == b
        assert type(b.expected) is float
    assert back.overall_pass is True


def test_non_finite_values_survive(tmp_path):
    report = rp.run_checks([rp.Check("inf", "anchor", fixed(math.inf, -math.inf, math.inf, True))], FAST)
    out = tmp_path / "r.json"
    rp.export_report(report, "json", out)
    json.loads(out.read_text())
    rec = rp.load_report(out).checks[0]
    assert rec.expected == math.inf and rec.measured == -math.inf


def test_seventeen_significant_digits(tmp_path):
    assert rp.to_json_text(0.1) == "0.10000000000000001"
    assert rp.to_json_text(3.0) == "3.0"
    assert rp.to_json_text([]) == "[]" and rp.to_json_text({}) == "{}"


def test_empty_suite(tmp_path):
    report = rp.run_checks([], FAST)
    assert report.overall_pass and report.exit_code() == 0
    out = tmp_path / "r.json"
    rp.export_report(report, "json", out)
    doc = json.loads(out.read_text())
    assert doc["checks"] == [] and doc["overall_pass"] is True
    jsonschema.validate(doc, rp.REPORT_SCHEMA)


def test_schema_validation_of_mixed_report(tmp_path):
    checks = [
        rp.Check("ok", "a", fixed(1.0, 1.0, 0.0, True)),
        rp.Check("bad", "a", fixed(1.0, 2.0, 0.0, False)),
        rp.Check("xf", "a", fixed(0.0, 3.0, 1e-8, False), expect_failure=True),
        rp.Check("xp", "a", fixed(0.0, 0.0, 1e-8, True), expect_failure=True),
        rp.Check("budget", "a", raising(ToleranceUnreachableError("out of terms"))),
        rp.Check("quad", "a", raising(QuadratureBudgetError("out of panels"))),
        rp.Check("bug", "a", raising(ZeroDivisionError("oops"))),
        rp.Check("cat", "a", fixed("finite-distance", "finite-distance", 0.0, True)),
    ]
    report = rp.run_checks(checks, FAST)
    status = {c.check_id: c.status for c in report.checks}
    assert status == {
        "ok": "pass",
        "bad": "fail",
        "xf": "xfail",
        "xp": "fail",
        "budget": "inconclusive",
        "quad": "inconclusive",
        "bug": "error",
        "cat": "pass",
    }
    assert report.by_id("xf").passed and not report.by_id("xp").passed
    out = tmp_path / "r.json"
    rp.export_report(report, "json", out)
    jsonschema.validate(json.loads(out.read_text()), rp.REPORT_SCHEMA)
    assert report.overall_pass is False and report.exit_code() == 1


def test_exit_codes():
    passing = rp.run_checks([rp.Check("xf", "a", fixed(0.0, 1.0, 0.0, False), expect_failure=True)], FAST)
    assert passing.overall_pass and passing.exit_code() == 0
    inconclusive = rp.run_checks([rp.Check("b", "a", raising(ToleranceUnreachableError("x")))], FAST)
    assert inconclusive.exit_code() == 2


def test_stable_order_regardless_of_completion():
    import time

    def slow(delay):
        def run(cfg):
            time.sleep(delay)
            return rp.Outcome(0.0, delay, 1.0, True)

        return run

    checks = [rp.Check(f"c{i}", "a", slow(d)) for i, d in enumerate([0.05, 0.0, 0.03, 0.01])]
    report = rp.run_checks(checks, FAST, workers=4)
    assert [c.check_id for c in report.checks] == ["c0", "c1", "c2", "c3"]


def test_every_suite_check_has_anchor_and_tolerance():
    checks = rp.build_checks(RunConfig(full_constancy=True, model={"factors": []}))
    ids = [c.check_id for c in checks]
    assert len(ids) == len(set(ids))
    assert all(c.anchor for c in checks)
    assert "full_constancy" in ids and "model_constancy" in ids


def csv_without_runtime(text):
    rows = list(csv.reader(text.splitlines()))
    idx = rows[0].index("runtime_ms")
    return [r[:idx] + r[idx + 1 :] for r in rows]


def test_workers_do_not_change_results():
    cfg = RunConfig(radii=(0.1, 0.5, 0.9))
    checks = [c for c in rp.build_checks(cfg) if not c.check_id.startswith(("norm_triple", "kernel_radiality"))]
    one = rp.run_checks(checks, cfg, workers=1)
    many = rp.run_checks(checks, cfg, workers=6)
    assert csv_without_runtime(rp.report_csv_text(one)) == csv_without_runtime(rp.report_csv_text(many))


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        rp.export_report(one_check_report(), "xml", tmp_path / "r.xml")


def test_internal_schema_guard():
    report = one_check_report()
    doc = report.to_dict()
    doc["extra"] = 1
    with pytest.raises(AssertionError):
        rp._validate(doc)
