"""Verification suite runner and JSON/CSV report export."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import platform
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import __version__
from . import bergman_kernel as bk
from . import model_catalog as mc
from . import radial_geometry as rg
from . import section_norms as sn
from .config import RunConfig
from .errors import (
    DivergentIndexError,
    InconclusiveError,
    OverflowBudgetError,
    QuadratureBudgetError,
    ToleranceUnreachableError,
)
from .special import log_gamma

log = logging.getLogger(__name__)

PI = math.pi
SUITE_NAME = "partial-bergman-acceptance"

PASS, FAIL, XFAIL, INCONCLUSIVE, ERROR = "pass", "fail", "xfail", "inconclusive", "error"
STATUSES = (PASS, FAIL, XFAIL, INCONCLUSIVE, ERROR)

CSV_HEADER = ("check_id", "anchor", "expected", "measured", "tolerance", "pass", "runtime_ms")

# Published JSON schema (draft 2020-12) for exported reports.
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "VerificationReport",
    "type": "object",
    "required": ["suite", "checks", "environment", "overall_pass"],
    "additionalProperties": False,
    "properties": {
        "suite": {"type": "string"},
        "overall_pass": {"type": "boolean"},
        "environment": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": list(CSV_HEADER) + ["status", "detail"],
                "additionalProperties": False,
                "properties": {
                    "check_id": {"type": "string", "minLength": 1},
                    "anchor": {"type": "string", "minLength": 1},
                    "expected": {"type": ["number", "string"]},
                    "measured": {"type": ["number", "string", "null"]},
                    "tolerance": {"type": ["number", "string"]},
                    "pass": {"type": "boolean"},
                    "runtime_ms": {"type": "number", "minimum": 0},
                    "status": {"enum": list(STATUSES)},
                    "detail": {"type": "string"},
                },
            },
        },
    },
}

# Budget and convergence failures make a check inconclusive rather than failed.
_INCONCLUSIVE_ERRORS = (ToleranceUnreachableError, QuadratureBudgetError, InconclusiveError, OverflowBudgetError)


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    anchor: str
    expected: float | str
    measured: float | str | None
    tolerance: float
    passed: bool
    runtime_ms: float
    status: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "expected": self.expected,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "runtime_ms": self.runtime_ms,
            "status": self.status,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckRecord":
        return cls(
            check_id=d["check_id"],
            anchor=d["anchor"],
            expected=_restore(d["expected"]),
            measured=_restore(d["measured"]),
            tolerance=_restore(d["tolerance"]),
            passed=d["pass"],
            runtime_ms=d["runtime_ms"],
            status=d["status"],
            detail=d.get("detail", ""),
        )


@dataclass
class VerificationReport:
    suite: str
    checks: list[CheckRecord] = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_id(self, check_id: str) -> CheckRecord:
        for c in self.checks:
            if c.check_id == check_id:
                return c
        raise KeyError(check_id)

    def exit_code(self) -> int:
        """0 all pass (xfail counts), 1 any unexpected failure, 2 only inconclusive problems."""
        statuses = {c.status for c in self.checks}
        if statuses & {FAIL, ERROR}:
            return 1
        if INCONCLUSIVE in statuses:
            return 2
        return 0

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "checks": [c.to_dict() for c in self.checks],
            "environment": self.environment,
            "overall_pass": self.overall_pass,
        }


# --------------------------------------------------------------------------
# check definitions


@dataclass(frozen=True)
class Outcome:
    expected: float | str
    measured: float | str
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class Check:
    check_id: str
    anchor: str
    run: Callable[[RunConfig], Outcome]
    expect_failure: bool = False


def _close(expected: float, measured: float, tol: float, detail: str = "") -> Outcome:
    return Outcome(expected, measured, tol, abs(measured - expected) <= tol, detail)


def _worst(values, target):
    return max(values, key=lambda v: abs(v - target))


def _kernel_constant(m: int) -> Callable[[RunConfig], Outcome]:
    def run(cfg: RunConfig) -> Outcome:
        rep = bk.constancy_report(None, m, cfg.radii, cfg.kernel_tol, max_terms=cfg.max_terms)
        worst = _worst(rep.values, rep.reference_constant)
        tol = 100 * cfg.kernel_tol
        return Outcome(
            rep.reference_constant,
            worst,
            tol * rep.reference_constant,
            rep.max_relative_deviation < tol,
            f"max relative deviation {rep.max_relative_deviation:.3e} over {len(rep.values)} radii",
        )

    return run


def _convergent_indices():
    for m in range(3, 9):
        for j in range(13):
            for k in range(13):
                if j + k > m - 3:
                    yield m, j, k


def _norm_triple(cfg: RunConfig) -> Outcome:
    worst = 0.0
    where = None
    for m, j, k in _convergent_indices():
        closed = sn.norm_closed(m, j, k).approx
        quad = sn.norm_quadrature(m, j, k, max_subdivisions=cfg.quad_subdivisions).approx
        pairs = [(closed, quad)]
        i = sn.GradedIndex(m, j, k).grading
        if i is not None:
            exact = sn.graded_norm_rational(m, i, j)
            pairs += [(closed, exact), (quad, exact)]
        for a, b in pairs:
            err = float(abs(Fraction(a) - Fraction(b)) / Fraction(b))
            if err > worst:
                worst, where = err, (m, j, k)
    return Outcome(0.0, worst, cfg.norm_tol, worst <= cfg.norm_tol, f"largest pairwise relative gap at (m, j, k) = {where}")


def _norm_graded_exact(cfg: RunConfig) -> Outcome:
    mismatches = 0
    count = 0
    for m in range(3, 9):
        for i in range(5):
            for j in range(m + 3 * i + 1):
                count += 1
                if sn.graded_norm_rational(m, i, j) != sn.graded_norm_from_beta(m, i, j):
                    mismatches += 1
    examples = {(3, 0, 1): Fraction(1, 8), (3, 0, 0): Fraction(3, 8), (4, 1, 0): Fraction(1, 32), (6, 0, 3): Fraction(3, 1600)}
    for (m, i, j), want in examples.items():
        count += 1
        if sn.norm_exact_graded(m, i, j).exact != want:
            mismatches += 1
    return Outcome(0.0, float(mismatches), 0.0, mismatches == 0, f"{count} exact rational comparisons")


def _divergence_frontier(cfg: RunConfig) -> Outcome:
    missed = []
    count = 0
    for m in range(0, 9):
        for j in range(13):
            for k in range(13):
                if m >= 3 and j + k > m - 3:
                    continue
                count += 1
                for method in ("closed", "quadrature"):
                    try:
                        sn.norm(m, j, k, method)
                    except DivergentIndexError:
                        continue
                    missed.append((m, j, k, method))
    return Outcome(0.0, float(len(missed)), 0.0, not missed, f"{count} divergent indices, not raising: {missed[:5]}")


def _divergence_witness(cfg: RunConfig) -> Outcome:
    factor = 1e3
    ratios = []
    for m in (3, 4, 5):
        for s in range(m - 2):
            for j in range(s + 1):
                ratios.append(sn.divergence_witness(m, j, s - j, factor=factor).ratio)
    low = min(ratios)
    return Outcome(factor, low, 0.0, low > factor, f"smallest partial/neighbour ratio over {len(ratios)} indices; pass when measured > expected")


def _curvature(pot_factory, n: int, expected: float, scale: float) -> Callable[[RunConfig], Outcome]:
    def run(cfg: RunConfig) -> Outcome:
        pot = pot_factory()
        values = [rg.scalar_curvature(pot, r, n) for r in cfg.radii]
        return _close(expected, _worst(values, expected), cfg.curvature_tol * scale, f"{len(values)} radii")

    return run


def _invariant_value(cfg: RunConfig) -> Outcome:
    target = -960.0 * PI**2
    values = [rg.curvature_invariants(rg.punctured_disk(), r).combo for r in cfg.radii]
    return _close(target, _worst(values, target), 1e-6 * abs(target), "|R|^2 - 4|Ric|^2 of Phi*")


def _invariant_constancy(cfg: RunConfig) -> Outcome:
    values = [rg.curvature_invariants(rg.punctured_disk(), r).combo for r in cfg.radii]
    mean = math.fsum(values) / len(values)
    spread = (max(values) - min(values)) / abs(mean)
    return Outcome(0.0, spread, 1e-8, spread < 1e-8, "relative spread (max - min) / |mean| over the grid")


_STRICT_RADII = (0.1, 0.5)


def _strict_full_gap(cfg: RunConfig) -> Outcome:
    a, b = (bk.full_kernel(3, r, 1e-8, cfg.max_terms).value for r in _STRICT_RADII)
    gap = abs(a - b) / a
    return Outcome(1e-3, gap, 0.0, gap > 1e-3, f"full kernel {a:.6g} vs {b:.6g}; pass when measured > expected")


def _strict_graded(cfg: RunConfig) -> Outcome:
    a, b = (bk.graded_kernel(3, r, cfg.kernel_tol, cfg.max_terms).value for r in _STRICT_RADII)
    gap = abs(a - b) / a
    return Outcome(0.0, gap, 1e-8, gap < 1e-8, f"graded kernel {a:.17g} vs {b:.17g}")


def _radiality(cfg: RunConfig) -> Outcome:
    rng = random.Random(cfg.seed)
    worst = 0.0
    for r in cfg.radii:
        ref = bk.graded_kernel(3, r, cfg.kernel_tol, cfg.max_terms).value
        for _ in range(5):
            t = rng.random()
            ev = bk.graded_kernel(3, (t * r, (1.0 - t) * r), cfg.kernel_tol, cfg.max_terms, collapse=False)
            worst = max(worst, abs(ev.value - ref))
    tol = 2 * cfg.kernel_tol * float(bk.disk_constant(3))
    return Outcome(0.0, worst, tol, worst <= tol, f"5 seeded splittings per radius, seed {cfg.seed}")


def _product_check(model_factory) -> Callable[[RunConfig], Outcome]:
    def run(cfg: RunConfig) -> Outcome:
        model = model_factory(cfg)
        m0 = model.min_level
        violations = 0
        headline = None
        for m in range(m0, m0 + 3):
            want = float(mc.expected_constant(model, m))
            for r in cfg.radii:
                ev = mc.product_kernel_at(model, m, r, cfg.kernel_tol, cfg.max_terms)
                excess = abs(ev.value - want) - ev.tail_bound
                if excess > 0:
                    violations += 1
                if m == m0 and (headline is None or excess > headline[0]):
                    headline = (excess, ev.value, ev.tail_bound)
        _, value, bound = headline
        return Outcome(
            float(mc.expected_constant(model, m0)),
            value,
            bound,
            violations == 0,
            f"{model.describe()}; levels {m0}..{m0 + 2}; {violations} evaluations outside their propagated bound",
        )

    return run


def _theorem_curvature(sign: str, n: int) -> Callable[[RunConfig], Outcome]:
    def run(cfg: RunConfig) -> Outcome:
        model = mc.theorem_instance(n, sign)
        expected = model.scalar_curvature
        values = [math.fsum(f.scalar_curvature_at(r) for f in model.factors) for r in cfg.radii]
        return _close(expected, _worst(values, expected), cfg.curvature_tol, f"{model.describe()}; s/pi = {model.scalar_curvature_over_pi()}")

    return run


def _generating(r: float) -> Callable[[RunConfig], Outcome]:
    def run(cfg: RunConfig) -> Outcome:
        res = bk.generating_check(3, r, 200)
        ok = res.residual < 1e-12 and res.residual <= res.tail_bound
        return Outcome(0.0, res.residual, 1e-12, ok, f"m=3, i_max=200, reported bound {res.tail_bound:.3e}")

    return run


def _completeness(endpoint: str, expected: str) -> Callable[[RunConfig], Outcome]:
    def run(cfg: RunConfig) -> Outcome:
        got = rg.radial_completeness(rg.punctured_disk(), endpoint)
        return Outcome(expected, got, 0.0, got == expected)

    return run


_RECURRENCE_POINTS = (1 / 3, 2 / 3, 1.5, 7.25)


def _lgamma_recurrence(cfg: RunConfig) -> Outcome:
    worst = max(abs(log_gamma(x + 1) - log_gamma(x) - math.log(x)) for x in _RECURRENCE_POINTS)
    return Outcome(0.0, worst, 1e-13, worst < 1e-13, f"x in {list(_RECURRENCE_POINTS)}")


def _lgamma_reflection(cfg: RunConfig) -> Outcome:
    worst = 0.0
    for x in (1 / 3, 2 / 3, 0.25, 0.5):
        lhs = log_gamma(x) + log_gamma(1 - x)
        rhs = math.log(PI / math.sin(PI * x))
        worst = max(worst, abs(math.expm1(lhs - rhs)))
    return Outcome(0.0, worst, 1e-13, worst < 1e-13, "relative residual of Gamma(x) Gamma(1-x) = pi / sin(pi x)")


def _full_constancy(cfg: RunConfig) -> Outcome:
    rep = bk.constancy_report(None, 3, cfg.radii, 1e-8, subspace=bk.FULL, max_terms=cfg.max_terms)
    tol = 100 * cfg.kernel_tol
    return Outcome(0.0, rep.max_deviation_from_mean, tol, rep.max_deviation_from_mean < tol, "full-space kernel, relative deviation from grid mean")


def build_checks(cfg: RunConfig) -> list[Check]:
    k_anchor = "graded kernel constant C_m = (4/3)(m-1)(m-2)"
    checks = [Check(f"kernel_constant_m{m}", k_anchor, _kernel_constant(m)) for m in (3, 4, 5, 8)]
    checks += [
        Check("kernel_radiality", "graded kernel depends on |z|^2 only", _radiality),
        Check("norm_triple_agreement", "monomial norm (3/4) j! k! / (j+k+1)! * Beta-form radial integral", _norm_triple),
        Check("norm_graded_exact", "graded norm 3 / (4 (m-1)(m-2)) / (C(m+3i, j) C(m+i-1, i))", _norm_graded_exact),
        Check("divergence_frontier", "norm finite iff m >= 3 and j + k > m - 3", _divergence_frontier),
        Check("divergence_witness", "norm finite iff m >= 3 and j + k > m - 3", _divergence_witness),
        Check("scalar_curvature_phi_star", "s(g*) = -24 pi", _curvature(rg.punctured_disk, 2, -24 * PI, 24 * PI)),
    ]
    for mu in (3, 4):
        checks.append(
            Check(
                f"scalar_curvature_family_m{mu}",
                "s = -24 pi / m for the family Phi(m, lambda, xi)",
                _curvature(lambda mu=mu: rg.family_potential(mu, 2.0, 1.0), 2, -24 * PI / mu, 24 * PI / mu),
            )
        )
    checks += [
        Check("scalar_curvature_fubini_study", "s(FS on CP^1) = 8 pi", _curvature(rg.fubini_study, 1, 8 * PI, 8 * PI)),
        Check("scalar_curvature_flat", "s(flat) = 0", _curvature(lambda: rg.flat(), 2, 0.0, 24 * PI)),
        Check("curvature_invariant_value", "|R|^2 - 4|Ric|^2 = -960 pi^2 for g*", _invariant_value),
        Check("curvature_invariant_constancy", "|R|^2 - 4|Ric|^2 constant for g*", _invariant_constancy),
        Check("strictness_full_gap", "full-space kernel is not constant (strictness)", _strict_full_gap),
        Check("strictness_graded_agreement", "graded kernel constant at r = 0.1 and r = 0.5", _strict_graded),
    ]
    instances = (("negative", 3), ("zero", 4), ("positive", 4))
    for sign, n in instances:
        checks.append(
            Check(
                f"product_lemma_{sign}",
                "product of partially balanced metrics: T1(x) T2(y) = C1 C2",
                _product_check(lambda cfg, sign=sign, n=n: mc.theorem_instance(n, sign)),
            )
        )
    s_anchor = {"negative": "s = -24 pi", "zero": "s = 0", "positive": "s = 2 pi"}
    for sign, n in instances:
        checks.append(Check(f"theorem_curvature_{sign}", f"cscK product instance with {s_anchor[sign]}", _theorem_curvature(sign, n)))
    checks += [Check(f"generating_identity_r{r}", "binomial series sum C(m+i-1, i) x^i = (1-x)^(-m)", _generating(r)) for r in (0.3, 0.5, 0.9)]
    checks += [
        Check("completeness_inner", "g* is not complete at the origin", _completeness("inner", rg.FINITE)),
        Check("completeness_outer", "g* is complete at |z| = 1", _completeness("outer", rg.INFINITE)),
        Check("log_gamma_recurrence", "log Gamma(x+1) = log Gamma(x) + log x", _lgamma_recurrence),
        Check("log_gamma_reflection", "Gamma(x) Gamma(1-x) = pi / sin(pi x)", _lgamma_reflection),
    ]
    if cfg.model is not None:
        checks.append(
            Check(
                "model_constancy",
                "product of partially balanced metrics: T1(x) T2(y) = C1 C2",
                _product_check(lambda c: mc.model_from_dict(c.model)),
            )
        )
    if cfg.full_constancy:
        checks.append(Check("full_constancy", "full-space kernel is not constant (strictness)", _full_constancy, expect_failure=True))
    return checks


def _execute(check: Check, cfg: RunConfig) -> CheckRecord:
    start = time.perf_counter()
    try:
        out = check.run(cfg)
    except _INCONCLUSIVE_ERRORS as exc:
        ms = (time.perf_counter() - start) * 1e3
        log.info("check %s inconclusive: %s", check.check_id, exc)
        return CheckRecord(check.check_id, check.anchor, "", None, 0.0, False, ms, INCONCLUSIVE, str(exc))
    except Exception as exc:  # a bug or bad input; recorded, not thrown
        ms = (time.perf_counter() - start) * 1e3
        log.error("check %s raised %s: %s", check.check_id, type(exc).__name__, exc)
        return CheckRecord(check.check_id, check.anchor, "", None, 0.0, False, ms, ERROR, f"{type(exc).__name__}: {exc}")
    ms = (time.perf_counter() - start) * 1e3
    if check.expect_failure:
        status = XFAIL if not out.passed else FAIL
        passed = not out.passed
        detail = out.detail + ("; expected failure observed" if passed else "; expected failure did not occur")
    else:
        status = PASS if out.passed else FAIL
        passed = out.passed
        detail = out.detail
    return CheckRecord(check.check_id, check.anchor, out.expected, out.measured, out.tolerance, passed, ms, status, detail)


def run_checks(checks: list[Check], cfg: RunConfig, workers: int = 4, suite: str = SUITE_NAME) -> VerificationReport:
    """Run ``checks`` concurrently; records come back in definition order."""
    env = cfg.environment()
    env.update({"python": platform.python_version(), "package_version": __version__, "workers": workers})
    if not checks:
        return VerificationReport(suite, [], env)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {c.check_id: pool.submit(_execute, c, cfg) for c in checks}
        records = [futures[c.check_id].result() for c in checks]
    return VerificationReport(suite, records, env)


def run_verification_suite(cfg: RunConfig | None = None, workers: int = 4) -> VerificationReport:
    cfg = cfg or RunConfig()
    return run_checks(build_checks(cfg), cfg, workers)


# --------------------------------------------------------------------------
# export


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    s = format(x, ".17g")
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _restore(v):
    if v == "NaN":
        return math.nan
    if v == "Infinity":
        return math.inf
    if v == "-Infinity":
        return -math.inf
    return v


def to_json_text(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits (the stdlib uses shortest repr)."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json_text(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json_text(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _validate(doc: dict) -> None:
    # Cheap structural check against REPORT_SCHEMA; a failure here is a bug.
    if set(doc) != set(REPORT_SCHEMA["required"]):
        raise AssertionError(f"report keys {sorted(doc)} do not match the schema")
    need = set(REPORT_SCHEMA["properties"]["checks"]["items"]["required"])
    for rec in doc["checks"]:
        if set(rec) != need:
            raise AssertionError(f"check record keys {sorted(rec)} do not match the schema")
        if not rec["anchor"] or not rec["check_id"]:
            raise AssertionError("check records need a nonempty id and anchor")
        if rec["status"] not in STATUSES:
            raise AssertionError(f"unknown status {rec['status']!r}")
    if doc["overall_pass"] != all(r["pass"] for r in doc["checks"]):
        raise AssertionError("overall_pass is not the conjunction of the check flags")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v).strip('"')
    return "" if v is None else str(v)


def report_csv_text(report: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in report.checks:
        d = c.to_dict()
        w.writerow([_csv_cell(d[k]) for k in CSV_HEADER])
    return buf.getvalue()


def export_report(report: VerificationReport, fmt: str, path) -> None:
    """Write ``report`` as ``json`` or ``csv`` to ``path``."""
    if fmt == "json":
        doc = report.to_dict()
        _validate(doc)
        text = to_json_text(doc) + "\n"
    elif fmt == "csv":
        text = report_csv_text(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    Path(path).write_text(text, encoding="utf-8")


def load_report(path) -> VerificationReport:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return VerificationReport(
        suite=doc["suite"],
        checks=[CheckRecord.from_dict(c) for c in doc["checks"]],
        environment=doc["environment"],
    )
