"""Acceptance criteria 1 to 11, each at its stated tolerance.

Each test records a one-line verdict that the conftest prints in the
terminal summary.
"""
import csv
import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_LINES
from partial_bergman import bergman_kernel as bk
from partial_bergman import model_catalog as mc
from partial_bergman import radial_geometry as rg
from partial_bergman import section_norms as sn
from partial_bergman.config import RunConfig
from partial_bergman.errors import DivergentIndexError
from partial_bergman.special import log_gamma

PI = math.pi
GRID = RunConfig().radii


def record(n, ok, msg):
    ACCEPTANCE_LINES[n] = (bool(ok), msg)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {msg}")
    assert ok, msg


def test_criterion_01_kernel_constant():
    t0 = time.perf_counter()
    worst = {m: bk.constancy_report(None, m, GRID, 1e-10).max_relative_deviation for m in (3, 4, 5, 8)}
    elapsed = time.perf_counter() - t0
    consts = [bk.disk_constant(m) for m in (3, 4, 5, 8)]
    ok = max(worst.values()) < 1e-8 and elapsed < 5 and consts == [Fraction(8, 3), 8, 16, 56]
    record(1, ok, f"graded kernel = 8/3, 8, 16, 56; max rel dev {max(worst.values()):.2e} (< 1e-8); {elapsed:.2f} s (< 5 s)")


def test_criterion_02_norm_triple_agreement():
    t0 = time.perf_counter()
    worst = 0.0
    exact_ok = True
    count = 0
    for m in range(3, 9):
        for j in range(13):
            for k in range(13):
                if j + k <= m - 3:
                    continue
                count += 1
                closed = sn.norm_closed(m, j, k).approx
                quadv = sn.norm_quadrature(m, j, k).approx
                worst = max(worst, abs(closed - quadv) / closed)
                i = sn.GradedIndex(m, j, k).grading
                if i is not None:
                    exact = sn.graded_norm_rational(m, i, j)
                    # Independent exact route through the Beta integral, compared as rationals.
                    exact_ok &= exact == sn.graded_norm_from_beta(m, i, j)
                    for v in (closed, quadv):
                        exact_ok &= abs(Fraction(v) - exact) <= Fraction(1, 10**10) * exact
    exact_ok &= sn.norm_exact_graded(3, 0, 1).exact == Fraction(1, 8)
    exact_ok &= sn.norm_exact_graded(3, 0, 0).exact == Fraction(3, 8)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and exact_ok and elapsed < 20
    record(2, ok, f"{count} indices; closed vs quadrature max rel err {worst:.2e} (<= 1e-10); exact rationals agree: {exact_ok}; {elapsed:.2f} s (< 20 s)")


def test_criterion_03_divergence_frontier():
    raised = True
    for m in range(0, 9):
        for j in range(13):
            for k in range(13):
                if m >= 3 and j + k > m - 3:
                    continue
                for method in ("closed", "quadrature"):
                    try:
                        sn.norm(m, j, k, method)
                        raised = False
                    except DivergentIndexError:
                        pass
    ratios = [sn.divergence_witness(m, j, s - j).ratio for m in (3, 4, 5) for s in range(m - 2) for j in range(s + 1)]
    ok = raised and min(ratios) > 1e3
    record(3, ok, f"all divergent indices raise: {raised}; {len(ratios)} witnesses, min partial/neighbour ratio {min(ratios):.1f} (> 1e3)")


def test_criterion_04_scalar_curvature():
    t0 = time.perf_counter()
    cases = [
        (rg.punctured_disk(), 2, -24 * PI),
        (rg.family_potential(3, 2.0, 1.0), 2, -8 * PI),
        (rg.family_potential(4, 2.0, 1.0), 2, -6 * PI),
        (rg.fubini_study(), 1, 8 * PI),
        (rg.flat(), 2, 0.0),
    ]
    worst = 0.0
    ok = True
    for pot, n, target in cases:
        scale = abs(target) or 24 * PI
        for r in GRID:
            dev = abs(rg.scalar_curvature(pot, r, n) - target) / scale
            worst = max(worst, dev)
            ok &= dev < 1e-9
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 2
    record(4, ok, f"Phi*, family m=3,4, FS, flat: max scaled deviation {worst:.2e} (< 1e-9); {elapsed:.3f} s (< 2 s)")


def test_criterion_05_curvature_invariant():
    combos = [rg.curvature_invariants(rg.punctured_disk(), r).combo for r in GRID]
    target = -960 * PI**2
    value_err = max(abs(c - target) / abs(target) for c in combos)
    spread = (max(combos) - min(combos)) / abs(target)
    ok = value_err < 1e-6 and spread < 1e-8
    record(5, ok, f"|R|^2 - 4|Ric|^2 rel err vs -960 pi^2 {value_err:.2e} (< 1e-6); spread {spread:.2e} (< 1e-8)")


def test_criterion_06_strictness_witness():
    f1, f2 = (bk.full_kernel(3, r, 1e-8).value for r in (0.1, 0.5))
    g1, g2 = (bk.graded_kernel(3, r, 1e-10).value for r in (0.1, 0.5))
    gap = abs(f1 - f2) / f1
    agree = abs(g1 - g2) / g1
    ok = gap > 1e-3 and agree < 1e-8
    record(6, ok, f"full kernel gap {gap:.3f} (> 1e-3); graded agreement {agree:.2e} (< 1e-8)")


def test_criterion_07_product_lemma():
    ok = True
    evaluations = 0
    for sign, n in (("negative", 3), ("zero", 4), ("positive", 4)):
        model = mc.theorem_instance(n, sign)
        for m in range(model.min_level, model.min_level + 3):
            want = float(mc.expected_constant(model, m))
            for r in GRID:
                ev = mc.product_kernel_at(model, m, r)
                evaluations += 1
                ok &= abs(ev.value - want) <= ev.tail_bound
    ok &= mc.expected_constant(mc.theorem_instance(4, "zero"), 1) == Fraction(16, 3)
    s_ok = True
    for sign, target in (("negative", -24 * PI), ("zero", 0.0), ("positive", 2 * PI)):
        model = mc.theorem_instance(4, sign)
        s_ok &= model.scalar_curvature == pytest.approx(target, abs=1e-15)
        for r in GRID:
            s_ok &= abs(math.fsum(f.scalar_curvature_at(r) for f in model.factors) - target) < 1e-9
    record(7, ok and s_ok, f"{evaluations} product evaluations within propagated bounds: {ok}; s = -24 pi, 0, 2 pi within 1e-9: {s_ok}")


def test_criterion_08_generating_identity():
    results = [bk.generating_check(3, r, 200) for r in (0.3, 0.5, 0.9)]
    ok = all(res.residual < 1e-12 and res.residual <= res.tail_bound for res in results)
    desc = ", ".join(f"r={res.r}: {res.residual:.1e} <= {res.tail_bound:.1e}" for res in results)
    record(8, ok, f"residuals {desc} (< 1e-12, bound dominates)")


def test_criterion_09_completeness():
    inner = rg.radial_completeness(rg.punctured_disk(), "inner")
    outer = rg.radial_completeness(rg.punctured_disk(), "outer")
    record(9, inner == rg.FINITE and outer == rg.INFINITE, f"inner {inner}, outer {outer}")


def test_criterion_10_special_functions():
    rec = max(abs(log_gamma(x + 1) - log_gamma(x) - math.log(x)) for x in (1 / 3, 2 / 3, 1.5, 7.25))
    refl = abs(math.exp(log_gamma(1 / 3) + log_gamma(2 / 3)) / (2 * PI / math.sqrt(3)) - 1)
    record(10, rec < 1e-13 and refl < 1e-13, f"recurrence residual {rec:.1e}, reflection residual {refl:.1e} (< 1e-13)")


def _verify_csv(path):
    env = dict(os.environ)
    env.pop("PARTIAL_BERGMAN_CONFIG", None)
    t0 = time.perf_counter()
    p = subprocess.run(
        [sys.executable, "-m", "partial_bergman", "verify", "--out", str(path), "--format", "csv"],
        capture_output=True,
        text=True,
        env=env,
    )
    elapsed = time.perf_counter() - t0
    rows = list(csv.reader(path.read_text().splitlines()))
    idx = rows[0].index("runtime_ms")
    return p.returncode, elapsed, [r[:idx] + r[idx + 1 :] for r in rows]


def test_criterion_11_infrastructure(tmp_path):
    code_a, t_a, rows_a = _verify_csv(tmp_path / "a.csv")
    code_b, t_b, rows_b = _verify_csv(tmp_path / "b.csv")
    identical = rows_a == rows_b
    ok = code_a == code_b == 0 and identical and max(t_a, t_b) < 60
    record(11, ok, f"two default verify runs: exit {code_a}/{code_b}, CSV identical (runtime excluded): {identical}; {max(t_a, t_b):.1f} s (< 60 s)")
