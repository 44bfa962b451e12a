import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from partial_bergman import radial_geometry as rg
from partial_bergman import section_norms as sn
from partial_bergman.errors import DivergentIndexError, OverflowBudgetError, RangeError

CONVERGENT = [(m, j, k) for m in range(3, 9) for j in range(13) for k in range(13) if j + k > m - 3]


def radial_integral_scipy(m, s):
    a = (s - m) / 3 + 1
    val, _ = quad(lambda x: x ** (a - 1) * (1 + 2 * x) * (1 - x) ** (m - 3), 0, 1, epsabs=0, epsrel=1e-13, limit=400)
    return val


def test_angular_factor_examples():
    assert sn.angular_factor(0, 0) == Fraction(1, 2)
    assert sn.angular_factor(1, 2) == Fraction(1, 24)
    assert sn.angular_factor(4, 9) == sn.angular_factor(9, 4)


@pytest.mark.parametrize("j,k", [(0, 0), (1, 2), (3, 5), (7, 0), (6, 6)])
def test_angular_factor_against_quadrature(j, k):
    val, _ = quad(lambda t: math.cos(t) ** (2 * j + 1) * math.sin(t) ** (2 * k + 1), 0, math.pi / 2, epsabs=0, epsrel=1e-13)
    assert float(sn.angular_factor(j, k)) == pytest.approx(val, rel=1e-12)


def test_angular_factor_budget():
    assert sn.angular_factor(5000, 5000) > 0
    with pytest.raises(OverflowBudgetError):
        sn.angular_factor(6000, 5000)
    with pytest.raises(RangeError):
        sn.angular_factor(-1, 0)


def test_closed_form_examples():
    assert sn.norm_closed(3, 1, 2).approx == pytest.approx(1 / 8, rel=1e-12)
    assert sn.norm_closed(3, 1, 0).approx == pytest.approx(27 / 16, rel=1e-12)
    with pytest.raises(DivergentIndexError) as info:
        sn.norm_closed(3, 0, 0)
    assert "j + k > m - 3" in str(info.value)
    with pytest.raises(DivergentIndexError) as info:
        sn.norm_closed(2, 5, 5)
    assert "m >= 3" in str(info.value)


def test_exact_graded_examples():
    assert sn.norm_exact_graded(3, 0, 0).exact == Fraction(3, 8)
    assert sn.norm_exact_graded(3, 0, 1).exact == Fraction(1, 8)
    assert sn.norm_exact_graded(4, 1, 0).exact == Fraction(1, 32)
    assert sn.norm_exact_graded(6, 0, 3).exact == Fraction(3, 1600)
    with pytest.raises(RangeError):
        sn.norm_exact_graded(3, 0, 4)


def test_quadrature_examples():
    v = sn.norm_quadrature(3, 1, 2)
    assert abs(v.approx - 0.125) < 1e-12 and v.abs_error_bound <= 1e-11 * v.approx
    assert sn.norm_quadrature(5, 2, 2).approx == pytest.approx(sn.norm_closed(5, 2, 2).approx, rel=1e-11)
    assert sn.norm_quadrature(6, 3, 3).approx == pytest.approx(3 / 1600, rel=1e-11)


@pytest.mark.parametrize("m,j,k", CONVERGENT[::7])
def test_closed_form_against_scipy(m, j, k):
    pref = 0.75 * math.factorial(j) * math.factorial(k) / math.factorial(j + k + 1)
    assert sn.norm_closed(m, j, k).approx == pytest.approx(pref * radial_integral_scipy(m, j + k), rel=1e-10)


def test_triple_agreement_full_range():
    for m, j, k in CONVERGENT:
        closed = sn.norm_closed(m, j, k).approx
        quadv = sn.norm_quadrature(m, j, k).approx
        assert quadv == pytest.approx(closed, rel=1e-10)
        i = sn.GradedIndex(m, j, k).grading
        if i is not None:
            exact = sn.graded_norm_rational(m, i, j)
            assert closed == pytest.approx(float(exact), rel=1e-12)
            assert quadv == pytest.approx(float(exact), rel=1e-10)


def test_two_exact_routes_agree():
    for m in range(3, 12):
        for i in range(6):
            for j in range(m + 3 * i + 1):
                assert sn.graded_norm_rational(m, i, j) == sn.graded_norm_from_beta(m, i, j)


def test_normalization_is_a_quarter_of_the_volume_integral():
    # The adopted norms equal 1/4 of int |z1^j z2^k|^2 e^{-m Phi} omega^2/2 with omega = (i/2pi) ddbar Phi.
    p = rg.punctured_disk()
    for m, j, k in [(3, 1, 2), (3, 1, 0), (4, 0, 7), (6, 3, 3)]:
        s = j + k
        radial, _ = quad(
            lambda r: r ** (s + 1) * ((1 - r**3) / r) ** m * rg.metric_determinant(p, r, 2), 0, 1, epsabs=0, epsrel=1e-13, limit=200
        )
        literal = math.factorial(j) * math.factorial(k) / math.factorial(s + 1) * radial
        assert literal / sn.norm_closed(m, j, k).approx == pytest.approx(4.0, rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(st.integers(3, 30), st.integers(0, 40), st.integers(0, 40))
def test_symmetry_and_positivity(m, j, k):
    if j + k <= m - 3:
        return
    a, b = sn.norm_closed(m, j, k).approx, sn.norm_closed(m, k, j).approx
    assert a > 0 and a == pytest.approx(b, rel=1e-14)
    qa, qb = sn.norm_quadrature(m, j, k).approx, sn.norm_quadrature(m, k, j).approx
    assert qa == qb


def test_exact_symmetry():
    for m in range(3, 8):
        for i in range(4):
            top = m + 3 * i
            for j in range(top + 1):
                assert sn.graded_norm_rational(m, i, j) == sn.graded_norm_rational(m, i, top - j)


def test_exact_float_within_bound():
    for m in range(3, 8):
        for i in range(4):
            for j in range(m + 3 * i + 1):
                v = sn.norm_exact_graded(m, i, j)
                assert abs(Fraction(v.approx) - v.exact) <= Fraction(1, 10**14) * v.exact


def test_large_degree_log_space():
    import mpmath

    for m, s_deg in [(5, 8000), (8, 9999), (3, 1)]:
        a = mpmath.mpf(s_deg - m) / 3 + 1
        want = mpmath.log(mpmath.beta(a, m - 2) * (1 + 2 * a / (a + m - 2)))
        assert sn.log_radial_integral(m, s_deg) == pytest.approx(float(want), rel=1e-12)
    assert sn.norm_closed(5, 40, 60).approx > 0


@pytest.mark.parametrize("m", range(3, 9))
def test_divergence_frontier(m):
    for j in range(m - 2):
        k = m - 3 - j
        for method in ("closed", "quadrature"):
            with pytest.raises(DivergentIndexError):
                sn.norm(m, j, k, method)
        assert sn.norm(m, j, k + 1).approx > 0


def test_small_levels_always_diverge():
    for m in range(0, 3):
        for j in range(6):
            with pytest.raises(DivergentIndexError):
                sn.norm_closed(m, j, 9)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_divergence_witnesses(m):
    for s in range(m - 2):
        for j in range(s + 1):
            w = sn.divergence_witness(m, j, s - j)
            assert w.ratio > 1e3
            assert w.neighbor[0] + w.neighbor[1] == m - 2


def test_partial_norm_approaches_convergent_value():
    full = sn.norm_closed(4, 1, 1).approx
    assert sn.partial_norm(4, 1, 1, 200.0) == pytest.approx(full, rel=1e-9)


def test_norm_dispatch():
    assert sn.norm(3, 1, 2, "exact").exact == Fraction(1, 8)
    with pytest.raises(RangeError):
        sn.norm(3, 1, 1, "exact")
    with pytest.raises(ValueError):
        sn.norm(3, 1, 2, "bogus")


def test_graded_index():
    g = sn.GradedIndex(4, 3, 4)
    assert g.degree == 7 and g.convergent and g.grading == 1
    assert sn.GradedIndex(4, 3, 3).grading is None
    assert not sn.GradedIndex(4, 0, 1).convergent
