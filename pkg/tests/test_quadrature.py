import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from partial_bergman.errors import QuadratureBudgetError
from partial_bergman.quadrature import WG, WGK, XGK, gauss_kronrod_15, integrate, integrate_semi_infinite


def test_gauss_nodes_and_weights_match_legendre():
    nodes, weights = np.polynomial.legendre.leggauss(7)
    # Gauss points are the odd-indexed Kronrod abscissae; the last one is the centre.
    gx = XGK[1::2]
    ours_x = [-x for x in gx[:-1]] + [gx[-1]] + list(reversed(gx[:-1]))
    ours_w = list(WG[:-1]) + [WG[-1]] + list(reversed(WG[:-1]))
    order = np.argsort(ours_x)
    assert np.allclose(np.array(ours_x)[order], nodes, rtol=0, atol=1e-15)
    assert np.allclose(np.array(ours_w)[order], weights, rtol=0, atol=1e-15)


def test_kronrod_weights_sum_to_two():
    assert 2 * sum(WGK[:-1]) + WGK[-1] == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("deg", range(0, 23))
def test_kronrod_rule_is_exact_to_degree_22(deg):
    value, _ = gauss_kronrod_15(lambda x: x**deg, -1.0, 1.0)
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert value == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize(
    "f,a,b",
    [
        (math.sin, 0.0, math.pi),
        (lambda x: math.sqrt(x), 0.0, 1.0),
        (lambda x: math.log(x), 1e-300, 1.0),
        (lambda x: 1.0 / (1e-4 + (x - 0.3) ** 2), 0.0, 1.0),
        (lambda x: math.exp(-x * x), -5.0, 5.0),
    ],
)
def test_integrate_matches_scipy(f, a, b):
    want, _ = sp_integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=500)
    res = integrate(f, a, b, rel_tol=1e-12)
    assert res.value == pytest.approx(want, rel=1e-11)
    assert res.error <= 1e-12 * abs(res.value) + 1e-300


def test_semi_infinite():
    res = integrate_semi_infinite(lambda t: math.exp(-t), 0.0, rel_tol=1e-12)
    assert res.value == pytest.approx(1.0, rel=1e-12)


def test_budget_error_carries_estimate():
    with pytest.raises(QuadratureBudgetError) as info:
        integrate(lambda x: math.sin(1.0 / x) if x else 0.0, 0.0, 1.0, rel_tol=1e-14, max_subdivisions=20)
    assert info.value.value is not None and info.value.error > 0


def test_infinite_interval_rejected():
    with pytest.raises(ValueError):
        integrate(math.exp, 0.0, math.inf)
