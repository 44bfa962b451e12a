"""Weighted L2 norms of the monomials z1^j z2^k on the punctured ball.

At level m the squared norm is

    ||z1^j z2^k||_m^2 = (3/4) j! k! / (j+k+1)!  *  I_m(j+k),
    I_m(s) = int_0^1 x^(a-1) (1 + 2x) (1 - x)^(m-3) dx,   a = (s - m)/3 + 1,

which is finite exactly when m >= 3 and j + k > m - 3. Three routes are
provided: log-gamma closed form, exact rationals on the graded lattice
j + k = m + 3i, and adaptive quadrature of I_m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DivergentIndexError, OverflowBudgetError, QuadratureBudgetError, RangeError
from .quadrature import integrate
from .special import log_gamma

# Factorial arguments above this total degree are refused by the exact routes.
MAX_EXACT_DEGREE = 10_000

CLOSED_FORM = "closed-form"
EXACT_GRADED = "exact-graded"
QUADRATURE = "quadrature"


@dataclass(frozen=True)
class GradedIndex:
    m: int
    j: int
    k: int

    @property
    def degree(self) -> int:
        return self.j + self.k

    @property
    def convergent(self) -> bool:
        return self.m >= 3 and self.j + self.k > self.m - 3

    @property
    def grading(self) -> int | None:
        """i with j + k = m + 3i, or None off the graded lattice."""
        d = self.j + self.k - self.m
        if d >= 0 and d % 3 == 0:
            return d // 3
        return None


@dataclass(frozen=True)
class NormValue:
    approx: float
    source: str
    exact: Fraction | None = None
    abs_error_bound: float = 0.0

    def __float__(self):
        return self.approx


def check_convergent(m: int, j: int, k: int) -> None:
    if j < 0 or k < 0:
        raise RangeError("exponents must be non-negative")
    if m < 3:
        raise DivergentIndexError(m, j, k, f"m >= 3 fails (m = {m})")
    if j + k <= m - 3:
        raise DivergentIndexError(m, j, k, f"j + k > m - 3 fails ({j + k} <= {m - 3})")


def _check_budget(total: int, budget: int) -> None:
    if total > budget:
        raise OverflowBudgetError(f"total degree {total} exceeds factorial budget {budget}")


def angular_factor(j: int, k: int, budget: int = MAX_EXACT_DEGREE) -> Fraction:
    """``int_0^(pi/2) cos^(2j+1) sin^(2k+1) = j! k! / (2 (j+k+1)!)``."""
    if j < 0 or k < 0:
        raise RangeError("exponents must be non-negative")
    _check_budget(j + k, budget)
    return Fraction(math.factorial(j) * math.factorial(k), 2 * math.factorial(j + k + 1))


def _alpha(m: int, s: int) -> float:
    return (s - m) / 3.0 + 1.0


def log_radial_integral(m: int, s: int) -> float:
    """log I_m(s) via Beta functions; I_m(s) = B(a, m-2) (1 + 2a / (a + m - 2))."""
    a = _alpha(m, s)
    beta = m - 2
    log_b = log_gamma(a) + log_gamma(beta) - log_gamma(a + beta)
    return log_b + math.log1p(2.0 * a / (a + beta))


def norm_closed(m: int, j: int, k: int) -> NormValue:
    check_convergent(m, j, k)
    s = j + k
    log_norm = (
        math.log(0.75)
        + log_gamma(j + 1)
        + log_gamma(k + 1)
        - log_gamma(s + 2)
        + log_radial_integral(m, s)
    )
    return NormValue(math.exp(log_norm), CLOSED_FORM)


def graded_norm_rational(m: int, i: int, j: int) -> Fraction:
    """``3 / (4 (m-1)(m-2)) / (C(m+3i, j) C(m+i-1, i))``."""
    if m < 3:
        raise DivergentIndexError(m, j, m + 3 * i - j, f"m >= 3 fails (m = {m})")
    if i < 0:
        raise RangeError("grading i must be >= 0")
    if not 0 <= j <= m + 3 * i:
        raise RangeError(f"j={j} outside [0, {m + 3 * i}]")
    return Fraction(3, 4 * (m - 1) * (m - 2) * math.comb(m + 3 * i, j) * math.comb(m + i - 1, i))


def graded_norm_from_beta(m: int, i: int, j: int) -> Fraction:
    """Same value as :func:`graded_norm_rational`, computed from the Beta form.

    On the graded lattice a = i + 1 is an integer, so B(a, m-2) and the
    bracket 1 + 2a/(a+m-2) are rational.
    """
    if m < 3:
        raise DivergentIndexError(m, j, m + 3 * i - j, f"m >= 3 fails (m = {m})")
    k = m + 3 * i - j
    if i < 0 or not 0 <= j <= m + 3 * i:
        raise RangeError(f"(i={i}, j={j}) outside the graded lattice")
    a, b = i + 1, m - 2
    beta = Fraction(math.factorial(a - 1) * math.factorial(b - 1), math.factorial(a + b - 1))
    radial = beta * (1 + Fraction(2 * a, a + b))
    return Fraction(3, 2) * angular_factor(j, k) * radial


def norm_exact_graded(m: int, i: int, j: int) -> NormValue:
    value = graded_norm_rational(m, i, j)
    return NormValue(float(value), EXACT_GRADED, exact=value)


def radial_integrand(m: int, s: int):
    """Integrand of I_m(s) after x = u^3: ``3 u^(s-m+2) (1 + 2u^3) (1 - u^3)^(m-3)``.

    The exponent s - m + 2 = 3a - 1 is a non-negative integer for every
    convergent index, so the integrand is a polynomial in u.
    """
    e = s - m + 2

    def f(u):
        u3 = u * u * u
        return 3.0 * u**e * (1.0 + 2.0 * u3) * (1.0 - u3) ** (m - 3)

    return f


def norm_quadrature(
    m: int,
    j: int,
    k: int,
    rel_tol: float = 1e-13,
    max_subdivisions: int = 2000,
) -> NormValue:
    check_convergent(m, j, k)
    s = j + k
    res = integrate(radial_integrand(m, s), 0.0, 1.0, rel_tol=rel_tol, max_subdivisions=max_subdivisions)
    pref = float(Fraction(3, 2) * angular_factor(j, k))
    if res.error > 1e-11 * abs(res.value):
        raise QuadratureBudgetError(f"error bound {res.error:.3e} above 1e-11 relative", res.value, res.error)
    return NormValue(pref * res.value, QUADRATURE, abs_error_bound=pref * res.error)


def norm(m: int, j: int, k: int, method: str = "closed") -> NormValue:
    """Dispatch on ``method`` in {closed, exact, quadrature}."""
    if method == "closed":
        return norm_closed(m, j, k)
    if method == "quadrature":
        return norm_quadrature(m, j, k)
    if method == "exact":
        i = GradedIndex(m, j, k).grading
        if i is None:
            raise RangeError(f"(m={m}, j={j}, k={k}) is off the graded lattice j+k = m+3i")
        return norm_exact_graded(m, i, j)
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# divergence corroboration


@dataclass(frozen=True)
class DivergenceWitness:
    m: int
    j: int
    k: int
    neighbor: tuple[int, int]
    neighbor_norm: float
    partial_norm: float
    cutoff: float  # x runs over [exp(-cutoff), 1]
    ratio: float


def partial_norm(m: int, j: int, k: int, cutoff: float, rel_tol: float = 1e-10) -> float:
    """Norm integral truncated to ``x in [exp(-cutoff), 1]``, any index.

    Written in ``t = -log x`` so truncations far below float range are exact;
    the pieces ``[2^p, 2^(p+1)]`` are summed separately.
    """
    a = _alpha(m, j + k)

    def g(t):
        x = math.exp(-t)
        return math.exp(-a * t) * (1.0 + 2.0 * x) * (-math.expm1(-t)) ** (m - 3)

    edges = [0.0]
    top = 1.0
    while top < cutoff:
        edges.append(top)
        top *= 2.0
    edges.append(cutoff)
    total = math.fsum(
        integrate(g, lo, hi, rel_tol=rel_tol).value for lo, hi in zip(edges, edges[1:]) if hi > lo
    )
    return float(Fraction(3, 2) * angular_factor(j, k)) * total


def divergence_witness(m: int, j: int, k: int, factor: float = 1e3, max_cutoff: float = 2.0**40) -> DivergenceWitness:
    """Show the norm of a divergent index outgrows ``factor`` times its nearest convergent neighbour.

    The neighbour raises j until j + k = max(m - 2, 0) (m >= 3 only). The
    truncation point is pushed toward x = 0 by doubling ``-log x``.
    """
    if m < 3:
        raise RangeError("the corroboration needs m >= 3 so a convergent neighbour exists")
    if GradedIndex(m, j, k).convergent:
        raise RangeError(f"(m={m}, j={j}, k={k}) is convergent")
    nj = j + (m - 2) - (j + k)
    ref = norm_closed(m, nj, k).approx
    cutoff = 1.0
    while cutoff <= max_cutoff:
        value = partial_norm(m, j, k, cutoff)
        if value > factor * ref:
            return DivergenceWitness(m, j, k, (nj, k), ref, value, cutoff, value / ref)
        cutoff *= 2.0
    raise QuadratureBudgetError(f"partial norm of (m={m}, j={j}, k={k}) stayed below {factor} x neighbour")
