"""Curvature of radial Kähler metrics.

A radial potential depends only on ``r = |z_1|^2 + ... + |z_n|^2``. Every
potential is stored split as ``phi(r) = c * log(r) + psi(r)`` with ``psi``
smooth up to ``r = 0``. The logarithmic part drops out of ``(r phi')'``
identically, so computing with ``psi`` directly avoids the cancellation
that otherwise destroys accuracy near the puncture.

Conventions: the Kähler form is ``(i/2pi) dd^c phi``. With ``H`` the complex
Hessian of ``phi``, scalar curvature is ``-4pi tr(H^-1 ddbar log det H)``
and squared curvature norms carry the matching factor ``(4pi)^2``. These
give ``s = 8pi`` for Fubini-Study on CP^1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import (
    DomainError,
    InconclusiveError,
    NumericalError,
    ParameterError,
    PositivityError,
    QuadratureBudgetError,
    UnsupportedDimensionError,
)
from .quadrature import integrate

KINDS = ("punctured-disk-family", "fubini-study", "flat", "custom-profile")

FOUR_PI = 4.0 * math.pi

Derivs = tuple  # (f, f', f'', f''', f'''')


@dataclass(frozen=True)
class RadialPotential:
    """Radial Kähler potential ``phi(r) = log_coeff * log r + psi(r)`` on ``(0, radius)``.

    ``smooth`` maps r to ``(psi, psi', psi'', psi''', psi'''')``.
    """

    kind: str
    radius: float
    smooth: Callable[[float], Derivs] = field(repr=False, compare=False)
    log_coeff: float = 0.0
    m_scale: int | None = None
    lam: float | None = None
    xi: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown potential kind {self.kind!r}")
        if not self.radius > 0:
            raise ParameterError("domain radius must be positive")

    def contains(self, r: float) -> bool:
        return 0.0 < r < self.radius

    def derivatives(self, r: float) -> Derivs:
        """``(phi, phi', phi'', phi''', phi'''')`` at r."""
        p0, p1, p2, p3, p4 = self.smooth(r)
        c = self.log_coeff
        if c == 0.0:
            return p0, p1, p2, p3, p4
        return (
            c * math.log(r) + p0,
            c / r + p1,
            -c / r**2 + p2,
            2.0 * c / r**3 + p3,
            -6.0 * c / r**4 + p4,
        )

    def __call__(self, r: float) -> float:
        return self.derivatives(r)[0]

    def scaled(self, c: float) -> "RadialPotential":
        """The potential ``c * phi``."""
        if not c > 0:
            raise ParameterError("scale must be positive")
        base = self.smooth

        def smooth(r):
            return tuple(c * v for v in base(r))

        m_scale = self.m_scale
        if m_scale is not None:
            m_scale = m_scale * c
        return RadialPotential(
            kind=self.kind,
            radius=self.radius,
            smooth=smooth,
            log_coeff=c * self.log_coeff,
            m_scale=m_scale,
            lam=self.lam,
            xi=self.xi,
            label=f"{c}*({self.label})" if self.label else "",
        )


# --------------------------------------------------------------------------
# closed-form profiles


def _neg_log_one_minus_power(xi: float, p: float):
    """Derivatives of ``-log(1 - xi r^p)`` by Faa di Bruno."""

    def smooth(r):
        w = xi * r**p
        if w >= 1.0:
            raise DomainError(f"r={r} outside the domain of -log(1 - xi r^p)")
        w1 = xi * p * r ** (p - 1)
        w2 = xi * p * (p - 1) * r ** (p - 2)
        w3 = xi * p * (p - 1) * (p - 2) * r ** (p - 3)
        w4 = xi * p * (p - 1) * (p - 2) * (p - 3) * r ** (p - 4)
        g1 = 1.0 / (1.0 - w)
        g2 = g1 * g1
        g3 = 2.0 * g2 * g1
        g4 = 6.0 * g2 * g2
        return (
            -math.log1p(-w),
            g1 * w1,
            g2 * w1**2 + g1 * w2,
            g3 * w1**3 + 3.0 * g2 * w1 * w2 + g1 * w3,
            g4 * w1**4 + 6.0 * g3 * w1**2 * w2 + g2 * (3.0 * w2**2 + 4.0 * w1 * w3) + g1 * w4,
        )

    return smooth


def family_potential(m_scale: float, lam: float, xi: float) -> RadialPotential:
    """``m (lam/2) log r - m log(1 - xi r^(lam+1))`` on ``r < xi^(-1/(lam+1))``."""
    if not (m_scale > 0 and lam > 0 and xi > 0):
        raise ParameterError("family parameters m_scale, lambda, xi must all be positive")
    inner = _neg_log_one_minus_power(xi, lam + 1.0)

    def smooth(r):
        return tuple(m_scale * v for v in inner(r))

    return RadialPotential(
        kind="punctured-disk-family",
        radius=xi ** (-1.0 / (lam + 1.0)),
        smooth=smooth,
        log_coeff=m_scale * lam / 2.0,
        m_scale=m_scale,
        lam=lam,
        xi=xi,
        label=f"Phi({m_scale},{lam},{xi})",
    )


def punctured_disk() -> RadialPotential:
    """``log r - log(1 - r^3)``, the cscK potential on the punctured unit ball of C^2."""
    return family_potential(1, 2.0, 1.0)


def _fs_smooth(r):
    a = 1.0 / (1.0 + r)
    return math.log1p(r), a, -a * a, 2.0 * a**3, -6.0 * a**4


def _flat_smooth(r):
    return r, 1.0, 0.0, 0.0, 0.0


def fubini_study() -> RadialPotential:
    return RadialPotential(kind="fubini-study", radius=math.inf, smooth=_fs_smooth, label="log(1+r)")


def flat() -> RadialPotential:
    return RadialPotential(kind="flat", radius=math.inf, smooth=_flat_smooth, label="r")


# --------------------------------------------------------------------------
# finite differences for custom profiles

# Fourth-order central stencils, offsets -3..3, for derivative orders 1..4.
_STENCILS = {
    1: ((0.0, 1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12, 0.0), 1),
    2: ((0.0, -1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12, 0.0), 2),
    3: ((1.0 / 8, -1.0, 13.0 / 8, 0.0, -13.0 / 8, 1.0, -1.0 / 8), 3),
    4: ((-1.0 / 6, 2.0, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6), 4),
}
# Step per derivative order, relative to the distance to the nearest domain
# endpoint; higher orders need larger steps to keep rounding in check.
_REL_STEP = {1: 5e-3, 2: 1e-2, 3: 2e-2, 4: 3e-2}


def _stencil(func, r, h, order):
    coeffs, power = _STENCILS[order]
    acc = math.fsum(c * func(r + (i - 3) * h) for i, c in enumerate(coeffs) if c != 0.0)
    return acc / h**power


def finite_difference_derivatives(func: Callable[[float], float], r: float, radius: float = math.inf) -> Derivs:
    """Derivatives 0..4 of ``func`` at r from central differences.

    Each order uses a fourth-order stencil at steps h and h/2 followed by
    one Richardson extrapolation. Steps scale with ``min(r, radius - r)``,
    so every stencil point stays inside ``(0, radius)``.
    """
    scale = min(r, radius - r)
    out = [func(r)]
    for order in (1, 2, 3, 4):
        h = min(max(1e-5, _REL_STEP[order] * scale), scale / 3.5)
        coarse = _stencil(func, r, h, order)
        fine = _stencil(func, r, h / 2.0, order)
        out.append((16.0 * fine - coarse) / 15.0)
    return tuple(out)


def custom_profile(
    phi: Callable[[float], float],
    radius: float = math.inf,
    log_coeff: float = 0.0,
    label: str = "custom",
) -> RadialPotential:
    """Potential given only by values; derivatives come from finite differences.

    ``log_coeff`` lets the caller declare a ``c log r`` singularity, which is
    then subtracted before differencing.
    """
    if log_coeff:

        def psi(r):
            return phi(r) - log_coeff * math.log(r)

    else:
        psi = phi

    def smooth(r):
        return finite_difference_derivatives(psi, r, radius)

    return RadialPotential(kind="custom-profile", radius=radius, smooth=smooth, log_coeff=log_coeff, label=label)


# --------------------------------------------------------------------------
# pointwise geometry


@dataclass(frozen=True)
class _Radial:
    """Cancellation-free building blocks at one radius.

    f = phi', q = (r phi')', with derivatives; N = r^2 f', D = r f.
    """

    r: float
    f: float
    f1: float
    f2: float
    f3: float
    q: float
    q1: float
    q2: float
    N: float
    N1: float
    D: float


def _radial(pot: RadialPotential, r: float) -> _Radial:
    if not pot.contains(r):
        raise DomainError(f"r={r} not in (0, {pot.radius})")
    _, p1, p2, p3, p4 = pot.smooth(r)
    c = pot.log_coeff
    f = c / r + p1
    q = p1 + r * p2
    if not (f > 0 and q > 0):
        raise PositivityError(f"metric not positive at r={r}: phi'={f:.6g}, (r phi')'={q:.6g}")
    return _Radial(
        r=r,
        f=f,
        f1=-c / r**2 + p2,
        f2=2.0 * c / r**3 + p3,
        f3=-6.0 * c / r**4 + p4,
        q=q,
        q1=2.0 * p2 + r * p3,
        q2=3.0 * p3 + r * p4,
        N=-c + r * r * p2,
        N1=2.0 * r * p2 + r * r * p3,
        D=c + r * p1,
    )


def metric_determinant(pot: RadialPotential, r: float, n: int) -> float:
    """Determinant of the complex Hessian, ``phi'^(n-1) (r phi')'``."""
    if n < 1:
        raise ParameterError("complex dimension must be >= 1")
    g = _radial(pot, r)
    return g.f ** (n - 1) * g.q


def scalar_curvature(pot: RadialPotential, r: float, n: int) -> float:
    """Scalar curvature ``-4pi [(n-1) u'/phi' + (r u')'/(r phi')']`` with ``u = log det H``."""
    if n < 1:
        raise ParameterError("complex dimension must be >= 1")
    g = _radial(pot, r)
    if g.q < 1e-300:
        raise NumericalError(f"(r phi')' underflows at r={r}")
    # u' = (n-1) f'/f + q'/q
    a = g.f1 / g.f
    b = g.q1 / g.q
    du = (n - 1) * a + b
    # (r f'/f)' = (N/D)' with D' = q
    d_ra = (g.N1 * g.D - g.N * g.q) / (g.D * g.D)
    d_rb = b + r * (g.q2 / g.q - b * b)
    d_rdu = (n - 1) * d_ra + d_rb
    return -FOUR_PI * ((n - 1) * du / g.f + d_rdu / g.q)


@dataclass(frozen=True)
class CurvatureReport:
    r: float
    n: int
    det_H: float
    s: float
    riem_sq: float
    ric_sq: float
    combo: float


def curvature_invariants(pot: RadialPotential, r: float, n: int = 2) -> CurvatureReport:
    """Full curvature tensor at the axis point ``(sqrt r, 0)``, where H is diagonal.

    Only the radial (index 1) and one tangential (index 2) direction exist
    for n = 2. Nonzero components of ``R_{i j k l}`` (barred 2nd and 4th):
    ``R_1111 = A``, the four ``1122``-type ones ``= B`` and ``R_2222 = C``.
    """
    if n != 2:
        raise UnsupportedDimensionError("curvature invariants are implemented for n = 2 only")
    g = _radial(pot, r)
    q, f = g.q, g.f
    d_rb = g.q1 / g.q + r * (g.q2 / g.q - (g.q1 / g.q) ** 2)
    A = -q * d_rb
    B = (g.N * q - g.N1 * g.D) / (r * g.D)
    C = -2.0 * g.f1
    ric1 = (A / q + B / f) / q  # mixed Ricci eigenvalue, radial
    ric2 = (B / q + C / f) / f  # tangential
    s_h = ric1 + ric2
    ric_sq_h = ric1 * ric1 + ric2 * ric2
    riem_sq_h = (A / (q * q)) ** 2 + 4.0 * (B / (q * f)) ** 2 + (C / (f * f)) ** 2
    scale = FOUR_PI * FOUR_PI
    riem_sq = scale * riem_sq_h
    ric_sq = scale * ric_sq_h
    return CurvatureReport(
        r=r,
        n=n,
        det_H=f * q,
        s=FOUR_PI * s_h,
        riem_sq=riem_sq,
        ric_sq=ric_sq,
        combo=scale * (riem_sq_h - 4.0 * ric_sq_h),
    )


# --------------------------------------------------------------------------
# positivity and completeness


@dataclass(frozen=True)
class PositivityReport:
    min_first_derivative: float
    min_radial_second: float
    passed: bool


def is_positive_metric(pot: RadialPotential, grid: Sequence[float]) -> PositivityReport:
    if not grid:
        raise ParameterError("grid must be nonempty")
    f_min = q_min = math.inf
    for r in grid:
        if not pot.contains(r):
            raise DomainError(f"grid radius {r} outside (0, {pot.radius})")
        _, p1, p2, _, _ = pot.smooth(r)
        f_min = min(f_min, pot.log_coeff / r + p1)
        q_min = min(q_min, p1 + r * p2)
    return PositivityReport(f_min, q_min, f_min > 0 and q_min > 0)


FINITE = "finite-distance"
INFINITE = "infinite-distance"


def radial_completeness(
    pot: RadialPotential,
    endpoint: str,
    *,
    converge_tol: float = 1e-10,
    diverge_threshold: float = 1e6,
    max_levels: int = 60,
    stall_ratio: float = 0.9,
    stall_levels: int = 6,
) -> str:
    """Classify the radial distance to ``r -> 0+`` (inner) or ``r -> R-`` (outer).

    The arc length along the real ray ``x = |z|`` is ``int sqrt(q(x^2)) dx``.
    It is accumulated over dyadic shells toward the endpoint. Finite when the
    geometric extrapolation of the remaining shells drops below
    ``converge_tol``; infinite when the sum passes ``diverge_threshold`` or
    when shell contributions stop shrinking (ratio >= ``stall_ratio`` for
    ``stall_levels`` consecutive shells, as for logarithmic divergence).
    """
    if endpoint not in ("inner", "outer"):
        raise ParameterError("endpoint must be 'inner' or 'outer'")

    def speed(x):
        return math.sqrt(_radial(pot, x * x).q)

    x_end = math.sqrt(pot.radius)
    x0 = 0.5 * min(x_end, 1.0) if math.isfinite(x_end) else 1.0

    def shell(k):
        if endpoint == "inner":
            return x0 * 2.0 ** -(k + 1), x0 * 2.0**-k
        if math.isinf(x_end):
            return x0 * 2.0**k, x0 * 2.0 ** (k + 1)
        gap = x_end - x0
        return x_end - gap * 2.0**-k, x_end - gap * 2.0 ** -(k + 1)

    total = 0.0
    prev = None
    stalled = 0
    for k in range(max_levels):
        a, b = shell(k)
        if not a < b:
            break
        try:
            piece = integrate(speed, a, b, rel_tol=1e-10, abs_tol=1e-3 * converge_tol).value
        except (QuadratureBudgetError, PositivityError) as exc:
            raise InconclusiveError(f"radial distance to the {endpoint} endpoint: shell {k} failed ({exc})") from exc
        total += piece
        if total > diverge_threshold:
            return INFINITE
        if prev is not None and prev > 0:
            ratio = piece / prev
            stalled = stalled + 1 if ratio >= stall_ratio else 0
            if stalled >= stall_levels:
                return INFINITE
            if ratio < 1.0 and piece * ratio / (1.0 - ratio) < converge_tol:
                return FINITE
        prev = piece
    raise InconclusiveError(f"radial distance to the {endpoint} endpoint neither settled nor diverged")
