"""Partial Bergman kernels of the punctured-ball metric, with certified tails.

On the diagonal, the kernel of a subspace spanned by monomials is

    T(z) = (1 - r^3)^m / r^m * sum |z1|^(2j) |z2|^(2k) / ||z1^j z2^k||_m^2.

Within a fixed total degree s = j + k the norms depend on j only through
j! k! / (s+1)!, so the inner sum over j collapses to ``(s+1) r^s``. On the
graded lattice s = m + 3i this gives the negative-binomial series
``C_m (1 - r^3)^m sum_i C(m+i-1, i) r^(3i)`` whose sum is the constant
``C_m = (4/3)(m-1)(m-2)``.

Tails: all terms are positive and successive term ratios are bounded by a
decreasing sequence q_i, so once q_i < 1 the remainder after term t_i is at
most ``t_i q_i / (1 - q_i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, LevelMismatchError, ParameterError, ToleranceUnreachableError
from .section_norms import graded_norm_rational, log_radial_integral

GRADED = "graded-S_m"
FULL = "full-H_m"

DEFAULT_MAX_TERMS = 1_000_000

_EPS = 2.220446049250313e-16


def rounding_allowance(value: float, n_terms: int, log_scale: float = 0.0) -> float:
    """Bound on float error in a sum of ``n_terms`` positive terms built by
    recurrence or through logarithms of magnitude up to ``log_scale``."""
    return 8.0 * _EPS * (n_terms + 1.0 + abs(log_scale)) * abs(value)


@dataclass(frozen=True)
class KernelEvaluation:
    model: str
    m: int
    r: float
    subspace: str
    value: float
    tail_bound: float
    terms_used: int
    point: tuple[float, float] | None = None
    scale: int = 1  # a factor c*g is evaluated at level c*m of g


def disk_constant(m: int) -> Fraction:
    """``(4/3)(m-1)(m-2)``."""
    return Fraction(4 * (m - 1) * (m - 2), 3)


def _point(point) -> tuple[float, tuple[float, float] | None]:
    if isinstance(point, (tuple, list)):
        x1, x2 = (float(v) for v in point)
        if x1 < 0 or x2 < 0:
            raise DomainError("point moduli |z1|^2, |z2|^2 must be non-negative")
        return x1 + x2, (x1, x2)
    return float(point), None


def _check_disk(m: int, r: float, tol: float) -> None:
    if m < 3:
        raise ParameterError(f"tensor level m={m} has no square-integrable sections (need m >= 3)")
    if not 0.0 < r < 1.0:
        raise DomainError(f"r={r} outside (0, 1)")
    if not tol > 0:
        raise ParameterError("tol must be positive")


def graded_series_partial(m: int, r: float, n_terms: int) -> tuple[float, float]:
    """First ``n_terms`` terms of ``(1 - r^3)^m sum_i C(m+i-1, i) r^(3i)`` and a tail bound.

    Multiply by C_m to get the kernel. The tail bound is ``inf`` while the
    term ratio ``r^3 (m+i)/(i+1)`` is still >= 1.
    """
    r3 = r**3
    term = (1.0 - r3) ** m
    terms = []
    ratio = math.inf
    for i in range(n_terms):
        terms.append(term)
        ratio = r3 * (m + i) / (i + 1)
        term *= ratio
    tail = term / (1.0 - ratio) if ratio < 1.0 else math.inf
    # term is now t_n = t_{n-1} * q_{n-1}; bound t_n / (1 - q_{n-1}) dominates since ratios decrease.
    return math.fsum(terms), tail


def graded_kernel(
    m: int,
    point,
    tol: float = 1e-10,
    max_terms: int = DEFAULT_MAX_TERMS,
    collapse: bool = True,
) -> KernelEvaluation:
    """Partial Bergman kernel of the graded subspace ``j + k = m + 3i`` at level m.

    ``point`` is either r = |z|^2 or a pair (|z1|^2, |z2|^2). With
    ``collapse=False`` the double lattice sum over (i, j) is evaluated term by
    term from the exact graded norms instead of the collapsed series; the
    tail bound is the same.
    """
    r, pair = _point(point)
    _check_disk(m, r, tol)
    const = float(disk_constant(m))
    r3 = r**3
    weight_log = m * math.log1p(-r3) - m * math.log(r)
    term = (1.0 - r3) ** m  # collapsed i = 0 term, without C_m
    terms: list[float] = []
    tail = math.inf
    i = 0
    while True:
        if i >= max_terms:
            raise ToleranceUnreachableError(
                f"graded kernel tail not certified below {tol:g} within {max_terms} terms at r={r}",
                partial=const * math.fsum(terms),
                tail_bound=tail,
                terms_used=i,
            )
        if collapse or pair is None:
            terms.append(term)
        else:
            terms.append(_lattice_shell(m, i, pair, weight_log) / const)
        ratio = r3 * (m + i) / (i + 1)
        term *= ratio
        i += 1
        value = const * math.fsum(terms)
        tail = const * term / (1.0 - ratio) if ratio < 1.0 else math.inf
        if tail <= tol * min(1.0, value):
            break
    tail += rounding_allowance(value, i, 0.0 if collapse else weight_log)
    return KernelEvaluation("punctured-disk", m, r, GRADED, value, tail, i, pair)


def _lattice_shell(m: int, i: int, pair: tuple[float, float], weight_log: float) -> float:
    """``weight * sum_j x1^j x2^k / ||z1^j z2^k||^2`` over j + k = m + 3i, from exact norms."""
    x1, x2 = pair
    s = m + 3 * i
    out = []
    for j in range(s + 1):
        k = s - j
        if (x1 == 0.0 and j) or (x2 == 0.0 and k):
            continue
        inv = 1 / graded_norm_rational(m, i, j)
        log_t = weight_log + math.log(inv.numerator) - math.log(inv.denominator)
        if j:
            log_t += j * math.log(x1)
        if k:
            log_t += k * math.log(x2)
        out.append(math.exp(log_t))
    return math.fsum(out)


def full_kernel(
    m: int,
    point,
    tol: float = 1e-10,
    max_terms: int = DEFAULT_MAX_TERMS,
    residues: Iterable[int] = (0, 1, 2),
) -> KernelEvaluation:
    """Kernel over all convergent monomials, or over the residue classes ``(j+k-m) mod 3`` given.

    ``residues=(0, 1, 2)`` is the whole space; ``(0,)`` reproduces the graded
    kernel. Each class is bounded separately by the decreasing ratio bound
    ``r^3 (s+4)/(s+1) (a+m-1)/a`` with a = (s-m)/3 + 1.
    """
    r, pair = _point(point)
    _check_disk(m, r, tol)
    classes = sorted({int(c) % 3 for c in residues})
    if not classes:
        raise ParameterError("at least one residue class is required")
    r3 = r**3
    log_r = math.log(r)
    log_w = m * math.log1p(-r3)
    terms: list[float] = []
    last: dict[int, tuple[float, float]] = {}
    s = m - 2
    used = 0
    while True:
        rho = (s - m) % 3
        if rho in classes:
            if used >= max_terms:
                raise ToleranceUnreachableError(
                    f"full kernel tail not certified below {tol:g} within {max_terms} terms at r={r}",
                    partial=math.fsum(terms),
                    terms_used=used,
                )
            log_t = math.log(s + 1) + (s - m) * log_r + log_w - math.log(0.75) - log_radial_integral(m, s)
            t = math.exp(log_t)
            terms.append(t)
            used += 1
            a = (s - m) / 3.0 + 1.0
            # (bound on the next term of this class, ratio bound for all later ones)
            last[rho] = (
                t * r3 * (s + 4) / (s + 1) * (a + m - 1) / a,
                r3 * (s + 7) / (s + 4) * (a + m) / (a + 1),
            )
            if len(last) == len(classes):
                tail = 0.0
                for nxt, q in last.values():
                    if q >= 1.0:
                        tail = math.inf
                        break
                    tail += nxt / (1.0 - q)
                value = math.fsum(terms)
                if tail <= tol * min(1.0, value):
                    break
        s += 1
    tail += rounding_allowance(value, used, max(abs(log_w), abs((s - m) * log_r)))
    label = FULL if classes == [0, 1, 2] else f"residues{tuple(classes)}"
    return KernelEvaluation("punctured-disk", m, r, label, value, tail, used, pair)


@dataclass(frozen=True)
class ConstancyReport:
    reference_constant: float
    max_relative_deviation: float
    grid_mean: float
    max_deviation_from_mean: float
    values: tuple[float, ...]
    tail_bounds: tuple[float, ...]


def constancy_report(
    model,
    m: int,
    grid: Sequence,
    tol: float = 1e-10,
    subspace: str = GRADED,
    residues: Iterable[int] | None = None,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ConstancyReport:
    """Evaluate the kernel of ``model`` at level m over ``grid``; compare to ``(4/3)(L-1)(L-2)``.

    ``model`` is a punctured-ball family potential with lambda = 2, xi = 1 and
    integer m_scale mu (level m of mu*Phi is level mu*m of Phi), or ``None``
    for the base potential.
    """
    if len(grid) < 2:
        raise ParameterError("constancy needs at least two grid points")
    level = m * _disk_multiplier(model)
    if subspace == GRADED and residues is None:
        evals = [graded_kernel(level, p, tol, max_terms) for p in grid]
    else:
        res = (0, 1, 2) if residues is None else residues
        evals = [full_kernel(level, p, tol, max_terms, residues=res) for p in grid]
    values = tuple(e.value for e in evals)
    ref = float(disk_constant(level))
    mean = math.fsum(values) / len(values)
    return ConstancyReport(
        reference_constant=ref,
        max_relative_deviation=max(abs(v - ref) / ref for v in values),
        grid_mean=mean,
        max_deviation_from_mean=max(abs(v - mean) / mean for v in values),
        values=values,
        tail_bounds=tuple(e.tail_bound for e in evals),
    )


def _disk_multiplier(model) -> int:
    if model is None:
        return 1
    if getattr(model, "kind", None) != "punctured-disk-family" or model.lam != 2.0 or model.xi != 1.0:
        raise ParameterError("kernel evaluation is available for the family members Phi(mu, 2, 1) only")
    mu = model.m_scale
    if mu != int(mu) or mu < 1:
        raise ParameterError("m_scale must be a positive integer for kernel evaluation")
    return int(mu)


@dataclass(frozen=True)
class GeneratingResidual:
    m: int
    r: float
    i_max: int
    residual: float
    tail_bound: float
    lhs: float


def generating_check(m: int, r: float, i_max: int) -> GeneratingResidual:
    """``|r^m / (1-r^3)^m - sum_{i<=i_max} C(m+i-1, i) r^(m+3i)|`` with an honest bound.

    The bound is the geometric tail from the first omitted term plus a
    rounding allowance for the float summation.
    """
    if not 0.0 < r < 1.0:
        raise DomainError(f"r={r} outside (0, 1)")
    if i_max < 1:
        raise ParameterError("i_max must be >= 1")
    if m < 1:
        raise ParameterError("m must be >= 1")
    r3 = r**3
    lhs = (r / (1.0 - r3)) ** m
    partial = math.fsum(math.comb(m + i - 1, i) * r ** (m + 3 * i) for i in range(i_max + 1))
    n = i_max + 1
    first_omitted = math.comb(m + n - 1, n) * r ** (m + 3 * n)
    q = r3 * (m + n) / (n + 1)
    tail = first_omitted / (1.0 - q) if q < 1.0 else math.inf
    rounding = 8.0 * (i_max + m + 2) * 2.220446049250313e-16 * lhs
    return GeneratingResidual(m, r, i_max, abs(lhs - partial), tail + rounding, lhs)


def product_kernel(factors: Sequence[KernelEvaluation]) -> KernelEvaluation:
    """Kernel of a product metric from per-factor kernels at a common level."""
    if not factors:
        raise ParameterError("product of zero factors")
    levels = {f.m for f in factors}
    if len(levels) != 1:
        raise LevelMismatchError(f"factors disagree on the tensor level: {sorted(levels)}")
    if len(factors) == 1:
        return factors[0]
    value = math.prod(f.value for f in factors)
    bound = math.fsum(f.tail_bound / f.value for f in factors) * value
    return KernelEvaluation(
        model=" x ".join(f.model for f in factors),
        m=factors[0].m,
        r=factors[0].r,
        subspace="product",
        value=value,
        tail_bound=bound,
        terms_used=sum(f.terms_used for f in factors),
    )


def with_scale(ev: KernelEvaluation, m: int, scale: int) -> KernelEvaluation:
    """Relabel an evaluation at level ``scale*m`` as level m of the scaled factor."""
    return replace(ev, m=m, scale=scale)
