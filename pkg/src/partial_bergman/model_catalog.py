"""Concrete models and their scaled products.

A product ``c_1 g_1 + ... + c_q g_q`` is kept as a list of factors; its
kernel at level m is the product of the factor kernels, each taken at level
``c_a m`` of the unscaled factor (the potential ``c phi`` at weight m is
``phi`` at weight ``c m``).

Standard factors:

* flat C^k, potential r: monomial norms ``j! / m^(j+1)`` per coordinate,
  kernel constant ``m^k``, scalar curvature 0;
* Fubini-Study on CP^1, potential log(1 + r): norms ``j! (m-j)! / (m+1)!``
  for 0 <= j <= m, kernel constant ``m + 1``, scalar curvature ``8 pi``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from . import radial_geometry as rg
from .bergman_kernel import (
    DEFAULT_MAX_TERMS,
    KernelEvaluation,
    disk_constant,
    graded_kernel,
    product_kernel,
    rounding_allowance,
    with_scale,
)
from .errors import (
    DimensionError,
    DomainError,
    LevelTooSmallError,
    ParameterError,
    RangeError,
    ToleranceUnreachableError,
)
from .quadrature import integrate, integrate_semi_infinite
from .special import log_gamma

DISK = "punctured-disk-family"
FS = "fubini-study"
FLAT = "flat"


@dataclass(frozen=True)
class Factor:
    potential: rg.RadialPotential
    scale: int = 1
    dim: int = 1

    def __post_init__(self):
        if int(self.scale) != self.scale or self.scale < 1:
            raise ParameterError("factor scale must be a positive integer")
        if self.dim < 1:
            raise ParameterError("factor dimension must be >= 1")
        kind = self.potential.kind
        if kind == DISK and self.dim != 2:
            raise DimensionError("punctured-ball factors have complex dimension 2")
        if kind == FS and self.dim != 1:
            raise DimensionError("the Fubini-Study factor is CP^1 (dimension 1)")

    @property
    def kind(self) -> str:
        return self.potential.kind

    def _disk_mu(self) -> int:
        p = self.potential
        if p.lam != 2.0 or p.xi != 1.0 or p.m_scale != int(p.m_scale):
            raise ParameterError(
                "kernel data are known for the family members Phi(mu, 2, 1) with integer mu only"
            )
        return int(p.m_scale)

    def base_level(self, m: int) -> int:
        """Level of the unscaled reference model matching level m of this factor."""
        if self.kind == DISK:
            return self.scale * self._disk_mu() * m
        if self.kind in (FLAT, FS):
            return self.scale * m
        raise ParameterError(f"no kernel data for {self.kind} factors")

    @property
    def min_level(self) -> int:
        if self.kind == DISK:
            return -(-3 // (self.scale * self._disk_mu()))
        if self.kind in (FLAT, FS):
            return 1
        raise ParameterError(f"no kernel data for {self.kind} factors")

    def kernel_constant(self, m: int) -> Fraction:
        level = self.base_level(m)
        if m < self.min_level:
            raise LevelTooSmallError(f"level {m} below the minimal level {self.min_level} of {self.describe()}")
        if self.kind == DISK:
            return disk_constant(level)
        if self.kind == FLAT:
            return Fraction(level) ** self.dim
        return Fraction(level + 1)

    def scalar_curvature_over_pi(self) -> Fraction:
        """Exact ``s / pi`` of the scaled factor."""
        if self.kind == DISK:
            base = Fraction(-24) / Fraction(self.potential.m_scale)
        elif self.kind == FS:
            base = Fraction(8)
        elif self.kind == FLAT:
            base = Fraction(0)
        else:
            raise ParameterError("no analytic scalar curvature for custom profiles")
        return base / self.scale

    def scalar_curvature_at(self, r: float) -> float:
        """Numerical scalar curvature of the scaled factor at radius r."""
        return rg.scalar_curvature(self.potential.scaled(self.scale), r, self.dim)

    def kernel(self, m: int, r: float, tol: float = 1e-10, max_terms: int = DEFAULT_MAX_TERMS) -> KernelEvaluation:
        if m < self.min_level:
            raise LevelTooSmallError(f"level {m} below the minimal level {self.min_level} of {self.describe()}")
        level = self.base_level(m)
        if self.kind == DISK:
            ev = graded_kernel(level, r, tol, max_terms)
        elif self.kind == FLAT:
            ev = flat_kernel(level, r, self.dim, tol, max_terms)
        else:
            ev = fs_kernel(level, r)
        return with_scale(ev, m, self.scale)

    def describe(self) -> str:
        name = {DISK: f"Phi({self.potential.m_scale},{self.potential.lam},{self.potential.xi})", FS: "FS", FLAT: f"flat(C^{self.dim})"}.get(
            self.kind, self.potential.label or self.kind
        )
        return name if self.scale == 1 else f"{self.scale}*{name}"


@dataclass(frozen=True)
class ProductModel:
    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise ParameterError("a product model needs at least one factor")

    @property
    def total_dim(self) -> int:
        return sum(f.dim for f in self.factors)

    @property
    def min_level(self) -> int:
        return max(f.min_level for f in self.factors)

    def scalar_curvature_over_pi(self) -> Fraction:
        """``s / pi`` by additivity over factors."""
        return sum((f.scalar_curvature_over_pi() for f in self.factors), Fraction(0))

    @property
    def scalar_curvature(self) -> float:
        return float(self.scalar_curvature_over_pi()) * math.pi

    def describe(self) -> str:
        return " + ".join(f.describe() for f in self.factors)

    def to_dict(self) -> dict:
        out = []
        for f in self.factors:
            p = f.potential
            if f.kind == rg.KINDS[3]:
                raise ParameterError("custom profiles cannot be serialized")
            out.append(
                {
                    "kind": f.kind,
                    "m_scale": p.m_scale,
                    "lambda": p.lam,
                    "xi": p.xi,
                    "scale": f.scale,
                    "dim": f.dim,
                }
            )
        return {"factors": out, "total_dim": self.total_dim}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def model_from_dict(doc: dict) -> ProductModel:
    """Inverse of :meth:`ProductModel.to_dict`; ``total_dim`` is checked when present."""
    try:
        entries = doc["factors"]
    except (KeyError, TypeError):
        raise ParameterError("model description needs a 'factors' list") from None
    factors = []
    for e in entries:
        kind = e.get("kind")
        scale = e.get("scale", 1)
        if kind == DISK:
            pot = make_family(e.get("m_scale") or 1, e.get("lambda") or 2.0, e.get("xi") or 1.0)
            factors.append(Factor(pot, scale, e.get("dim", 2)))
        elif kind == FS:
            factors.append(Factor(rg.fubini_study(), scale, e.get("dim", 1)))
        elif kind == FLAT:
            factors.append(Factor(rg.flat(), scale, e.get("dim", 1)))
        else:
            raise ParameterError(f"unknown factor kind {kind!r}")
    model = make_product(factors)
    if "total_dim" in doc and doc["total_dim"] != model.total_dim:
        raise ParameterError(f"total_dim {doc['total_dim']} does not match factor dimensions ({model.total_dim})")
    return model


def model_from_json(text: str) -> ProductModel:
    return model_from_dict(json.loads(text))


# --------------------------------------------------------------------------
# constructors


def make_family(m_scale, lam, xi) -> rg.RadialPotential:
    return rg.family_potential(m_scale, lam, xi)


def make_standard(tag: str, k: int = 1) -> Factor:
    """``flat`` (C^k) or ``fubini-study`` (CP^1) as a unit-scale factor."""
    if tag == FLAT:
        if k < 1:
            raise ParameterError("flat factor needs k >= 1")
        return Factor(rg.flat(), 1, k)
    if tag in (FS, "fs"):
        return Factor(rg.fubini_study(), 1, 1)
    raise ParameterError(f"unknown standard model {tag!r}")


def make_product(factors: Iterable) -> ProductModel:
    """Accepts ``Factor`` objects or ``(potential-or-Factor, scale, dim)`` triples."""
    out = []
    for f in factors:
        if isinstance(f, Factor):
            out.append(f)
            continue
        model, scale, dim = f
        if isinstance(model, Factor):
            model = model.potential
        out.append(Factor(model, scale, dim))
    return ProductModel(tuple(out))


def theorem_instance(n: int, sign: str) -> ProductModel:
    """Strictly partially regular cscK products of dimension n with the requested sign.

    negative: g* + flat(C^(n-2)), n >= 2;
    zero:     3 g* + FS + flat(C^(n-3)), n >= 3;
    positive: 4 g* + FS + flat(C^(n-3)), n >= 3.
    """
    disk = rg.punctured_disk()
    if sign == "negative":
        if n < 2:
            raise DimensionError("the negative instance needs n >= 2")
        factors = [Factor(disk, 1, 2)]
        rest = n - 2
    elif sign in ("zero", "positive"):
        if n < 3:
            raise DimensionError(f"the {sign} instance needs n >= 3")
        factors = [Factor(disk, 3 if sign == "zero" else 4, 2), make_standard(FS)]
        rest = n - 3
    else:
        raise ParameterError(f"sign must be negative, zero or positive, got {sign!r}")
    if rest:
        factors.append(make_standard(FLAT, rest))
    return ProductModel(tuple(factors))


def expected_constant(model: ProductModel, m: int) -> Fraction:
    if m < model.min_level:
        raise LevelTooSmallError(f"level {m} below the minimal level {model.min_level}")
    return math.prod((f.kernel_constant(m) for f in model.factors), start=Fraction(1))


def product_kernel_at(
    model: ProductModel,
    m: int,
    radii,
    tol: float = 1e-10,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> KernelEvaluation:
    """Kernel of the product at level m; ``radii`` is one r for every factor or one per factor."""
    if isinstance(radii, (int, float)):
        radii = [radii] * len(model.factors)
    if len(radii) != len(model.factors):
        raise ParameterError("need one radius per factor")
    return product_kernel([f.kernel(m, r, tol, max_terms) for f, r in zip(model.factors, radii)])


# --------------------------------------------------------------------------
# standard-model norms and kernels


def flat_norm(m: int, j: int) -> Fraction:
    """``||w^j||^2 = j! / m^(j+1)`` on C with weight exp(-m |w|^2)."""
    if m < 1 or j < 0:
        raise RangeError("flat norms need m >= 1 and j >= 0")
    return Fraction(math.factorial(j), m ** (j + 1))


def fs_norm(m: int, j: int) -> Fraction:
    """``||w^j||^2 = j! (m-j)! / (m+1)!`` on CP^1 with weight (1 + |w|^2)^(-m)."""
    if not 0 <= j <= m:
        raise RangeError(f"w^{j} is not a section at level {m}")
    return Fraction(math.factorial(j) * math.factorial(m - j), math.factorial(m + 1))


def radial_norm_quadrature(pot: rg.RadialPotential, m: int, j: int, rel_tol: float = 1e-12) -> float:
    """``int_0^R t^j e^(-m phi(t)) (t phi')'(t) dt``: norm of w^j for a radial metric on C.

    Volume form and weight are taken from the potential itself, so this is
    an oracle independent of the closed-form norm tables.
    """

    def f(t):
        if t <= 0.0:
            return 0.0
        phi, p1, p2, _, _ = pot.derivatives(t)
        return t**j * math.exp(-m * phi) * (p1 + t * p2)

    if math.isinf(pot.radius):
        return integrate_semi_infinite(f, rel_tol=rel_tol).value
    return integrate(f, 0.0, pot.radius, rel_tol=rel_tol).value


def flat_kernel(
    m: int, r: float, k: int = 1, tol: float = 1e-10, max_terms: int = DEFAULT_MAX_TERMS
) -> KernelEvaluation:
    """``e^(-m r) sum_J |w^J|^2 / ||w^J||^2 = m^k e^(-m r) sum_s (m r)^s / s!`` on C^k."""
    if r < 0:
        raise DomainError("r must be >= 0")
    if m < 1:
        raise ParameterError("level must be >= 1")
    base = k * math.log(m) - m * r
    mr = m * r
    terms = []
    tail = math.inf
    s = 0
    while True:
        if s >= max_terms:
            raise ToleranceUnreachableError(f"flat kernel not certified within {max_terms} terms", terms_used=s)
        if mr == 0.0:
            terms.append(math.exp(base))
            tail = 0.0
            s = 1
            break
        t = math.exp(base + s * math.log(mr) - log_gamma(s + 1))
        terms.append(t)
        q_next = mr / (s + 1)
        q_rest = mr / (s + 2)
        s += 1
        if q_rest < 1.0:
            tail = t * q_next / (1.0 - q_rest)
            value = math.fsum(terms)
            if tail <= tol * min(1.0, value):
                break
    value = math.fsum(terms)
    log_scale = abs(base) + s * abs(math.log(mr)) + log_gamma(s + 1) if mr else abs(base)
    tail += rounding_allowance(value, s, log_scale)
    return KernelEvaluation(f"flat(C^{k})", m, r, "full", value, tail, s)


def fs_kernel(m: int, r: float) -> KernelEvaluation:
    """``(1 + r)^(-m) sum_{j<=m} r^j / ||w^j||^2`` on CP^1; a finite sum."""
    if r < 0:
        raise DomainError("r must be >= 0")
    if m < 1:
        raise ParameterError("level must be >= 1")
    log_w = -m * math.log1p(r)
    terms = []
    for j in range(m + 1):
        inv = 1 / fs_norm(m, j)
        log_t = log_w + math.log(inv.numerator) - math.log(inv.denominator)
        if j:
            if r == 0.0:
                continue
            log_t += j * math.log(r)
        terms.append(math.exp(log_t))
    value = math.fsum(terms)
    # No truncation; the bound covers rounding in the logs and exponentials.
    bound = rounding_allowance(value, m + 1, abs(log_w) + math.log(m + 2) * (m + 1))
    return KernelEvaluation("fubini-study", m, r, "full", value, bound, m + 1)
