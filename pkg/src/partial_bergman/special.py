"""Log-gamma via the Lanczos approximation."""
from __future__ import annotations

import math

from .errors import DomainError

# g = 7, n = 9 coefficient set; relative accuracy of Gamma near 1e-15.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x: float) -> float:
    """Return log Gamma(x) for x > 0.

    Arguments below 1/2 are mapped through the reflection formula, and
    arguments below 3 are shifted upward so the series is evaluated where
    it is most accurate.
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"log_gamma requires finite x > 0, got {x!r}")
    if x < 0.5:
        # Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    shift = 0.0
    while x < 3.0:
        shift += math.log(x)
        x += 1.0
    return _lanczos(x) - shift


def _lanczos(x: float) -> float:
    x -= 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (x + 0.5) * math.log(t) - t + math.log(acc)


def log_beta(a: float, b: float) -> float:
    """log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b)."""
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)
