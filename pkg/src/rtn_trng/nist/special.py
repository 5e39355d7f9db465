"""Special functions for P-value computation.

Thin wrappers that pin down argument checking; the numerics come from the
standard library and :mod:`scipy.special`.
"""

from __future__ import annotations

import math

from scipy import special as _sp


def erfc(x: float) -> float:
    return math.erfc(x)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _check(a: float, x: float) -> None:
    if a <= 0:
        raise ValueError("incomplete gamma requires a > 0")
    if x < 0:
        raise ValueError("incomplete gamma requires x >= 0")


def igamc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x)."""
    _check(a, x)
    return float(_sp.gammaincc(a, x))


def igam(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    _check(a, x)
    return float(_sp.gammainc(a, x))
