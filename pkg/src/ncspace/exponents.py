"""Exponent arithmetic for Lebesgue/Schatten indices.

Indices live in [1, inf] and are combined through their reciprocals
(conjugation, Hoelder splitting, interpolation).  To avoid drift in chains
like 1/s = 1/r + 1/t we keep exact ``Fraction`` slots whenever an index is
rational with a small denominator, and fall back to floats otherwise.
``math.inf`` is the first-class value for the endpoint index.
"""

from __future__ import annotations

import math
from fractions import Fraction

INF = math.inf

#: indices whose denominator is at most this are kept as exact rationals
MAX_DENOMINATOR = 12


def as_exponent(p, lower=1.0):
    """Validate an index in [lower, inf]; returns Fraction, int/float or inf."""
    if p == INF:
        return INF
    if isinstance(p, Fraction):
        q = p
    elif isinstance(p, int):
        q = Fraction(p)
    else:
        p = float(p)
        if math.isnan(p):
            raise ValueError("exponent must not be NaN")
        q = Fraction(p).limit_denominator(MAX_DENOMINATOR)
        if abs(float(q) - p) > 1e-12 * max(1.0, abs(p)):
            q = p  # genuinely irrational-looking input: keep the float
    if float(q) < lower - 1e-12:
        raise ValueError(f"exponent {p} out of range [{lower}, inf]")
    return q


def inv(p):
    """1/p with the convention 1/inf = 0; exact for rational p."""
    if p == INF:
        return Fraction(0)
    if isinstance(p, (int, Fraction)):
        return Fraction(1, 1) / Fraction(p)
    return 1.0 / p


def from_inv(x):
    """Inverse of :func:`inv`: 0 -> inf, exact for rational reciprocals."""
    if x == 0:
        return INF
    if isinstance(x, Fraction):
        return Fraction(1, 1) / x
    return 1.0 / x


def conjugate(p):
    """Dual index: 1/p + 1/p' = 1."""
    p = as_exponent(p)
    return from_inv(1 - inv(p))


def holder_gamma(r, s):
    """gamma with 1/gamma = 1/r + 1/s (Hoelder combination of two indices)."""
    r = as_exponent(r)
    s = as_exponent(s)
    return from_inv(inv(r) + inv(s))


def cb_interpolation_exponent(r, s):
    """t with 1/s = 1/r + 1/t, defined for s <= r; t = inf when r = s."""
    r = as_exponent(r)
    s = as_exponent(s)
    d = inv(s) - inv(r)
    if float(d) < -1e-12:
        raise ValueError(f"need s <= r, got r={r}, s={s}")
    if float(d) <= 0:
        return INF
    return from_inv(d)


def as_float(p):
    return float(p) if p != INF else INF


def exponents_close(a, b, tol=1e-12):
    if a == INF or b == INF:
        return a == b
    return abs(float(a) - float(b)) <= tol
