"""Completely bounded norms of maps between column/row p-spaces.

For a matrix map between the interpolated column spaces with exponents
r -> s (s <= r) the cb norm has the closed form ||alpha||_{S_2t} where
1/s = 1/r + 1/t; the row case gives the same value.  The module certifies
the closed form from below by maximizing the composition ratio
||alpha beta||_{2s} / ||beta||_{2r} over beta, seeded with the
Schatten-Hoelder equality candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .exponents import INF, as_exponent, cb_interpolation_exponent
from .matcore import schatten_norm


@dataclass(frozen=True)
class ColumnMapSpec:
    """A map alpha between n-dimensional column (or row) p-spaces."""

    alpha: np.ndarray
    r: object
    s: object
    orientation: str = "column"

    def __post_init__(self):
        a = matcore.require_square(self.alpha)
        object.__setattr__(self, "alpha", a)
        r = as_exponent(self.r)
        s = as_exponent(self.s)
        if self.orientation not in ("column", "row"):
            raise ValueError(f"unknown orientation {self.orientation!r}")
        # also validates s <= r
        cb_interpolation_exponent(r, s)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)

    @property
    def t(self):
        return cb_interpolation_exponent(self.r, self.s)

    @property
    def schatten_exponent(self):
        t = self.t
        return INF if t == INF else 2 * t


def cb_norm_closed_form(spec: ColumnMapSpec) -> float:
    """||alpha||_{S_2t}; orientation does not change the value."""
    return schatten_norm(spec.alpha, spec.schatten_exponent)


def holder_witness(alpha, r, s) -> np.ndarray:
    """Composition candidate attaining Schatten-Hoelder equality.

    beta shares alpha's right singular basis with sigma_i(beta)
    proportional to sigma_i(alpha)^(t/r) (constant when r = inf), and is
    normalized to ||beta||_{2r} = 1.
    """
    a = matcore.require_square(alpha)
    if not np.any(a):
        raise ValueError("witness undefined for the zero map")
    r = as_exponent(r)
    s = as_exponent(s)
    t = cb_interpolation_exponent(r, s)
    _, sv, vh = np.linalg.svd(a)
    if r == INF or t == INF:
        d = np.ones_like(sv)
    else:
        top = sv[0]
        d = (sv / top) ** (float(t) / float(r))
    beta = (vh.conj().T * d) @ vh
    two_r = INF if r == INF else 2 * r
    return beta / schatten_norm(beta, two_r)


def composition_ratio(alpha, beta, r, s) -> float:
    """||alpha beta||_{2s} / ||beta||_{2r}; every evaluation is a valid lower bound."""
    r = as_exponent(r)
    s = as_exponent(s)
    two_r = INF if r == INF else 2 * r
    nb = schatten_norm(beta, two_r)
    if nb == 0:
        return 0.0
    return schatten_norm(np.asarray(alpha) @ np.asarray(beta), 2 * s) / nb


@dataclass
class CbLowerBound:
    value: float
    converged: bool
    best_beta: np.ndarray


def cb_lower_bound(spec: ColumnMapSpec, iterations: int = 120, restarts: int = 8,
                   seed=0) -> CbLowerBound:
    """Max of the composition ratio over beta by projected gradient ascent.

    Every candidate is evaluated exactly, so the returned value is a true
    lower bound for the cb norm; with the analytic seed it should reach
    the closed form up to first-order stalling.  ``converged`` records
    whether the last sweep still improved materially.
    """
    a = spec.alpha
    n = a.shape[0]
    closed = cb_norm_closed_form(spec)
    if closed == 0.0:
        return CbLowerBound(0.0, True, np.zeros_like(a))
    rng = matcore.as_generator(seed)
    r, s = spec.r, spec.s
    two_r = INF if r == INF else 2 * r
    two_s = 2 * s

    seeds = [holder_witness(a, r, s)]
    for _ in range(max(restarts - 1, 0)):
        g = matcore.ginibre(n, n, rng)
        seeds.append(g / schatten_norm(g, two_r))

    def normalize(b):
        nb = schatten_norm(b, two_r)
        return b if nb == 0 else b / nb

    def grad(b):
        m = a @ b
        u, sv, vh = np.linalg.svd(m)
        nm = schatten_norm(m, two_s)
        if nm == 0:
            return np.zeros_like(b)
        if two_s == INF:
            d = np.zeros_like(sv)
            d[0] = 1.0
        else:
            d = (sv / nm) ** (float(two_s) - 1.0)
        return a.conj().T @ ((u * d) @ vh)

    best_val, best_beta = 0.0, seeds[0]
    converged = False
    for b0 in seeds:
        b = normalize(b0)
        val = composition_ratio(a, b, r, s)
        step = 0.5
        improved_last = True
        for _ in range(iterations):
            cand = normalize(b + step * grad(b))
            cval = composition_ratio(a, cand, r, s)
            if cval > val:
                improved_last = cval - val > 1e-12 * max(val, 1.0)
                b, val = cand, cval
            else:
                step *= 0.8
                if step < 1e-10:
                    break
        if val > best_val:
            best_val, best_beta = val, b
        if val >= (1.0 - 1e-9) * closed or not improved_last:
            converged = True
    return CbLowerBound(best_val, converged, best_beta)
