"""Quantized Steinhaus systems and type/cotype witness evaluations.

A parameter set is a finite list of degrees d_sigma; a sample draws one
independent Haar unitary per degree (degree-1 entries are uniform random
phases).  Synthesis contracts coefficient blocks against the sample,
f = sum_sigma d_sigma tr(A^sigma zeta^sigma), with coefficients valued in
a closed set of target spaces: scalars, l_p^N vectors, or S_p^d matrices.

The witnesses are the explicit coefficient families whose two closed-form
norms force lower bounds on the type/cotype constants; their sampled
norms are almost surely constant, so the Monte Carlo estimator
short-circuits to the deterministic value after a zero-variance probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .exponents import INF, as_exponent, as_float, conjugate
from .matcore import RngSeed, schatten_norm

#: per-sample capacity: sum of squared degrees
SAMPLE_CAP = 10 ** 6


# ---------------------------------------------------------------------------
# parameter sets, samples, coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParameterSet:
    degrees: tuple

    def __post_init__(self):
        degs = tuple(int(d) for d in self.degrees)
        if not degs or any(d < 1 for d in degs):
            raise ValueError("degrees must be a nonempty list of positive integers")
        object.__setattr__(self, "degrees", degs)

    @property
    def commutative(self) -> bool:
        return all(d == 1 for d in self.degrees)

    @property
    def size(self) -> int:
        return len(self.degrees)


@dataclass(frozen=True)
class SteinhausSample:
    unitaries: tuple
    seed: RngSeed

    def unitarity_residual(self) -> float:
        worst = 0.0
        for u in self.unitaries:
            d = u.shape[0]
            worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(d)))))
        return worst


@dataclass(frozen=True)
class TargetSpace:
    """Norm evaluator for the coefficient value space E.

    kind "scalar": complex numbers with absolute value; "vector": l_p^N;
    "matrix": S_p^d.  ``shape`` is the trailing shape of synthesized
    elements.
    """

    kind: str
    p: object = 2
    shape: tuple = ()

    def __post_init__(self):
        if self.kind not in ("scalar", "vector", "matrix"):
            raise ValueError(f"unknown target space kind {self.kind!r}")
        as_exponent(self.p)

    def norm(self, value: np.ndarray) -> float:
        if self.kind == "scalar":
            return float(abs(complex(value)))
        if self.kind == "vector":
            a = np.abs(np.asarray(value))
            if self.p == INF:
                return float(a.max(initial=0.0))
            return float(np.sum(a ** float(self.p)) ** (1.0 / float(self.p)))
        return schatten_norm(np.asarray(value), self.p)


def scalar_space() -> TargetSpace:
    return TargetSpace("scalar")


def vector_space(p, n) -> TargetSpace:
    return TargetSpace("vector", p, (n,))


def matrix_space(p, d) -> TargetSpace:
    return TargetSpace("matrix", p, (d, d))


@dataclass(frozen=True)
class FourierCoefficients:
    """One coefficient block per degree: shape (d_sigma, d_sigma) + E-shape."""

    blocks: tuple
    space: TargetSpace

    def __post_init__(self):
        for b in self.blocks:
            b = np.asarray(b)
            if b.shape[2:] != self.space.shape or b.shape[0] != b.shape[1]:
                raise ValueError(f"coefficient block shape {b.shape} inconsistent "
                                 f"with target shape {self.space.shape}")


def sample_system(ps: ParameterSet, seed) -> SteinhausSample:
    """One independent Haar draw per degree, on disjoint RNG streams."""
    if sum(d * d for d in ps.degrees) > SAMPLE_CAP:
        raise matcore.CapacityError("parameter set too large for one sample")
    root = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    us = []
    for i, d in enumerate(ps.degrees):
        us.append(matcore.haar_unitary(d, root.child(f"sigma{i}")))
    return SteinhausSample(tuple(us), root)


def synthesize(coeffs: FourierCoefficients, sample: SteinhausSample) -> np.ndarray:
    """f = sum_sigma d_sigma tr(A^sigma zeta^sigma), an E-valued element.

    The trace contracts matrix indices: tr(A zeta) = sum_ij A[i, j] zeta[j, i].
    """
    if len(coeffs.blocks) != len(sample.unitaries):
        raise ValueError("coefficient/sample length mismatch")
    out = np.zeros(coeffs.space.shape, dtype=np.complex128)
    if coeffs.space.kind == "scalar":
        out = np.zeros((), dtype=np.complex128)
    for a, u in zip(coeffs.blocks, sample.unitaries):
        a = np.asarray(a, dtype=np.complex128)
        d = u.shape[0]
        if a.shape[0] != d:
            raise ValueError("coefficient block degree mismatch")
        out = out + d * np.einsum("ij...,ji->...", a, u)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    count: int
    deterministic: bool = False

    @property
    def ci3(self) -> float:
        return 3.0 * self.std_error


#: probe size for the deterministic short-circuit
PROBE = 32
PROBE_VARIANCE = 1e-10


def mc_moment(coeffs: FourierCoefficients, ps: ParameterSet, u, samples: int,
              seed) -> MCEstimate:
    """(E ||f||^u)^(1/u) with a 3-sigma-ready standard error.

    If the per-sample norm shows zero variance over the first PROBE draws
    the witness norm is almost surely constant and the estimate
    short-circuits to that value.  Accumulation uses numpy pairwise
    summation, so the result does not depend on chunking.
    """
    u = as_exponent(u)
    if u == INF:
        raise ValueError("moment exponent must be finite")
    if samples < PROBE:
        raise ValueError(f"need at least {PROBE} samples")
    root = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    uf = float(u)

    def norms(count, offset):
        vals = np.empty(count)
        for i in range(count):
            s = sample_system(ps, root.child(f"mc{offset + i}"))
            vals[i] = coeffs.space.norm(synthesize(coeffs, s))
        return vals

    probe = norms(PROBE, 0)
    if float(probe.std()) < PROBE_VARIANCE * max(1.0, float(probe.mean())):
        return MCEstimate(float(probe.mean()), 0.0, PROBE, deterministic=True)
    rest = norms(samples - PROBE, PROBE)
    vals = np.concatenate([probe, rest]) ** uf
    mean = float(vals.mean())
    se = float(vals.std(ddof=1)) / math.sqrt(samples)
    root_mean = mean ** (1.0 / uf)
    # delta method for the u-th root
    se_root = se * root_mean / (uf * mean) if mean > 0 else se
    return MCEstimate(root_mean, se_root, samples)


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessReport:
    d: int
    exponents: dict
    closed_lhs: float
    closed_rhs: float
    measured: float
    implied_bound: float
    measured_side: str
    ci3: float = 0.0
    samples: int = 1
    note: str = ""


def type_witness_coefficients(d: int) -> FourierCoefficients:
    """A[i, j] = e_ij in S_p^d, so that tr(A zeta) = zeta^t."""
    a = np.zeros((d, d, d, d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            a[i, j, i, j] = 1.0
    return FourierCoefficients((a,), matrix_space(2, d))


def sigma_type_witness(d: int, p, q, seed=0) -> WitnessReport:
    """Lower bound d^(2(1/p - 1/q)) on the type-q constant of S_p^d.

    The function side is d * (transpose of one Haar unitary), whose S_p
    norm is the constant d^(1 + 1/p); the coefficient side combines the
    degree weight d^(1/q) with the coefficient norm d^(2/r),
    1/r = (1 - 1/p + 1/q)/2.  One sample verifies the deterministic
    function norm.
    """
    p = as_exponent(p)
    q = as_exponent(q)
    if not (1 <= float(p) < float(q) <= 2):
        raise ValueError("need 1 <= p < q <= 2")
    dd = float(d)
    lhs = dd ** (1.0 + 1.0 / float(p))
    inv_r = 0.5 * (1.0 - 1.0 / float(p) + 1.0 / float(q))
    rhs = dd ** (1.0 / float(q)) * dd ** (2.0 * inv_r)
    implied = dd ** (2.0 * (1.0 / float(p) - 1.0 / float(q)))

    coeffs = FourierCoefficients(type_witness_coefficients(d).blocks, matrix_space(p, d))
    sample = sample_system(ParameterSet((d,)), seed)
    measured = coeffs.space.norm(synthesize(coeffs, sample))
    return WitnessReport(d, {"p": as_float(p), "q": as_float(q), "r": 1.0 / inv_r},
                         lhs, rhs, measured, implied, measured_side="lhs")


def cotype_witness(d: int, p, qprime, seed=0) -> WitnessReport:
    """Cotype witness in the column-space slice of S_q'(S_p).

    Closed forms: coefficient side d^(1/2 + 1/(2p) + 1/(2q')) and function
    side d^(1/q + 1/(2q') + 1/(2p')) with q conjugate to q'; the implied
    ratio is d^(1/p - 1/q).  The measured value is the function side from
    one sample: the slice norm of the transposed unitary is the Schatten
    s-norm with 1/s = 1/(2q') + 1/(2p').
    """
    p = as_exponent(p)
    qprime = as_exponent(qprime)
    pprime = conjugate(p)
    if not (1 <= float(p) <= 2):
        raise ValueError("need 1 <= p <= 2")
    if not (2 <= float(qprime) and (pprime == INF or float(qprime) < float(pprime))):
        raise ValueError("need 2 <= q' < p'")
    q = conjugate(qprime)
    dd = float(d)
    coeff_side = dd ** (0.5 + 0.5 / float(p) + 0.5 / float(qprime))
    inv_pprime = 0.0 if pprime == INF else 1.0 / float(pprime)
    func_side = dd ** (1.0 / float(q) + 0.5 / float(qprime) + 0.5 * inv_pprime)
    implied = coeff_side / func_side

    inv_s = 0.5 / float(qprime) + 0.5 * inv_pprime
    s = INF if inv_s == 0 else 1.0 / inv_s
    sample = sample_system(ParameterSet((d,)), seed)
    zeta_t = sample.unitaries[0].T
    measured = dd ** (1.0 / float(q)) * schatten_norm(zeta_t, s)
    return WitnessReport(d, {"p": as_float(p), "qprime": as_float(qprime),
                             "s": as_float(s)},
                         coeff_side, func_side, measured, implied,
                         measured_side="rhs")


def commutative_type_bound(gamma_size: int, p, q, samples: int = 10_000,
                           seed=0) -> WitnessReport:
    """Observed constant in the bounded-degree type chain on l_p(Gamma).

    With coefficients e_11 (x) delta_sigma the synthesized function is the
    vector of phases, so its l_p norm is |Gamma|^(1/p) almost surely; the
    implied constant is the measured q'-moment divided by |Gamma|^(1/p),
    equal to 1 up to Monte Carlo error (exactly 1 on the deterministic
    short-circuit path).
    """
    p = as_exponent(p)
    q = as_exponent(q)
    if not (1 <= float(p) < float(q) <= 2):
        raise ValueError("need 1 <= p < q <= 2")
    ps = ParameterSet((1,) * gamma_size)
    if not ps.commutative:
        raise ValueError("commutative parameter set required")
    space = vector_space(p, gamma_size)
    blocks = []
    for s_idx in range(gamma_size):
        b = np.zeros((1, 1, gamma_size), dtype=np.complex128)
        b[0, 0, s_idx] = 1.0
        blocks.append(b)
    coeffs = FourierCoefficients(tuple(blocks), space)
    qprime = conjugate(q)
    est = mc_moment(coeffs, ps, qprime, samples, seed)
    denom = float(gamma_size) ** (1.0 / float(p))
    coeff_norm = float(gamma_size) ** (1.0 / float(q))
    implied_c = est.mean / denom
    return WitnessReport(gamma_size, {"p": as_float(p), "q": as_float(q)},
                         denom, coeff_norm, est.mean, implied_c,
                         measured_side="lhs", ci3=est.ci3 / denom,
                         samples=est.count,
                         note="deterministic" if est.deterministic else "monte-carlo")


# ---------------------------------------------------------------------------
# the classical scalar equivalence for sums of independent variables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Distribution:
    kind: str  # "exponential" | "bernoulli" | "uniform"
    theta: float = 0.5

    def moment(self, r) -> float:
        """E |f|^r, exactly."""
        rf = float(r)
        if self.kind == "exponential":
            return math.exp(math.lgamma(rf + 1.0))
        if self.kind == "bernoulli":
            return self.theta
        if self.kind == "uniform":
            return 1.0 / (rf + 1.0)
        raise ValueError(f"unknown distribution {self.kind!r}")

    def sample(self, shape, rng) -> np.ndarray:
        if self.kind == "exponential":
            return rng.exponential(1.0, shape)
        if self.kind == "bernoulli":
            return (rng.random(shape) < self.theta).astype(float)
        if self.kind == "uniform":
            return rng.random(shape)
        raise ValueError(f"unknown distribution {self.kind!r}")


def classical_rosenthal_check(dist: Distribution, n: int, p, samples: int, seed=0):
    """Monte Carlo check of (E (sum |f_k|)^p)^(1/p) against the max of moments.

    Returns (lhs: MCEstimate, rhs, ratio, ratio_ci3); rhs is computed from
    exact distribution moments, max over r in {1, p} of
    (sum_k E|f_k|^r)^(1/r).
    """
    p = as_exponent(p)
    if samples < 1000:
        raise ValueError("need at least 10^3 samples")
    pf = float(p)
    rng = matcore.as_generator(seed)
    draws = dist.sample((samples, n), rng)
    sums = np.abs(draws).sum(axis=1)
    powers = sums ** pf
    mean = float(powers.mean())
    se = float(powers.std(ddof=1)) / math.sqrt(samples)
    lhs_val = mean ** (1.0 / pf)
    se_root = se * lhs_val / (pf * mean) if mean > 0 else 0.0
    lhs = MCEstimate(lhs_val, se_root, samples,
                     deterministic=float(powers.std()) == 0.0)
    rhs = max(n * dist.moment(1.0), (n * dist.moment(pf)) ** (1.0 / pf))
    ratio = lhs.mean / rhs
    return lhs, rhs, ratio, lhs.ci3 / rhs
