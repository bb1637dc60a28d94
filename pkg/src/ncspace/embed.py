"""Slot embeddings of Schatten classes and their verified norm bounds.

Builds the map x -> n^(-1/q) sum_k delta_k (x) pi_k(x) into m copies of
tensor slots, the sum-of-independent-variables element
sum_k delta_k (x) pi_k(x_k), and runs the desk-scale checks: the q = p
isometry, the q = 1 two-sided sandwich against the intersection norm, the
dual sum-norm sandwich, the noncommutative Rosenthal inequality for
positive summands, and the minimal-structure comparison for self-adjoint
and general inputs.

Everything here verifies Banach-level (level-1) instances of completely
bounded statements; reports carry that qualification in their header.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import matcore, mixednorm
from .exponents import INF, as_exponent, conjugate
from .matcore import (
    CapacityError,
    TensorSlot,
    ambient_slot_embed,
    lp_trace_norm,
    partial_trace,
    require_square,
    schatten_norm,
    slot_embed,
)
from .mixednorm import (
    CertifiedValue,
    JKNormSpec,
    SolverOptions,
    VectorElement,
    commutative_mixed_norm,
    jk_norm,
    norm_l1_valued,
    norm_linf_valued,
)

LEVEL_NOTE = "level-1 (Banach) verification of completely bounded statements"


# ---------------------------------------------------------------------------
# specs and elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingSpec:
    """Base dimension n, copy count m >= n^2, outer p and inner q exponents."""

    n: int
    p: object
    q: object
    m: int = 0

    def __post_init__(self):
        m = self.m if self.m else self.n ** 2
        object.__setattr__(self, "m", m)
        if m < self.n ** 2:
            raise ValueError(f"copy count m={m} must be at least n^2={self.n ** 2}")
        as_exponent(self.p)
        as_exponent(self.q)
        matcore.check_dim(self.n ** m)

    @property
    def total_dim(self) -> int:
        return self.n ** self.m


@dataclass(frozen=True)
class IndependentFamily:
    """Matrices x_1..x_n in M_(ambient*l), fed slot-wise into M_(ambient*l^n)."""

    block_dim: int
    matrices: np.ndarray
    ambient: int = 1

    def __post_init__(self):
        mats = np.ascontiguousarray(np.asarray(self.matrices, dtype=np.complex128))
        if mats.ndim == 2:
            mats = mats[None]
        d = self.ambient * self.block_dim
        if mats.ndim != 3 or mats.shape[1] != d or mats.shape[2] != d:
            raise ValueError(f"expected matrices of size {d}x{d}, got {mats.shape}")
        object.__setattr__(self, "matrices", mats)
        matcore.check_dim(self.ambient * self.block_dim ** mats.shape[0])

    @property
    def count(self) -> int:
        return self.matrices.shape[0]

    @property
    def total_dim(self) -> int:
        return self.ambient * self.block_dim ** self.count


# ---------------------------------------------------------------------------
# the maps
# ---------------------------------------------------------------------------

def phi(x, spec: EmbeddingSpec) -> VectorElement:
    """m components n^(-1/q) pi_k(x) in M_(n^m), normalized trace weight."""
    a = require_square(x)
    if a.shape[0] != spec.n:
        raise ValueError(f"input dim {a.shape[0]} != spec n {spec.n}")
    pref = float(spec.n) ** (-1.0 / float(spec.q)) if spec.q != INF else 1.0
    comps = np.stack([
        pref * slot_embed(a, TensorSlot(spec.m, spec.n, k + 1)) for k in range(spec.m)])
    return VectorElement(comps, matcore.normalized(spec.total_dim))


def lambda_p1(fam: IndependentFamily) -> VectorElement:
    """sum_k delta_k (x) pi_k(x_k): the k-th component is pi_k(x_k)."""
    if fam.ambient != 1:
        raise ValueError("lambda maps act on families without an ambient factor")
    n, l = fam.count, fam.block_dim
    comps = np.stack([
        slot_embed(fam.matrices[k], TensorSlot(n, l, k + 1)) for k in range(n)])
    return VectorElement(comps, matcore.normalized(fam.total_dim))


# the intersection- and sum-normed directions act on the same element
lambda_dual = lambda_p1


def pairing_check(a: IndependentFamily, b: IndependentFamily):
    """Transpose pairing before and after the slot embedding.

    lhs = sum_k tau(pi_k(a_k)^t pi_k(b_k)) on M_(l^n), rhs = sum_k
    tau_l(a_k^t b_k); the two agree exactly because each slot embedding
    preserves the normalized trace.
    """
    if a.block_dim != b.block_dim or a.count != b.count or a.ambient != b.ambient != 1:
        if a.block_dim != b.block_dim or a.count != b.count or a.ambient != 1 or b.ambient != 1:
            raise ValueError("families must share (l, n) and have no ambient factor")
    ea, eb = lambda_p1(a), lambda_p1(b)
    big_dim = ea.dim
    lhs = sum(
        np.trace(ea.components[k].T @ eb.components[k]) for k in range(a.count)) / big_dim
    rhs = sum(
        np.trace(a.matrices[k].T @ b.matrices[k]) for k in range(a.count)) / a.block_dim
    return complex(lhs), complex(rhs)


def diagonal_projection(x, block_count: int) -> np.ndarray:
    """Zero the off-diagonal blocks of an (n*d) x (n*d) matrix of n x n blocks."""
    a = require_square(x)
    if a.shape[0] % block_count:
        raise ValueError("matrix dimension is not divisible by the block count")
    d = a.shape[0] // block_count
    out = np.zeros_like(a)
    for i in range(block_count):
        sl = slice(i * d, (i + 1) * d)
        out[sl, sl] = a[sl, sl]
    return out


def sign_average_projection(x, block_count: int) -> np.ndarray:
    """Average of D_eps x D_eps over all sign patterns; equals the block diagonal."""
    a = require_square(x)
    d = a.shape[0] // block_count
    acc = np.zeros_like(a)
    for eps in itertools.product((1.0, -1.0), repeat=block_count):
        de = np.repeat(np.asarray(eps), d)
        acc += (a * de[:, None]) * de[None, :]
    return acc / 2 ** block_count


# ---------------------------------------------------------------------------
# norms of embedded elements
# ---------------------------------------------------------------------------

def phi_norm(xel: VectorElement, p, q, opts: SolverOptions | None = None) -> CertifiedValue:
    """L_p(tau; l_q^m) norm of an embedded element; exact block formula at q = p."""
    p = as_exponent(p)
    q = as_exponent(q)
    return mixednorm.vector_valued_norm(xel, p, q, opts)


def theorem_main_result(fam: IndependentFamily, p, opts: SolverOptions | None = None):
    """Sandwich of the l_1-valued norm by the intersection norm.

    Returns (lhs, cap, ratio_low, ratio_high): lhs is the certified
    bracket of ||sum_k delta_k pi_k(x_k)|| in L_p(tau; l_1^n), cap the
    exact intersection norm at (p, 1), ratio_low = lhs.lower / cap
    (expected >= 1 up to tolerance) and ratio_high = lhs.upper / (p * cap).
    """
    p = as_exponent(p)
    lam = lambda_p1(fam)
    lhs = norm_l1_valued(lam, p, opts)
    base = VectorElement(fam.matrices, matcore.normalized(fam.block_dim))
    cap = jk_norm(base, JKNormSpec(p, 1, fam.block_dim, fam.count, "intersection")).upper
    ratio_low = lhs.lower / cap if cap > 0 else 1.0
    ratio_high = lhs.upper / (float(p) * cap) if cap > 0 else 0.0
    return lhs, cap, ratio_low, ratio_high


def theorem_main_dual_result(fam: IndependentFamily, pprime, opts: SolverOptions | None = None):
    """Dual sandwich: the l_inf-valued norm against the sum (K) norm.

    Returns (lhs, ksum, ratio_upper, implied_c): ratio_upper =
    lhs.lower / ksum.upper should not exceed 1 (up to bracket noise) and
    implied_c = ksum.upper / (p * lhs.lower) records the observed constant
    of the lower sandwich, p conjugate to p'.
    """
    pprime = as_exponent(pprime)
    p = conjugate(pprime)
    lam = lambda_p1(fam)
    lhs = norm_linf_valued(lam, pprime, opts)
    base = VectorElement(fam.matrices, matcore.normalized(fam.block_dim))
    ksum = jk_norm(base, JKNormSpec(pprime, INF, fam.block_dim, fam.count, "sum"), opts)
    ratio_upper = lhs.lower / ksum.upper if ksum.upper > 0 else 0.0
    implied_c = ksum.upper / (float(p) * lhs.lower) if lhs.lower > 0 else math.inf
    return lhs, ksum, ratio_upper, implied_c


def rosenthal_nc_check(fam: IndependentFamily, p):
    """Rosenthal-type bound for sums of positive independent summands.

    lhs = || sum_k pi_k(a^k) ||_(L_p(tau)) on M_(m * l^n); rhs is the max
    of the conditional-expectation term || (1/l) sum_{k,i} a^k_ii ||_(L_p(tau_m))
    and the l_p sum of the individual norms.  Returns (lhs, rhs, lhs/(p*rhs)).
    """
    p = as_exponent(p)
    if p == INF:
        raise ValueError("the bound is stated for p < inf")
    m, l, n = fam.ambient, fam.block_dim, fam.count
    mats = []
    scale = max(float(np.max(np.abs(fam.matrices))), 1e-300)
    for a in fam.matrices:
        w = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
        if w.min() < -1e-12 * max(scale, float(w.max(initial=0.0))):
            raise ValueError("summands must be positive semidefinite")
        ww, vv = np.linalg.eigh(0.5 * (a + a.conj().T))
        mats.append((vv * np.maximum(ww, 0.0)) @ vv.conj().T)
    total = sum(
        ambient_slot_embed(mats[k], m, TensorSlot(n, l, k + 1)) for k in range(n))
    lhs = lp_trace_norm(total, p, matcore.normalized(fam.total_dim))
    cond = sum(partial_trace(a, [m, l], keep=[0]) for a in mats) / l
    term1 = lp_trace_norm(cond, p, matcore.normalized(m))
    term2 = float(np.sum([
        lp_trace_norm(a, p, matcore.normalized(m * l)) ** float(p) for a in mats])
        ** (1.0 / float(p)))
    rhs = max(term1, term2)
    ratio_over_p = lhs / (float(p) * rhs) if rhs > 0 else 0.0
    return lhs, rhs, ratio_over_p


# ---------------------------------------------------------------------------
# distortion survey
# ---------------------------------------------------------------------------

@dataclass
class DistortionReport:
    header: str
    p: float
    q: float
    n: int
    m: int
    sample_count: int
    min_ratio: float
    max_ratio: float
    adversarial_min: float
    adversarial_max: float
    rows: list = field(default_factory=list)

    def passes_lower_bound(self, tol: float = 1e-3) -> bool:
        return min(self.min_ratio, self.adversarial_min) >= 1.0 - tol


def random_survey_input(n, rng) -> np.ndarray:
    """Sample mix: 1/2 Ginibre, 1/4 self-adjoint, 1/4 PSD."""
    u = rng.random()
    if u < 0.5:
        return matcore.ginibre(n, n, rng)
    if u < 0.75:
        return matcore.gue(n, rng)
    return matcore.wishart(n, rng)


def _ratio_bracket(x, spec: EmbeddingSpec, q, opts):
    denom = schatten_norm(x, q)
    if denom == 0:
        return None
    cv = phi_norm(phi(x, spec), spec.p, q, opts)
    return cv.lower / denom, cv.upper / denom


def distortion_survey(spec: EmbeddingSpec, samples: int = 200, adversarial_steps: int = 40,
                      seed=0, opts: SolverOptions | None = None) -> DistortionReport:
    """Measured ratios ||phi(x)|| / ||x||_q over random and adversarial inputs.

    Ratios are recorded as (lower, upper) brackets; the minimum uses lower
    endpoints so the inverse-contraction verdict is certified.  The
    adversarial stage runs greedy coordinate perturbations from the
    extremal samples in both directions.
    """
    q = as_exponent(spec.q)
    p = as_exponent(spec.p)
    if not (q == p or float(q) == 1.0):
        raise ValueError("survey supports q = p or q = 1")
    rng = matcore.as_generator(seed)
    rows = []
    lo_best, hi_best = math.inf, 0.0
    x_lo = x_hi = None
    for i in range(samples):
        x = random_survey_input(spec.n, rng)
        br = _ratio_bracket(x, spec, q, opts)
        if br is None:
            continue
        lo, hi = br
        rows.append({"index": i, "x_norm": schatten_norm(x, q),
                     "phi_lower": lo * schatten_norm(x, q),
                     "ratio_low": lo, "ratio_high": hi})
        if lo < lo_best:
            lo_best, x_lo = lo, x
        if hi > hi_best:
            hi_best, x_hi = hi, x

    def adversarial(x0, maximize):
        best_x = x0.copy()
        br = _ratio_bracket(best_x, spec, q, opts)
        best = br[1] if maximize else br[0]
        step = 0.25 * float(np.max(np.abs(best_x)))
        evals = 0
        while evals < adversarial_steps and step > 1e-6:
            improved = False
            for i in range(spec.n):
                for j in range(spec.n):
                    for d in (step, -step, 1j * step, -1j * step):
                        if evals >= adversarial_steps:
                            break
                        cand = best_x.copy()
                        cand[i, j] += d
                        br = _ratio_bracket(cand, spec, q, opts)
                        evals += 1
                        if br is None:
                            continue
                        val = br[1] if maximize else br[0]
                        if (val > best) if maximize else (val < best):
                            best, best_x, improved = val, cand, True
            if not improved:
                step *= 0.5
        return best

    adv_max = adversarial(x_hi, True) if (adversarial_steps and x_hi is not None) else hi_best
    adv_min = adversarial(x_lo, False) if (adversarial_steps and x_lo is not None) else lo_best
    header = f"{LEVEL_NOTE}; ratios ||phi(x)||/||x||_q at n={spec.n}, m={spec.m}"
    return DistortionReport(header, float(p), float(q) if q != INF else math.inf,
                            spec.n, spec.m, len(rows), lo_best, hi_best,
                            adv_min, adv_max, rows)


# ---------------------------------------------------------------------------
# minimal operator space structure comparison
# ---------------------------------------------------------------------------

def min_structure_estimate_selfadjoint(x, spec: EmbeddingSpec, q) -> float:
    """Exact minimal-structure norm of phi(x) for self-adjoint x.

    After joint diagonalization the element is commutative, where the
    minimal and the plain vector-valued norms agree; the value is the
    commutative mixed norm over the n^m joint eigenvalue tuples with
    uniform weights and the n^(-1/q) prefactor.
    """
    q = as_exponent(q)
    lam = np.linalg.eigvalsh(0.5 * (x + x.conj().T))
    n, m = spec.n, spec.m
    pref = float(n) ** (-1.0 / float(q)) if q != INF else 1.0
    idx = np.array(list(itertools.product(range(n), repeat=m)))  # (n^m, m)
    table = pref * np.abs(lam)[idx.T]  # (m, n^m)
    weights = np.full(idx.shape[0], 1.0 / idx.shape[0])
    return commutative_mixed_norm(table, weights, spec.p, q)


def min_structure_check(x, spec: EmbeddingSpec, q):
    """Compare ||x||_(S_q) against the minimal-structure norm of phi(x).

    Self-adjoint inputs use the exact commutative evaluation; general
    inputs bound the estimate from below through the self-adjoint parts
    (x + x*)/2 and (x - x*)/2i.  Returns (snorm, estimate, factor) with
    factor = snorm / estimate, expected <= 1 for self-adjoint x and <= 2
    in general.
    """
    a = require_square(x)
    q = as_exponent(q)
    snorm = schatten_norm(a, q)
    scale = max(float(np.max(np.abs(a))), 1e-300)
    if float(np.max(np.abs(a - a.conj().T))) <= 1e-12 * scale:
        est = min_structure_estimate_selfadjoint(a, spec, q)
    else:
        re = 0.5 * (a + a.conj().T)
        im = (a - a.conj().T) / 2j
        est = max(min_structure_estimate_selfadjoint(re, spec, q),
                  min_structure_estimate_selfadjoint(im, spec, q))
    factor = snorm / est if est > 0 else 0.0
    return snorm, est, factor
