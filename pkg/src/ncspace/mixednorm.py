"""Factorization-defined mixed norms with certified two-sided brackets.

Covers the sup-type vector-valued norm L_p(tr; l_inf^n), its predual
L_p(tr; l_1^n), the asymmetric two-exponent scalar norm, the intersection
(J) and sum (K) functional norms over the four exponent pairs {2p, 2q}^2,
and the commutative mixed norm used as an oracle on diagonal families.

Each optimizer-backed value is a CertifiedValue: a [lower, upper] bracket
where the upper endpoint is witnessed by an explicit feasible
factorization and the lower endpoint by an explicit element of the dual
unit ball.  Conventions: the two-sided factorization of x_k through
positive (A, B) is encoded by the block constraint [[A, x_k], [x_k*, B]]
>= 0, and the complex pairing is tr(a^t b) (transpose, not adjoint).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import matcore
from .exponents import INF, as_exponent, as_float, conjugate, holder_gamma
from .matcore import TraceWeight, lp_trace_norm, require_square, schatten_norm
from .solver import (
    PairDualCertificate,
    PairNormResult,
    PairPrimalCertificate,
    SolverOptions,
    SumNormResult,
    SumTerm,
    pair_norm,
    spectral_norms,
    sum_decomposition_norm,
)

CONVERGED = "converged"
GAP_NOT_CLOSED = "gap_not_closed"


# ---------------------------------------------------------------------------
# elements and descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VectorElement:
    """n square matrix components of common dimension plus a trace weight."""

    components: np.ndarray
    weight: TraceWeight

    def __post_init__(self):
        comps = np.ascontiguousarray(np.asarray(self.components, dtype=np.complex128))
        if comps.ndim == 2:
            comps = comps[None]
        if comps.ndim != 3 or comps.shape[1] != comps.shape[2]:
            raise ValueError(f"components must be a stack of square matrices, got {comps.shape}")
        if not np.all(np.isfinite(comps.view(np.float64))):
            raise ValueError("components must be finite")
        if comps.shape[1] != self.weight.dim:
            raise ValueError(f"component dim {comps.shape[1]} != weight dim {self.weight.dim}")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.components.shape[1]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.components)

    def adjoint(self) -> "VectorElement":
        return VectorElement(self.components.conj().transpose(0, 2, 1), self.weight)

    def conjugated(self, u) -> "VectorElement":
        """Two-sided unitary conjugation u* x_k u of every component."""
        u = require_square(u)
        return VectorElement(
            np.einsum("ij,kjl,lm->kim", u.conj().T, self.components, u), self.weight)


def vector_element(components, kind="tr") -> VectorElement:
    comps = np.asarray(components, dtype=np.complex128)
    if comps.ndim == 2:
        comps = comps[None]
    return VectorElement(comps, TraceWeight(kind, comps.shape[1]))


@dataclass(frozen=True)
class SpaceDescriptor:
    """Names a normed space: schatten(p) / vector(p, q, n) / asymmetric(r, s)."""

    family: str
    p: object = None
    q: object = None
    r: object = None
    s: object = None
    n: int = 0
    kind: str = "tr"
    min_structure: bool = False

    def __post_init__(self):
        if self.family == "schatten":
            as_exponent(self.p)
        elif self.family == "vector":
            as_exponent(self.p)
            as_exponent(self.q)
            if self.n < 1:
                raise ValueError("vector family needs a component count n >= 1")
        elif self.family == "asymmetric":
            as_exponent(self.r, lower=2.0)
            as_exponent(self.s, lower=2.0)
        else:
            raise ValueError(f"unknown family {self.family!r}")
        if self.min_structure and self.family != "vector":
            raise ValueError("min_structure flag applies to the vector family only")

    @property
    def gamma(self):
        if self.family != "asymmetric":
            raise ValueError("gamma is defined for the asymmetric family")
        return holder_gamma(self.r, self.s)


@dataclass(frozen=True)
class JKNormSpec:
    """Exponent data for the intersection (J) / sum (K) functional norms."""

    p: object
    q: object
    block_dim: int
    count: int
    mode: str  # "intersection" | "sum"

    def __post_init__(self):
        as_exponent(self.p)
        as_exponent(self.q)
        if self.mode not in ("intersection", "sum"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.block_dim < 1 or self.count < 1:
            raise ValueError("block_dim and count must be positive")

    def exponent_pairs(self):
        """The four (r, s) pairs in {2p, 2q}^2 with their gamma values."""
        twop = _double(self.p)
        twoq = _double(self.q)
        out = []
        for r in (twop, twoq):
            for s in (twop, twoq):
                out.append((r, s, holder_gamma(r, s)))
        return out

    @property
    def lambda_p(self) -> float:
        return float(self.block_dim) ** (-float(as_float(1.0)) / float(self.p)) \
            if self.p != INF else 1.0

    def dual(self) -> "JKNormSpec":
        mode = "sum" if self.mode == "intersection" else "intersection"
        return JKNormSpec(conjugate(self.p), conjugate(self.q), self.block_dim, self.count, mode)


def _double(p):
    return INF if p == INF else 2 * as_exponent(p)


# ---------------------------------------------------------------------------
# certified values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualWitness:
    """Element of the dual unit ball (transpose pairing, result convention)."""

    element: VectorElement
    pairing: float


@dataclass(frozen=True)
class CertifiedValue:
    lower: float
    upper: float
    iterations: int
    status: str
    primal_certificate: Optional[PairPrimalCertificate] = None
    dual_certificate: Optional[DualWitness] = None
    solver_result: object = None

    @property
    def rel_gap(self) -> float:
        return (self.upper - self.lower) / max(self.upper, 1e-300)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def _exact_value(v: float, iterations: int = 0) -> CertifiedValue:
    return CertifiedValue(v, v, iterations, CONVERGED)


def pairing(x: VectorElement, z: VectorElement) -> complex:
    """sum_k tr-weighted tr(x_k^t z_k), using x's trace weight."""
    if x.components.shape != z.components.shape:
        raise ValueError("shape mismatch in pairing")
    val = np.einsum("kij,kij->", x.components, z.components)
    return complex(val / x.dim) if x.weight.normalized else complex(val)


def _wrap_pair(res: PairNormResult, x: VectorElement, p_value, dual_p) -> CertifiedValue:
    """Package a solver result, rescaling values into x's trace convention.

    The solver works in the unnormalized trace; a normalized weight on M_m
    rescales the value by m^(-1/p) and the dual witness by m^(1/p'), which
    keeps pairing = lower and the witness inside the weighted dual ball.
    """
    m = x.dim
    vscale = x.weight.norm_scale(p_value)
    wscale = 1.0
    if x.weight.normalized:
        wscale = float(m) ** (1.0 / float(dual_p)) if dual_p != INF else 1.0
    dual = None
    if res.dual is not None:
        elem = VectorElement(wscale * res.dual.witness.conj(), x.weight)
        dual = DualWitness(elem, vscale * res.lower)
    status = CONVERGED if res.converged else GAP_NOT_CLOSED
    return CertifiedValue(
        vscale * res.lower, vscale * res.upper, res.iterations, status,
        res.primal, dual, res)


# ---------------------------------------------------------------------------
# the norm operations
# ---------------------------------------------------------------------------

def norm_linf_valued(x: VectorElement, p, opts: SolverOptions | None = None) -> CertifiedValue:
    """Certified bracket for || sum_k delta_k (x) x_k || in L_p(weight; l_inf^n).

    The norm is inf ||A||_p^(1/2) ||B||_p^(1/2) over positive (A, B) with
    [[A, x_k], [x_k*, B]] >= 0 for every k; the lower bound pairs a dual
    element of the L_p'(l_1^n) unit ball against x.
    """
    p = as_exponent(p)
    if x.is_zero:
        return _exact_value(0.0)
    res = pair_norm(x.components, p, p, shared=True, opts=opts)
    return _wrap_pair(res, x, p, conjugate(p))


def norm_l1_valued(x: VectorElement, p, opts: SolverOptions | None = None) -> CertifiedValue:
    """Certified bracket for || sum_k delta_k (x) x_k || in L_p(weight; l_1^n).

    Computed as the summed-pair factorization program; by duality its value
    is the supremum of Re sum_k <x_k, z_k> over z in the L_p'(l_inf^n)
    unit ball, which supplies the dual witness.
    """
    p = as_exponent(p)
    if p == INF:
        raise ValueError("l_1-valued norm requires p < inf")
    if x.is_zero:
        return _exact_value(0.0)
    res = pair_norm(x.components, p, p, shared=False, opts=opts)
    return _wrap_pair(res, x, p, conjugate(p))


def norm_asym_scalar(x, r, s, weight: TraceWeight | None = None,
                     opts: SolverOptions | None = None) -> CertifiedValue:
    """Certified bracket for the asymmetric (r, s) norm of a single matrix.

    Defined by inf ||A||_{r/2}^(1/2) ||B||_{s/2}^(1/2) over the block-PSD
    factorization constraint; at scalar coefficients the value coincides
    with the Schatten gamma norm, 1/gamma = 1/r + 1/s, which callers can
    use as an independent cross-check of the bracket.
    """
    r = as_exponent(r, lower=2.0)
    s = as_exponent(s, lower=2.0)
    a = require_square(x)
    weight = weight or matcore.unnormalized(a.shape[0])
    if a.shape[0] != weight.dim:
        raise ValueError("weight dimension mismatch")
    gamma = holder_gamma(r, s)
    if not np.any(a):
        return _exact_value(0.0)
    half = lambda e: INF if e == INF else as_exponent(e) / 2
    res = pair_norm(a[None], half(r), half(s), shared=True, opts=opts)
    xe = VectorElement(a[None], weight)
    return _wrap_pair(res, xe, gamma, conjugate(gamma))


def asym_closed_form(x, r, s, weight: TraceWeight | None = None) -> float:
    """Schatten gamma-norm closed form of the asymmetric (r, s) norm."""
    a = require_square(x)
    weight = weight or matcore.unnormalized(a.shape[0])
    return lp_trace_norm(a, holder_gamma(as_exponent(r, 2.0), as_exponent(s, 2.0)), weight)


def _ell_gamma_of_blocks(blocks: np.ndarray, gamma) -> float:
    sv = np.linalg.svd(blocks, compute_uv=False).ravel()
    if gamma == INF:
        return float(sv.max(initial=0.0))
    gf = float(gamma)
    top = float(sv.max(initial=0.0))
    if top == 0.0:
        return 0.0
    return top * float(np.sum((sv / top) ** gf)) ** (1.0 / gf)


def jk_term_value(x: VectorElement, r, s) -> float:
    """One intersection constituent: l_gamma over k of the (r,s) norms at tau_l."""
    gamma = holder_gamma(r, s)
    scale = float(x.dim) ** (-1.0 / float(gamma)) if gamma != INF else 1.0
    return scale * _ell_gamma_of_blocks(x.components, gamma)


def jk_norm(x: VectorElement, spec: JKNormSpec, opts: SolverOptions | None = None) -> CertifiedValue:
    """Intersection (max-of-four, exact) or sum (certified bracket) norm.

    Inner asymmetric norms are taken with the normalized trace on the
    l x l blocks, i.e. each (r, s) constituent carries the scale
    l^(-1/gamma_rs).  The sum mode solves the infimal convolution over
    decompositions x = sum x_rs and certifies the lower bound by duality
    against the intersection norm of the conjugate-exponent spec.
    """
    if x.dim != spec.block_dim or x.n != spec.count:
        raise ValueError("element shape does not match the JK spec")
    pairs = spec.exponent_pairs()
    if spec.mode == "intersection":
        val = max(jk_term_value(x, r, s) for r, s, _ in pairs)
        return _exact_value(val)
    if x.is_zero:
        return _exact_value(0.0)
    terms = []
    for _, _, gamma in pairs:
        coeff = float(x.dim) ** (-1.0 / float(gamma)) if gamma != INF else 1.0
        terms.append(SumTerm(coeff, gamma))
    res = sum_decomposition_norm(x.components, terms, opts)
    status = CONVERGED if res.converged else GAP_NOT_CLOSED
    witness = None
    if res.multiplier is not None:
        # multiplier is in the unnormalized pairing; report it in x's convention
        elem = VectorElement(res.multiplier.conj() * x.dim, matcore.normalized(x.dim))
        witness = DualWitness(elem, res.lower)
    return CertifiedValue(res.lower, res.upper, res.iterations, status, None, witness, res)


def commutative_mixed_norm(values, weights, p, q) -> float:
    """(sum_j w_j (sum_k |v_kj|^q)^(p/q))^(1/p) with the usual inf conventions."""
    v = np.abs(np.asarray(values, dtype=float))
    if v.ndim == 1:
        v = v[None]
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must sum to 1")
    p = as_exponent(p)
    q = as_exponent(q)
    inner = v.max(axis=0) if q == INF else np.sum(v ** float(q), axis=0) ** (1.0 / float(q))
    if p == INF:
        support = w > 0
        return float(inner[support].max(initial=0.0))
    return float(np.sum(w * inner ** float(p)) ** (1.0 / float(p)))


def holder_extremal_vector(coeffs, q) -> np.ndarray:
    """xi with ||xi||_q' = 1 maximizing |sum_k xi_k c_k| (= ||c||_q)."""
    c = np.asarray(coeffs, dtype=np.complex128)
    q = as_exponent(q)
    a = np.abs(c)
    phase = np.where(a > 0, c.conj() / np.where(a > 0, a, 1.0), 1.0)
    if q == INF:
        xi = np.zeros_like(c)
        j = int(np.argmax(a))
        xi[j] = phase[j]
        return xi
    qf = float(q)
    if not np.any(a):
        xi = np.zeros_like(c)
        xi[0] = 1.0
        return xi
    mag = a ** (qf - 1.0)
    xi = phase * mag
    qc = conjugate(q)
    nrm = float(np.max(np.abs(xi))) if qc == INF else float(np.sum(np.abs(xi) ** float(qc)) ** (1 / float(qc)))
    return xi / nrm


def min_structure_diagnostic(y: VectorElement, q, restarts: int = 16, seed=0) -> float:
    """Heuristic lower bound for the minimal-structure matrix norm.

    Evaluates sup over the l_q' unit ball of ||sum_k xi_k y_k||_op by
    multistart projected ascent seeded with coordinate vectors, Hoelder
    extremizers of the entry columns, and random directions.  The returned
    value is the exact objective of the best candidate found, hence always
    a valid lower bound.
    """
    q = as_exponent(q)
    qc = conjugate(q)
    rng = matcore.as_generator(seed)
    n = y.n
    comps = y.components

    def objective(xi):
        return float(spectral_norms((xi[:, None, None] * comps).sum(axis=0)[None])[0])

    def renorm(xi):
        if qc == INF:
            m = float(np.max(np.abs(xi)))
        else:
            m = float(np.sum(np.abs(xi) ** float(qc)) ** (1.0 / float(qc)))
        return xi if m == 0 else xi / m

    cands = [np.eye(n, dtype=np.complex128)[k] for k in range(n)]
    for i in range(y.dim):
        for j in range(y.dim):
            col = comps[:, i, j]
            if np.any(np.abs(col) > 0):
                cands.append(holder_extremal_vector(col, q))
    for _ in range(restarts):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        cands.append(renorm(v))

    best = 0.0
    for xi in cands:
        xi = renorm(np.asarray(xi, dtype=np.complex128))
        val = objective(xi)
        step = 0.5
        for _ in range(60):
            m = (xi[:, None, None] * comps).sum(axis=0)
            u, sv, vh = np.linalg.svd(m)
            grad = np.array([np.vdot(u[:, 0], yk @ vh[0].conj()) for yk in comps])
            cand = renorm(xi + step * grad.conj())
            cval = objective(cand)
            if cval > val + 1e-14:
                xi, val = cand, cval
            else:
                step *= 0.5
                if step < 1e-8:
                    break
        best = max(best, val)
    return best


def lemma_d_check(xs, opts: SolverOptions | None = None):
    """Diagonal-of-diagonals extraction against the source norm.

    Input: n matrices X^k of size n x n, the k-th entries of an element of
    S_1^n(l_inf^n).  Returns (lhs, rhs) with lhs = sum_k |X^k[k, k]| (the
    l_1 norm of the extracted vector) and rhs = the upper endpoint of the
    source-norm bracket at p = 1, unnormalized trace.
    """
    stack = np.asarray(xs, dtype=np.complex128)
    if stack.ndim != 3 or stack.shape[0] != stack.shape[1] or stack.shape[1] != stack.shape[2]:
        raise ValueError("expected n matrices of size n x n")
    n = stack.shape[0]
    lhs = float(sum(abs(stack[k, k, k]) for k in range(n)))
    elem = VectorElement(stack, matcore.unnormalized(n))
    rhs = norm_linf_valued(elem, 1, opts).upper
    return lhs, rhs


def vector_valued_norm(x: VectorElement, p, q, opts: SolverOptions | None = None) -> CertifiedValue:
    """L_p(weight; l_q^n) norm dispatch.

    q = inf and q = 1 are certified solver brackets; q = p is the exact
    block formula; any other q returns an interpolation bracket (upper by
    log-convexity in 1/q between the q = 1 and q = inf values, lower from
    the q = inf bracket by monotonicity) with status gap_not_closed.
    """
    p = as_exponent(p)
    q = as_exponent(q)
    if q == p or (q != INF and p != INF and abs(float(q) - float(p)) < 1e-15):
        norms = [lp_trace_norm(c, p, x.weight) for c in x.components]
        if p == INF:
            val = max(norms)
        else:
            val = float(np.sum(np.asarray(norms) ** float(p)) ** (1.0 / float(p)))
        return _exact_value(val)
    if q == INF:
        return norm_linf_valued(x, p, opts)
    if float(q) == 1.0:
        return norm_l1_valued(x, p, opts)
    diag = np.stack([np.diagonal(c) for c in x.components])
    if not np.any(x.components - np.stack([np.diag(d) for d in diag])):
        # already-diagonal family: the norm is the commutative mixed norm
        m = x.dim
        val = commutative_mixed_norm(np.abs(diag), np.full(m, 1.0 / m), p, q)
        if not x.weight.normalized and p != INF:
            val *= float(m) ** (1.0 / float(p))
        return _exact_value(val)
    r_inf = norm_linf_valued(x, p, opts)
    r_one = norm_l1_valued(x, p, opts)
    theta = 1.0 / float(q)
    upper = (r_one.upper ** theta) * (r_inf.upper ** (1.0 - theta))
    lower = r_inf.lower
    its = r_inf.iterations + r_one.iterations
    return CertifiedValue(min(lower, upper), upper, its, GAP_NOT_CLOSED, None, None)


# ---------------------------------------------------------------------------
# certificate re-verification (used by the test suite and report audits)
# ---------------------------------------------------------------------------

def recheck_pair_certificates(x: VectorElement, cv: CertifiedValue, p_left, p_right) -> dict:
    """Re-substitute both certificates of a pair-norm CertifiedValue.

    Returns residuals: how well the primal factorization reproduces x and
    meets its claimed objective, and the PSD margin / ball norm / pairing
    of the dual witness.  All quantities are in the unnormalized-trace
    convention of the stored solver certificates.
    """
    out = {}
    res: PairNormResult = cv.solver_result
    xs = x.components
    n, m, _ = xs.shape
    prim = res.primal
    if prim is not None:
        if prim.shared:
            A, B = prim.left, prim.right
            ra = _sqrt_psd(A)
            rb = _sqrt_psd(B)
            rec = np.einsum("ij,kjl,lm->kim", ra, prim.middles, rb)
            obj = math.sqrt(schatten_norm(A, p_left) * schatten_norm(B, p_right))
        else:
            rec = np.stack([
                _sqrt_psd(prim.left[k]) @ prim.middles[k] @ _sqrt_psd(prim.right[k])
                for k in range(n)])
            obj = math.sqrt(schatten_norm(prim.left.sum(axis=0), p_left)
                            * schatten_norm(prim.right.sum(axis=0), p_right))
        scale = max(float(np.max(spectral_norms(xs))), 1e-300)
        out["primal_reconstruction"] = float(np.max(np.abs(rec - xs))) / scale
        out["primal_objective"] = obj
        out["middle_contraction"] = float(np.max(spectral_norms(prim.middles)))
    dual = res.dual
    if dual is not None:
        z = dual.witness
        if dual.per_constraint:
            blocks = _assemble(dual.left, z, dual.right)
            ball = math.sqrt(schatten_norm(dual.left.sum(axis=0), conjugate(p_left))
                             * schatten_norm(dual.right.sum(axis=0), conjugate(p_right)))
        else:
            blocks = _assemble(np.broadcast_to(dual.left, z.shape), z,
                               np.broadcast_to(dual.right, z.shape))
            ball = math.sqrt(schatten_norm(dual.left, conjugate(p_left))
                             * schatten_norm(dual.right, conjugate(p_right)))
        eigs = np.linalg.eigvalsh(blocks)
        out["dual_psd_margin"] = float(eigs.min())
        out["dual_ball_norm"] = ball
        out["dual_pairing"] = float(np.real(np.einsum("kij,kij->", z.conj(), xs)))
    return out


def _sqrt_psd(m):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.conj().T


def _assemble(a, xs, b):
    n, m, _ = xs.shape
    out = np.zeros((n, 2 * m, 2 * m), dtype=np.complex128)
    out[:, :m, :m] = a
    out[:, m:, m:] = b
    out[:, :m, m:] = xs
    out[:, m:, :m] = xs.conj().transpose(0, 2, 1)
    return out


# ---------------------------------------------------------------------------
# NCVEC serialization
# ---------------------------------------------------------------------------

def dump_ncvec(x: VectorElement, fh):
    fh.write(f"NCVEC 1 {x.n} {x.dim} {x.weight.kind}\n")
    for comp in x.components:
        matcore.dump_ncmat(comp, fh)


def load_ncvec(fh) -> VectorElement:
    header = fh.readline().split()
    if len(header) != 5 or header[:2] != ["NCVEC", "1"]:
        raise ValueError(f"bad NCVEC header: {header}")
    n, m, kind = int(header[2]), int(header[3]), header[4]
    comps = np.stack([matcore.load_ncmat(fh) for _ in range(n)])
    if comps.shape != (n, m, m):
        raise ValueError("NCVEC block shapes disagree with the manifest")
    return VectorElement(comps, TraceWeight(kind, m))


def save_ncvec(path, x: VectorElement):
    with open(path, "w", encoding="ascii") as fh:
        dump_ncvec(x, fh)


def read_ncvec(path) -> VectorElement:
    with open(path, "r", encoding="ascii") as fh:
        return load_ncvec(fh)
