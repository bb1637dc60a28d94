"""Certified first-order solver for factorization-norm programs.

Every norm in this toolkit reduces to one of two convex templates over
Hermitian matrix variables coupled by 2x2 block PSD constraints

    shared pair:    min (||A||_pL + ||B||_pR) / 2
                    s.t. [[A, x_k], [x_k*, B]] >= 0        (k = 1..n)

    summed pair:    min (||sum_k P_k||_pL + ||sum_k R_k||_pR) / 2
                    s.t. [[P_k, x_k], [x_k*, R_k]] >= 0    (k = 1..n)

plus a sum-decomposition template used by the K-functional norm.  The
geometric-mean infimum of the underlying factorization norm coincides with
the arithmetic-mean optimum because the constraint set is invariant under
the scaling (A, B) -> (cA, B/c).

The solver is ADMM (a primal-dual operator splitting): the only nonsmooth
pieces are Schatten norms and PSD indicator functions, so every proximal
step is spectral -- an eigendecomposition followed by a scalar prox on the
spectrum.  Bounds are certified independently of the iteration:

* upper bounds come from an explicit feasibility repair of the primal
  iterate (inflate (A, B) until every middle factor is a contraction);
* lower bounds come from the PSD dual iterate, which by construction
  yields a feasible point of the dual ball, paired against the input.

The reported bracket is therefore valid even when the iteration is stopped
early; "converged" only asserts that the bracket is tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import INF, as_exponent, as_float, conjugate
from .matcore import schatten_norm


# ---------------------------------------------------------------------------
# scalar/vector proximal operators on spectra
# ---------------------------------------------------------------------------

def project_l1_ball(w: np.ndarray, radius: float = 1.0) -> np.ndarray:
    a = np.abs(w)
    if a.sum() <= radius:
        return w.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, a.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.sign(w) * np.maximum(a - theta, 0.0)


def _ball_inner_root(a: np.ndarray, c: float, q: float) -> np.ndarray:
    """Solve u + c*u^(q-1) = a componentwise for u in [0, a], a >= 0, c > 0."""
    if q == 2.0:
        return a / (1.0 + c)
    if q == 1.5:
        t = 0.5 * (-c + np.sqrt(c * c + 4.0 * a))
        return t * t
    if q == 3.0:
        return 2.0 * a / (1.0 + np.sqrt(1.0 + 4.0 * c * a))
    # generic monotone root: bisection then Newton polish on positive entries
    out = np.zeros_like(a)
    pos = a > 0
    if not np.any(pos):
        return out
    ap = a[pos]
    lo = np.zeros_like(ap)
    hi = ap.copy()
    for _ in range(42):
        mid = 0.5 * (lo + hi)
        too_big = mid + c * mid ** (q - 1.0) > ap
        hi = np.where(too_big, mid, hi)
        lo = np.where(too_big, lo, mid)
    u = np.maximum(0.5 * (lo + hi), 1e-30 * ap)
    for _ in range(3):
        g = u + c * u ** (q - 1.0) - ap
        dg = 1.0 + c * (q - 1.0) * u ** (q - 2.0)
        u = np.clip(u - g / dg, lo, hi)
    out[pos] = u
    return out


def project_lq_ball(w: np.ndarray, q, state: dict | None = None) -> np.ndarray:
    """Euclidean projection onto the unit l_q ball, q in [1, inf].

    ``state`` may carry a warm-started multiplier under key "mu"; it is
    updated in place, which makes repeated calls on slowly varying inputs
    (the inner loop of the solvers) cheap.
    """
    q = as_exponent(q)
    if q == INF:
        return np.clip(w, -1.0, 1.0)
    qf = float(q)
    if qf == 1.0:
        return project_l1_ball(w)
    a = np.abs(w)
    if qf == 2.0:
        nrm = math.sqrt(float(np.dot(a, a)))
        return w if nrm <= 1.0 else w / nrm
    total = float(np.sum(a ** qf))
    if total <= 1.0:
        return w.copy()

    def excess(mu):
        u = _ball_inner_root(a, mu * qf, qf)
        return float(np.sum(u ** qf)) - 1.0, u

    # bracket the multiplier, warm-started when possible
    mu0 = state.get("mu", 1.0) if state else 1.0
    lo, hi = 0.0, max(mu0, 1e-12)
    val, u = excess(hi)
    grow = 0
    while val > 0.0 and grow < 300:
        lo, hi = hi, hi * 8.0
        val, u = excess(hi)
        grow += 1
    mu = 0.5 * (lo + hi)
    for it in range(100):
        val, u = excess(mu)
        if abs(val) <= 1e-13:
            break
        if val > 0.0:
            lo = mu
        else:
            hi = mu
        # Newton step on the q-th power surplus, with bisection safeguard
        c = mu * qf
        up = u[u > 0]
        denom = 1.0 + c * (qf - 1.0) * up ** (qf - 2.0)
        dval = -float(np.sum(qf * qf * up ** (2.0 * qf - 2.0) / denom))
        mu_new = mu - val / dval if dval < 0 else mu
        if not (lo < mu_new < hi):
            mu_new = 0.5 * (lo + hi)
        if abs(mu_new - mu) <= 1e-16 * mu:
            mu = mu_new
            break
        mu = mu_new
    if state is not None:
        state["mu"] = mu
    u = _ball_inner_root(a, mu * qf, qf)
    return np.sign(w) * u


def prox_lp_norm(v: np.ndarray, lam: float, p, state: dict | None = None) -> np.ndarray:
    """prox of lam * ||.||_p on vectors, via Moreau when no closed form."""
    p = as_exponent(p)
    if lam <= 0:
        return v.copy()
    if p == 1:
        return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)
    if p == 2:
        nrm = float(np.linalg.norm(v))
        if nrm <= lam:
            return np.zeros_like(v)
        return v * (1.0 - lam / nrm)
    pc = conjugate(p)
    return v - lam * project_lq_ball(v / lam, pc, state)


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def prox_schatten(m: np.ndarray, lam: float, p, state: dict | None = None) -> np.ndarray:
    """Spectral prox of lam*||.||_p on a Hermitian matrix."""
    w, v = np.linalg.eigh(hermitize(m))
    return (v * prox_lp_norm(w, lam, p, state)) @ v.conj().T


def psd_project(stack: np.ndarray) -> np.ndarray:
    """Projection onto the PSD cone, batched over the leading axis."""
    w, v = np.linalg.eigh(stack)
    w = np.maximum(w, 0.0)
    return np.einsum("...ij,...j,...kj->...ik", v, w, v.conj())


def spectral_norms(stack: np.ndarray) -> np.ndarray:
    return np.linalg.svd(stack, compute_uv=False)[..., 0]


# ---------------------------------------------------------------------------
# options and result containers
# ---------------------------------------------------------------------------

@dataclass
class SolverOptions:
    tol: float = 1e-6
    max_iter: int = 50_000
    check_every: int = 25
    rho: float | None = None
    adapt_rho: bool = True
    balance_every: int = 100
    eig_floor: float = 1e-12


@dataclass
class PairPrimalCertificate:
    """Feasible factorization: x_k = left_k^(1/2) middle_k right_k^(1/2)."""

    shared: bool
    left: np.ndarray
    right: np.ndarray
    middles: np.ndarray
    residual: float = 0.0

    def left_total(self) -> np.ndarray:
        return self.left if self.shared else self.left.sum(axis=0)

    def right_total(self) -> np.ndarray:
        return self.right if self.shared else self.right.sum(axis=0)


@dataclass
class PairDualCertificate:
    """Dual-ball element: pairing/ball_norm is a certified lower bound.

    ``witness`` satisfies Re sum_k tr(witness_k* x_k) = pairing; the ball
    certificate is (lefts_k, rights_k) per constraint for the shared
    program and a common (left, right) for the summed program.
    """

    witness: np.ndarray
    left: np.ndarray
    right: np.ndarray
    per_constraint: bool
    pairing: float = 0.0
    ball_norm: float = 1.0


@dataclass
class PairNormResult:
    lower: float
    upper: float
    iterations: int
    converged: bool
    primal: PairPrimalCertificate | None = None
    dual: PairDualCertificate | None = None

    @property
    def rel_gap(self) -> float:
        return (self.upper - self.lower) / max(self.upper, 1e-300)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def _clip_psd(m: np.ndarray, floor: float):
    """Return (clipped PSD matrix, its inverse square root)."""
    w, v = np.linalg.eigh(hermitize(m))
    lo = max(floor, 1e-14 * max(float(w[-1]), floor))
    w = np.maximum(w, lo)
    mat = (v * w) @ v.conj().T
    inv_sqrt = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    return mat, inv_sqrt


def _block(stack_a: np.ndarray, xs: np.ndarray, stack_b: np.ndarray) -> np.ndarray:
    """Assemble [[A_k, x_k], [x_k*, B_k]] stacked over k."""
    n, m, _ = xs.shape
    out = np.zeros((n, 2 * m, 2 * m), dtype=np.complex128)
    out[:, :m, :m] = stack_a
    out[:, m:, m:] = stack_b
    out[:, :m, m:] = xs
    out[:, m:, :m] = xs.conj().transpose(0, 2, 1)
    return out


# ---------------------------------------------------------------------------
# the pair-factorization solver
# ---------------------------------------------------------------------------

def pair_norm(xs, p_left, p_right, shared: bool, opts: SolverOptions | None = None) -> PairNormResult:
    """Certified bracket for the pair-factorization norm of (x_1..x_n).

    ``shared=True`` computes the two-sided factorization with one (A, B)
    for all components (the sup/l_inf-type norm); ``shared=False`` uses a
    pair per component and norms the sums (the l_1-type norm).  For n = 1
    the two coincide.
    """
    opts = opts or SolverOptions()
    xs = np.ascontiguousarray(np.asarray(xs, dtype=np.complex128))
    if xs.ndim == 2:
        xs = xs[None]
    n, m, m2 = xs.shape
    if m != m2:
        raise ValueError("components must be square")
    if not np.all(np.isfinite(xs.view(np.float64))):
        raise ValueError("components must be finite")
    p_left = as_exponent(p_left)
    p_right = as_exponent(p_right)

    scale = float(np.max(spectral_norms(xs))) if xs.size else 0.0
    if scale == 0.0:
        zero = np.zeros((m, m), dtype=np.complex128)
        prim = PairPrimalCertificate(True, zero, zero, np.zeros_like(xs))
        dual = PairDualCertificate(np.zeros_like(xs), zero, zero, not shared)
        return PairNormResult(0.0, 0.0, 0, True, prim, dual)
    xn = xs / scale

    pl_c, pr_c = conjugate(p_left), conjugate(p_right)
    rho = opts.rho if opts.rho is not None else 1.0 / n
    eye = np.eye(m, dtype=np.complex128)

    # deterministic cold start from the Gram square root of the components
    gram = hermitize(sum(x @ x.conj().T for x in xn) + 1e-8 * eye)
    w0, v0 = np.linalg.eigh(gram)
    root = (v0 * np.sqrt(np.maximum(w0, 0.0))) @ v0.conj().T
    if shared:
        A = root.copy()
        B = root.copy()
        lift = _block(np.broadcast_to(A, xn.shape), xn, np.broadcast_to(B, xn.shape))
    else:
        P = np.stack([hermitize(_sqrtm_psd(x @ x.conj().T) + 1e-8 * eye) for x in xn])
        R = np.stack([hermitize(_sqrtm_psd(x.conj().T @ x) + 1e-8 * eye) for x in xn])
        lift = _block(P, xn, R)
    S = psd_project(lift)
    U = np.zeros_like(S)

    best_lower, best_upper = 0.0, math.inf
    best_primal, best_dual = None, None
    iters_done = 0

    def extract(A_cur, B_cur, U_cur, rho_cur):
        nonlocal best_lower, best_upper, best_primal, best_dual
        # primal repair
        if shared:
            prim, up = _repair_shared(A_cur, B_cur, xn, p_left, p_right, opts)
        else:
            prim, up = _repair_summed(A_cur, B_cur, xn, p_left, p_right, opts)
        if up < best_upper:
            best_upper, best_primal = up, prim
        # dual witness from the PSD part of the multiplier estimate
        W = psd_project(-rho_cur * U_cur)
        Pd = W[:, :m, :m]
        Rd = W[:, m:, m:]
        z = -2.0 * W[:, :m, m:]
        pairing = float(np.real(np.einsum("kij,kij->", z.conj(), xn)))
        if pairing > 0:
            if shared:
                nu_l = schatten_norm(2.0 * Pd.sum(axis=0), pl_c)
                nu_r = schatten_norm(2.0 * Rd.sum(axis=0), pr_c)
                nu = math.sqrt(nu_l * nu_r) if nu_l > 0 and nu_r > 0 else 0.0
                lo = pairing / nu if nu > 0 else 0.0
                if lo > best_lower:
                    best_lower = lo
                    best_dual = PairDualCertificate(
                        z / nu, 2.0 * Pd / nu, 2.0 * Rd / nu, True, pairing / nu, 1.0)
            else:
                Ah, inv_a = _clip_psd(2.0 * Pd.mean(axis=0), opts.eig_floor * _tr_scale(Pd))
                Bh, inv_b = _clip_psd(2.0 * Rd.mean(axis=0), opts.eig_floor * _tr_scale(Rd))
                ys = np.einsum("ij,kjl,lm->kim", inv_a, z, inv_b)
                lam = float(np.max(spectral_norms(ys))) if ys.size else 0.0
                if lam > 0:
                    nu = lam * math.sqrt(schatten_norm(Ah, pl_c) * schatten_norm(Bh, pr_c))
                    lo = pairing / nu if nu > 0 else 0.0
                    if lo > best_lower:
                        best_lower = lo
                        best_dual = PairDualCertificate(
                            z / nu, lam * Ah / nu, lam * Bh / nu, False, pairing / nu, 1.0)

    k_since_adapt = 0
    state_l, state_r = {}, {}
    for it in range(1, opts.max_iter + 1):
        iters_done = it
        T = S - U
        GA = T[:, :m, :m]
        GB = T[:, m:, m:]
        if shared:
            A = prox_schatten(GA.mean(axis=0), 1.0 / (2.0 * rho * n), p_left, state_l)
            B = prox_schatten(GB.mean(axis=0), 1.0 / (2.0 * rho * n), p_right, state_r)
            lift = _block(np.broadcast_to(A, xn.shape), xn, np.broadcast_to(B, xn.shape))
        else:
            GA = 0.5 * (GA + GA.conj().transpose(0, 2, 1))
            GB = 0.5 * (GB + GB.conj().transpose(0, 2, 1))
            ZP = prox_schatten(GA.sum(axis=0), n / (2.0 * rho), p_left, state_l)
            ZR = prox_schatten(GB.sum(axis=0), n / (2.0 * rho), p_right, state_r)
            P = GA + (ZP - GA.sum(axis=0)) / n
            R = GB + (ZR - GB.sum(axis=0)) / n
            lift = _block(P, xn, R)

        V = lift + U
        S_new = psd_project(V)
        prim_res = float(np.linalg.norm(lift - S_new))
        dual_res = rho * float(np.linalg.norm(S_new - S))
        S = S_new
        U = U + lift - S

        if opts.adapt_rho and k_since_adapt >= 10:
            k_since_adapt = 0
            if prim_res > 10.0 * dual_res:
                rho *= 2.0
                U *= 0.5
            elif dual_res > 10.0 * prim_res:
                rho *= 0.5
                U *= 2.0
        k_since_adapt += 1

        if it % opts.check_every == 0 or it == opts.max_iter:
            if shared:
                extract(A, B, U, rho)
            else:
                extract(P, R, U, rho)
            if best_upper - best_lower <= opts.tol * max(best_upper, 1e-300):
                break

        if opts.balance_every and it % opts.balance_every == 0:
            if shared:
                na, nb = schatten_norm(A, p_left), schatten_norm(B, p_right)
            else:
                na, nb = schatten_norm(P.sum(axis=0), p_left), schatten_norm(R.sum(axis=0), p_right)
            if na > 0 and nb > 0:
                c = math.sqrt(nb / na)
                c = min(max(c, 0.25), 4.0)
                if abs(c - 1.0) > 1e-3:
                    d = np.concatenate([np.full(m, math.sqrt(c)), np.full(m, 1.0 / math.sqrt(c))])
                    S *= np.outer(d, d)
                    U *= np.outer(d, d)
                    if shared:
                        A, B = c * A, B / c
                    else:
                        P, R = c * P, R / c

    converged = best_upper - best_lower <= opts.tol * max(best_upper, 1e-300)
    lower = min(best_lower, best_upper) * scale
    upper = best_upper * scale
    prim = best_primal
    if prim is not None:
        prim = PairPrimalCertificate(
            prim.shared, prim.left * scale, prim.right * scale, prim.middles, prim.residual)
    dual = best_dual  # dual ball does not scale with x
    return PairNormResult(lower, upper, iters_done, converged, prim, dual)


def _tr_scale(stack: np.ndarray) -> float:
    t = float(np.real(np.trace(stack.sum(axis=0)))) if stack.ndim == 3 else float(np.real(np.trace(stack)))
    return max(abs(t), 1e-30)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(m))
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.conj().T


def _repair_shared(A, B, xn, p_left, p_right, opts):
    floor = opts.eig_floor
    Ah, inv_a = _clip_psd(A, floor * _tr_scale(A))
    Bh, inv_b = _clip_psd(B, floor * _tr_scale(B))
    ys = np.einsum("ij,kjl,lm->kim", inv_a, xn, inv_b)
    lam = float(np.max(spectral_norms(ys)))
    Ah, Bh, ys = lam * Ah, lam * Bh, ys / lam
    na, nb = schatten_norm(Ah, p_left), schatten_norm(Bh, p_right)
    upper = math.sqrt(na * nb)
    c = math.sqrt(nb / na) if na > 0 else 1.0
    prim = PairPrimalCertificate(True, c * Ah, Bh / c, ys)
    return prim, upper


def _repair_summed(P, R, xn, p_left, p_right, opts):
    floor = opts.eig_floor
    n = xn.shape[0]
    Ps, Rs, ys = [], [], []
    for k in range(n):
        Pk, inv_p = _clip_psd(P[k], floor * _tr_scale(P[k]))
        Rk, inv_r = _clip_psd(R[k], floor * _tr_scale(R[k]))
        y = inv_p @ xn[k] @ inv_r
        lam = float(spectral_norms(y[None])[0])
        lam = max(lam, 1e-30)
        Ps.append(lam * Pk)
        Rs.append(lam * Rk)
        ys.append(y / lam)
    Ps, Rs, ys = np.stack(Ps), np.stack(Rs), np.stack(ys)
    na = schatten_norm(Ps.sum(axis=0), p_left)
    nb = schatten_norm(Rs.sum(axis=0), p_right)
    upper = math.sqrt(na * nb)
    c = math.sqrt(nb / na) if na > 0 else 1.0
    prim = PairPrimalCertificate(False, c * Ps, Rs / c, ys)
    return prim, upper


# ---------------------------------------------------------------------------
# sum-decomposition (K-functional) solver
# ---------------------------------------------------------------------------

@dataclass
class SumTerm:
    """One summand norm coeff * (sum over blocks of singular values^gamma)^(1/gamma)."""

    coeff: float
    gamma: object

    def value(self, blocks: np.ndarray) -> float:
        sv = np.linalg.svd(blocks, compute_uv=False).ravel()
        g = as_exponent(self.gamma)
        if g == INF:
            return self.coeff * float(sv.max(initial=0.0))
        gf = float(g)
        top = float(sv.max(initial=0.0))
        if top == 0.0:
            return 0.0
        return self.coeff * top * float(np.sum((sv / top) ** gf)) ** (1.0 / gf)

    def dual_ratio(self, blocks: np.ndarray) -> float:
        """Dual-ball gauge of a candidate multiplier: ||sv||_gamma' / coeff."""
        sv = np.linalg.svd(blocks, compute_uv=False).ravel()
        gc = conjugate(self.gamma)
        if gc == INF:
            val = float(sv.max(initial=0.0))
        else:
            gf = float(gc)
            top = float(sv.max(initial=0.0))
            val = 0.0 if top == 0.0 else top * float(np.sum((sv / top) ** gf)) ** (1.0 / gf)
        return val / self.coeff

    def prox(self, blocks: np.ndarray, step: float) -> np.ndarray:
        u, sv, vh = np.linalg.svd(blocks)
        flat = sv.ravel()
        if not hasattr(self, "_state"):
            object.__setattr__(self, "_state", {})
        newflat = prox_lp_norm(flat, step * self.coeff, self.gamma, self._state)
        return np.einsum("kij,kj,kjl->kil", u, newflat.reshape(sv.shape), vh)


@dataclass
class SumNormResult:
    lower: float
    upper: float
    iterations: int
    converged: bool
    parts: np.ndarray | None = None       # feasible decomposition, shape (J, n, l, l)
    multiplier: np.ndarray | None = None  # dual-ball certificate, shape (n, l, l)

    @property
    def rel_gap(self) -> float:
        return (self.upper - self.lower) / max(self.upper, 1e-300)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def sum_decomposition_norm(xs, terms: list[SumTerm], opts: SolverOptions | None = None) -> SumNormResult:
    """Infimal convolution of the term norms over decompositions sum_j X_j = x.

    Primal-dual (Chambolle-Pock) iteration; the upper bound re-distributes
    the consensus residual to restore exact feasibility, the lower bound
    rescales the running multiplier into the intersection of the dual
    balls and pairs it with x.
    """
    opts = opts or SolverOptions()
    xs = np.asarray(xs, dtype=np.complex128)
    if xs.ndim == 2:
        xs = xs[None]
    scale = float(np.max(spectral_norms(xs))) if xs.size else 0.0
    if scale == 0.0:
        J0 = len(terms)
        return SumNormResult(0.0, 0.0, 0, True, np.zeros((J0,) + xs.shape), np.zeros_like(xs))
    xn = xs / scale

    # identical summands contribute nothing to the infimal convolution
    uniq, fold = [], []
    for t in terms:
        key = (round(t.coeff, 15), as_float(as_exponent(t.gamma)))
        if key not in fold:
            fold.append(key)
            uniq.append(SumTerm(t.coeff, t.gamma))
    work = uniq
    J = len(work)

    vals0 = [t.value(xn) for t in work]
    j0 = int(np.argmin(vals0))
    if J == 1:
        z = work[0]
        mult = scale_free_dual(xn, z)
        lo = float(np.real(np.einsum("kij,kij->", mult.conj(), xn)))
        parts = _spread_parts(xn * scale, terms, [0])
        return SumNormResult(min(lo, vals0[0]) * scale, vals0[0] * scale, 0, True, parts, mult)

    X = np.zeros((J,) + xn.shape, dtype=np.complex128)
    X[j0] = xn
    Xbar = X.copy()
    Y = np.zeros_like(xn)
    tau = sigma = 0.95 / math.sqrt(J)

    best_upper = vals0[j0]
    best_parts = X.copy()
    best_lower = 0.0
    best_mult = None
    Y_avg = np.zeros_like(xn)
    iters_done = 0

    for it in range(1, opts.max_iter + 1):
        iters_done = it
        Y = Y + sigma * (Xbar.sum(axis=0) - xn)
        Y_avg += (Y - Y_avg) / it
        X_new = np.empty_like(X)
        for j, t in enumerate(work):
            X_new[j] = t.prox(X[j] - tau * Y, tau)
        Xbar = 2.0 * X_new - X
        X = X_new

        if it % opts.check_every == 0 or it == opts.max_iter:
            resid = X.sum(axis=0) - xn
            feas = X - resid / J
            up = sum(t.value(feas[j]) for j, t in enumerate(work))
            if up < best_upper:
                best_upper, best_parts = up, feas.copy()
            # the dual-feasible multiplier is -Y (and its running average)
            for cand in (-Y, -Y_avg):
                mu = max(t.dual_ratio(cand) for t in work)
                if mu > 0:
                    lo = float(np.real(np.einsum("kij,kij->", cand.conj(), xn))) / mu
                    if lo > best_lower:
                        best_lower = lo
                        best_mult = cand / mu
            if best_upper - best_lower <= opts.tol * max(best_upper, 1e-300):
                break

    converged = best_upper - best_lower <= opts.tol * max(best_upper, 1e-300)
    mult = best_mult if best_mult is not None else np.zeros_like(xn)
    parts = _expand_parts(best_parts * scale, terms, fold)
    return SumNormResult(
        min(best_lower, best_upper) * scale, best_upper * scale, iters_done, converged,
        parts, mult)


def scale_free_dual(xn: np.ndarray, term: SumTerm) -> np.ndarray:
    """Norming functional of a single summand: pairing equals term.value(xn)."""
    u, sv, vh = np.linalg.svd(xn)
    g = as_exponent(term.gamma)
    flat = sv.ravel()
    top = float(flat.max(initial=0.0))
    if top == 0.0:
        return np.zeros_like(xn)
    if g == INF:
        d = (flat >= top * (1.0 - 1e-12)).astype(float)
        d /= d.sum()
    else:
        gf = float(g)
        nrm = top * float(np.sum((flat / top) ** gf)) ** (1.0 / gf)
        d = (flat / nrm) ** (gf - 1.0)
    d = d.reshape(sv.shape) * term.coeff
    return np.einsum("kij,kj,kjl->kil", u, d, vh)


def _spread_parts(x: np.ndarray, terms, active_idx) -> np.ndarray:
    parts = np.zeros((len(terms),) + x.shape, dtype=np.complex128)
    parts[active_idx[0]] = x
    return parts


def _expand_parts(folded: np.ndarray, terms, fold_keys) -> np.ndarray:
    """Map deduplicated decomposition parts back to the caller's term list."""
    parts = np.zeros((len(terms),) + folded.shape[1:], dtype=np.complex128)
    used = set()
    for i, t in enumerate(terms):
        key = (round(t.coeff, 15), as_float(as_exponent(t.gamma)))
        j = fold_keys.index(key)
        if j not in used:
            parts[i] = folded[j]
            used.add(j)
    return parts
