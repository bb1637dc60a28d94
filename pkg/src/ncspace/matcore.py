"""Dense complex linear algebra shared by the whole toolkit.

Schatten norms via SVD, trace conventions (usual trace vs its
normalization), tensor-slot embeddings x -> 1 x ... x x ... x 1, and
seeded random matrix ensembles (Ginibre, Haar unitary, GUE-style
self-adjoint, Wishart-style PSD).  All matrices are plain numpy
complex128 arrays; every constructor guards the global dimension cap.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .exponents import INF, as_exponent

#: hard cap on the dimension of any constructed matrix
DIM_CAP = 4096

#: singular values below RANK_TOL * sigma_max are treated as exact zeros
RANK_TOL = 1e-13


class CapacityError(ValueError):
    """A construction would exceed the dimension cap."""


def as_cmat(x) -> np.ndarray:
    """Coerce to a finite 2-d complex128 array."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def require_square(x) -> np.ndarray:
    a = as_cmat(x)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def check_dim(d: int):
    if d > DIM_CAP:
        raise CapacityError(f"dimension {d} exceeds cap {DIM_CAP}")
    return d


# ---------------------------------------------------------------------------
# trace conventions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceWeight:
    """Trace convention on M_dim: 'tr' (identity -> dim) or 'tau' (identity -> 1)."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("tr", "tau"):
            raise ValueError(f"unknown trace kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @property
    def normalized(self) -> bool:
        return self.kind == "tau"

    def trace(self, x) -> complex:
        t = np.trace(require_square(x))
        return t / self.dim if self.normalized else t

    def norm_scale(self, p) -> float:
        """Factor relating the weighted L_p norm to the Schatten norm."""
        if not self.normalized or p == INF:
            return 1.0
        return float(self.dim) ** (-1.0 / float(p))


def unnormalized(dim: int) -> TraceWeight:
    return TraceWeight("tr", dim)


def normalized(dim: int) -> TraceWeight:
    return TraceWeight("tau", dim)


# ---------------------------------------------------------------------------
# Schatten norms
# ---------------------------------------------------------------------------

def singular_values(x) -> np.ndarray:
    """Descending singular values, with values below RANK_TOL*max zeroed."""
    s = np.linalg.svd(as_cmat(x), compute_uv=False)
    if s.size and s[0] > 0:
        s[s < RANK_TOL * s[0]] = 0.0
    return s


def schatten_norm(x, p) -> float:
    """(sum_i sigma_i(x)^p)^(1/p); operator norm for p = inf."""
    p = as_exponent(p)
    s = singular_values(x)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    if p == INF:
        return float(s[0])
    pf = float(p)
    if pf == 1.0:
        return float(np.sum(s))
    if pf == 2.0:
        return float(math.sqrt(np.sum(s * s)))
    # factor out sigma_max to keep powers in a safe range
    top = float(s[0])
    return top * float(np.sum((s[s > 0] / top) ** pf)) ** (1.0 / pf)


def lp_trace_norm(x, p, weight: TraceWeight) -> float:
    """Schatten p-norm under the given trace convention."""
    a = require_square(x)
    if a.shape[0] != weight.dim:
        raise ValueError(f"matrix dim {a.shape[0]} != trace weight dim {weight.dim}")
    return weight.norm_scale(p) * schatten_norm(a, p)


def schatten_dual_extremizer(x, p) -> np.ndarray:
    """z with <z, x> = tr(z* x) = ||x||_p and ||z||_p' = 1, from the SVD of x.

    For p < inf: z = U diag((sigma/||x||_p)^(p-1)) V*; for p = inf the top
    singular pair.  Zero matrix maps to zero.
    """
    p = as_exponent(p)
    a = as_cmat(x)
    u, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] <= 0:
        return np.zeros_like(a)
    if p == INF:
        d = np.zeros_like(s)
        d[0] = 1.0
    else:
        pf = float(p)
        d = (s / schatten_norm(a, p)) ** (pf - 1.0)
    return (u * d) @ vh


# ---------------------------------------------------------------------------
# tensor-slot algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TensorSlot:
    """Position k among n tensor factors of common dimension l (1-based k)."""

    slot_count: int
    slot_dim: int
    index: int

    def __post_init__(self):
        if not (1 <= self.index <= self.slot_count):
            raise ValueError(f"slot index {self.index} out of range 1..{self.slot_count}")
        check_dim(self.slot_dim ** self.slot_count)

    @property
    def total_dim(self) -> int:
        return self.slot_dim ** self.slot_count


def kron(a, b) -> np.ndarray:
    a, b = as_cmat(a), as_cmat(b)
    check_dim(a.shape[0] * b.shape[0])
    check_dim(a.shape[1] * b.shape[1])
    return np.kron(a, b)


def direct_sum(*blocks) -> np.ndarray:
    """Block-diagonal matrix with the given square blocks."""
    mats = [require_square(b) for b in blocks]
    if not mats:
        raise ValueError("direct_sum needs at least one block")
    total = check_dim(sum(m.shape[0] for m in mats))
    out = np.zeros((total, total), dtype=np.complex128)
    at = 0
    for m in mats:
        d = m.shape[0]
        out[at:at + d, at:at + d] = m
        at += d
    return out


def tensor_permute(mat, dims, perm) -> np.ndarray:
    """Permute tensor legs of an operator on a tensor product of spaces.

    ``dims`` are the factor dimensions of the input ordering and ``perm[i]``
    is the input position placed at output position i.
    """
    a = as_cmat(mat)
    dims = list(dims)
    k = len(dims)
    if a.shape[0] != np.prod(dims) or a.shape[1] != np.prod(dims):
        raise ValueError("dims do not match matrix shape")
    t = a.reshape(dims + dims)
    axes = list(perm) + [k + p for p in perm]
    t = t.transpose(axes)
    d = int(np.prod([dims[p] for p in perm]))
    return np.ascontiguousarray(t.reshape(d, d))


def slot_embed(x, slot: TensorSlot) -> np.ndarray:
    """x -> 1 x ... x 1 x x x 1 x ... x 1 with x at the slot position."""
    a = require_square(x)
    if a.shape[0] != slot.slot_dim:
        raise ValueError(f"matrix dim {a.shape[0]} != slot dim {slot.slot_dim}")
    n, l, k = slot.slot_count, slot.slot_dim, slot.index
    check_dim(slot.total_dim)
    if n == 1:
        return a.copy()
    big = np.kron(a, np.eye(l ** (n - 1), dtype=np.complex128))
    if k == 1:
        return big
    # move leg 0 (carrying x) to position k-1
    perm = list(range(1, k)) + [0] + list(range(k, n))
    return tensor_permute(big, [l] * n, perm)


def ambient_slot_embed(a, ambient_dim, slot: TensorSlot) -> np.ndarray:
    """Embed a in M_(m*l) as the (ambient x slot-k) factor of M_(m*l^n)."""
    n, l = slot.slot_count, slot.slot_dim
    m = ambient_dim
    x = require_square(a)
    if x.shape[0] != m * l:
        raise ValueError(f"matrix dim {x.shape[0]} != ambient*slot {m * l}")
    check_dim(m * l ** n)
    if n == 1:
        return x.copy()
    big = np.kron(x, np.eye(l ** (n - 1), dtype=np.complex128))
    # legs are (m, l_1, l_2, ..., l_n) with a acting on (m, l_1)
    perm = [0] + list(range(2, slot.index + 1)) + [1] + list(range(slot.index + 1, n + 1))
    return tensor_permute(big, [m] + [l] * n, perm)


def partial_trace(mat, dims, keep) -> np.ndarray:
    """Trace out all tensor legs except those in ``keep`` (input order kept)."""
    a = as_cmat(mat)
    dims = list(dims)
    k = len(dims)
    keep = sorted(keep)
    t = a.reshape(dims + dims)
    out_legs = set(range(k)) - set(keep)
    for leg in sorted(out_legs, reverse=True):
        t = np.trace(t, axis1=leg, axis2=leg + (t.ndim // 2))
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d, d)


# ---------------------------------------------------------------------------
# seeded random ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RngSeed:
    """64-bit seed plus a stream label; equal pairs replay equal streams."""

    seed: int
    label: str = ""

    def generator(self) -> np.random.Generator:
        digest = hashlib.sha256(f"{self.seed}:{self.label}".encode()).digest()
        words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
        return np.random.default_rng(np.random.SeedSequence([self.seed & (2**64 - 1), *words]))

    def child(self, label: str) -> "RngSeed":
        sep = "/" if self.label else ""
        return RngSeed(self.seed, f"{self.label}{sep}{label}")


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        return seed.generator()
    return RngSeed(int(seed)).generator()


def ginibre(rows, cols, seed) -> np.ndarray:
    """Complex Gaussian matrix, entry components N(0, 1/2) (E|z_ij|^2 = 1)."""
    rng = as_generator(seed)
    check_dim(max(rows, cols))
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return z / math.sqrt(2.0)


def haar_unitary(d, seed) -> np.ndarray:
    """Haar-distributed unitary: Ginibre draw, QR, positive-diagonal phase fix."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    g = ginibre(d, d, seed)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r).copy()
    diag[diag == 0] = 1.0
    return q * (diag / np.abs(diag))


def gue(d, seed) -> np.ndarray:
    """Self-adjoint Gaussian matrix (GUE-style normalization E|h_ij|^2 = 1, i != j)."""
    g = ginibre(d, d, seed)
    return (g + g.conj().T) / math.sqrt(2.0)


def wishart(d, seed) -> np.ndarray:
    """PSD matrix g g* / d from a square Ginibre draw."""
    g = ginibre(d, d, seed)
    return (g @ g.conj().T) / d


# ---------------------------------------------------------------------------
# NCMAT v1 file format
# ---------------------------------------------------------------------------

def dump_ncmat(x, fh):
    """Write the NCMAT v1 text encoding of a matrix to a file object."""
    a = as_cmat(x)
    fh.write("NCMAT 1\n")
    fh.write(f"{a.shape[0]} {a.shape[1]}\n")
    for row in a:
        fh.write(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row))
        fh.write("\n")


def load_ncmat(fh) -> np.ndarray:
    header = fh.readline().split()
    if header != ["NCMAT", "1"]:
        raise ValueError(f"bad NCMAT header: {header}")
    rows, cols = (int(v) for v in fh.readline().split())
    out = np.empty((rows, cols), dtype=np.complex128)
    for i in range(rows):
        parts = fh.readline().split()
        if len(parts) != 2 * cols:
            raise ValueError(f"row {i}: expected {2 * cols} numbers, got {len(parts)}")
        vals = np.array([float(v) for v in parts])
        out[i] = vals[0::2] + 1j * vals[1::2]
    return as_cmat(out)


def save_ncmat(path, x):
    with open(path, "w", encoding="ascii") as fh:
        dump_ncmat(x, fh)


def read_ncmat(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        return load_ncmat(fh)
