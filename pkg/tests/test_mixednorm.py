import io
import itertools
import math

import numpy as np
import pytest

from ncspace import matcore, mixednorm as mn
from ncspace.exponents import INF, conjugate, holder_gamma
from ncspace.matcore import schatten_norm
from ncspace.mixednorm import (
    JKNormSpec,
    SpaceDescriptor,
    VectorElement,
    asym_closed_form,
    commutative_mixed_norm,
    jk_norm,
    jk_term_value,
    lemma_d_check,
    min_structure_diagnostic,
    norm_asym_scalar,
    norm_l1_valued,
    norm_linf_valued,
    pairing,
    vector_element,
    vector_valued_norm,
)


def ginibre_family(rng, n, m):
    return np.stack([matcore.ginibre(m, m, rng) for _ in range(n)])


def diagonal_family(rng, n, m):
    vals = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    return vals, np.stack([np.diag(v) for v in vals])


# ---------------------------------------------------------------------------
# l_inf-valued norm
# ---------------------------------------------------------------------------

def test_linf_single_component_collapse(rng):
    x = matcore.ginibre(3, 3, rng)
    for p in (1, 1.5, 2, INF):
        cv = norm_linf_valued(vector_element(x), p)
        want = schatten_norm(x, p)
        assert cv.lower <= want * (1 + 1e-6)
        assert cv.upper >= want * (1 - 1e-6)
        assert cv.rel_gap <= 2e-6


def test_linf_diagonal_matches_commutative_oracle(rng):
    vals, fam = diagonal_family(rng, 3, 4)
    cv = norm_linf_valued(VectorElement(fam, matcore.normalized(4)), 2)
    want = commutative_mixed_norm(np.abs(vals), np.full(4, 0.25), 2, INF)
    assert cv.midpoint == pytest.approx(want, rel=1e-4)


def test_linf_basis_projections_norm_one():
    n = 3
    fam = np.stack([np.diag(np.eye(n)[c]).astype(complex) for c in range(n)])
    cv = norm_linf_valued(vector_element(fam), INF)
    assert cv.lower == pytest.approx(1.0, abs=1e-8)
    assert cv.upper == pytest.approx(1.0, abs=1e-8)


def test_linf_rejects_nan():
    bad = np.full((1, 2, 2), np.nan)
    with pytest.raises(ValueError):
        VectorElement(bad, matcore.unnormalized(2))


def test_zero_element_short_circuit():
    cv = norm_linf_valued(vector_element(np.zeros((3, 2, 2))), 2)
    assert (cv.lower, cv.upper, cv.status) == (0.0, 0.0, "converged")


# ---------------------------------------------------------------------------
# l_1-valued norm
# ---------------------------------------------------------------------------

def test_l1_single_component_collapse(rng):
    x = matcore.ginibre(3, 3, rng)
    for p in (1, 2, 3):
        cv = norm_l1_valued(vector_element(x), p)
        assert cv.midpoint == pytest.approx(schatten_norm(x, p), rel=1e-6)


def test_l1_at_p1_is_direct_sum(rng):
    fam = ginibre_family(rng, 3, 3)
    cv = norm_l1_valued(vector_element(fam), 1)
    want = sum(schatten_norm(x, 1) for x in fam)
    assert cv.midpoint == pytest.approx(want, rel=1e-6)


def test_l1_diagonal_matches_commutative_oracle(rng):
    vals, fam = diagonal_family(rng, 3, 4)
    cv = norm_l1_valued(VectorElement(fam, matcore.normalized(4)), 2)
    want = commutative_mixed_norm(np.abs(vals), np.full(4, 0.25), 2, 1)
    assert cv.midpoint == pytest.approx(want, rel=1e-4)


def test_l1_rejects_p_infinity(rng):
    with pytest.raises(ValueError):
        norm_l1_valued(vector_element(matcore.ginibre(2, 2, rng)), INF)


# ---------------------------------------------------------------------------
# duality between the two
# ---------------------------------------------------------------------------

def test_duality_saturation(rng):
    fam = ginibre_family(rng, 3, 3)
    x = VectorElement(fam, matcore.normalized(3))
    for p in (1.5, 2, 3):
        cv = norm_l1_valued(x, p)
        z = cv.dual_certificate.element
        znorm = norm_linf_valued(z, conjugate(p))
        pair_val = float(np.real(pairing(x, z)))
        assert pair_val == pytest.approx(cv.lower, rel=1e-9)
        assert znorm.upper <= 1 + 1e-4
        assert pair_val >= (1 - 1e-3) * cv.lower * znorm.upper


def test_monotonicity_in_q_on_diagonal_family(rng):
    vals, fam = diagonal_family(rng, 3, 4)
    x = VectorElement(fam, matcore.normalized(4))
    l1 = norm_l1_valued(x, 2)
    linf = norm_linf_valued(x, 2)
    mid = commutative_mixed_norm(np.abs(vals), np.full(4, 0.25), 2, 1.7)
    assert l1.upper >= mid - 1e-6
    assert mid >= linf.lower - 1e-6


def test_adjoint_symmetry(rng):
    fam = ginibre_family(rng, 3, 3)
    x = vector_element(fam)
    for p in (1.5, 2):
        a = norm_linf_valued(x, p)
        b = norm_linf_valued(x.adjoint(), p)
        assert a.midpoint == pytest.approx(b.midpoint, rel=1e-6)
        c = norm_l1_valued(x, p)
        d = norm_l1_valued(x.adjoint(), p)
        assert c.midpoint == pytest.approx(d.midpoint, rel=1e-6)


def test_unitary_invariance_of_brackets(rng):
    fam = ginibre_family(rng, 2, 3)
    x = vector_element(fam)
    u = matcore.haar_unitary(3, rng)
    y = x.conjugated(u)
    for p in (1.5, 2):
        assert norm_linf_valued(x, p).midpoint == pytest.approx(
            norm_linf_valued(y, p).midpoint, rel=1e-6)
        assert norm_l1_valued(x, p).midpoint == pytest.approx(
            norm_l1_valued(y, p).midpoint, rel=1e-6)


def test_certificate_invariants(rng):
    fam = ginibre_family(rng, 2, 3)
    x = vector_element(fam)
    for kind, p in (("linf", 1.5), ("l1", 2)):
        cv = norm_linf_valued(x, p) if kind == "linf" else norm_l1_valued(x, p)
        rc = mn.recheck_pair_certificates(x, cv, p, p)
        assert rc["primal_reconstruction"] <= 1e-10
        assert rc["middle_contraction"] <= 1 + 1e-10
        assert rc["primal_objective"] >= cv.solver_result.upper * (1 - 1e-10)
        assert rc["dual_psd_margin"] >= -1e-10
        assert rc["dual_ball_norm"] <= 1 + 1e-9
        assert rc["dual_pairing"] == pytest.approx(cv.solver_result.lower, rel=1e-9)


# ---------------------------------------------------------------------------
# asymmetric scalar norm
# ---------------------------------------------------------------------------

def test_asym_identity_example():
    cv = norm_asym_scalar(np.eye(2), 4, 4)
    assert cv.midpoint == pytest.approx(math.sqrt(2), rel=1e-6)


def test_asym_rank_one_example():
    cv = norm_asym_scalar(np.diag([1.0, 0.0]), 2, INF)
    assert cv.midpoint == pytest.approx(1.0, rel=1e-6)


def test_asym_domain_error():
    with pytest.raises(ValueError):
        norm_asym_scalar(matcore.ginibre(4, 4, np.random.default_rng(0)), 6, 1.5)


def test_asym_closed_form_sweep(rng):
    for _ in range(25):
        d = int(rng.integers(2, 5))
        x = matcore.ginibre(d, d, rng)
        r, s = rng.choice([2.0, 3.0, 4.0, 6.0]), rng.choice([2.0, 4.0])
        cv = norm_asym_scalar(x, r, s)
        want = asym_closed_form(x, r, s)
        assert abs(cv.upper - want) <= 1e-4 * want
        assert abs(cv.lower - want) <= 1e-4 * want


def test_asym_normalized_weight(rng):
    x = matcore.ginibre(3, 3, rng)
    gamma = holder_gamma(4, 4)
    cv = norm_asym_scalar(x, 4, 4, matcore.normalized(3))
    assert cv.midpoint == pytest.approx(
        3.0 ** (-1 / float(gamma)) * schatten_norm(x, gamma), rel=1e-5)


# ---------------------------------------------------------------------------
# J / K functional norms
# ---------------------------------------------------------------------------

def test_jk_scalar_collapse():
    x = VectorElement(np.array([[[2.0 + 1.0j]]]), matcore.normalized(1))
    for mode in ("intersection", "sum"):
        cv = jk_norm(x, JKNormSpec(1.7, 1.0, 1, 1, mode))
        assert cv.midpoint == pytest.approx(abs(2.0 + 1.0j), rel=1e-9)


def test_jk_p_equals_q_collapse(rng):
    fam = ginibre_family(rng, 3, 2)
    x = VectorElement(fam, matcore.normalized(2))
    for p in (1, 2, 3):
        want = float(np.sum([(2 ** (-1 / p) * schatten_norm(b, p)) ** p
                             for b in fam]) ** (1 / p))
        ci = jk_norm(x, JKNormSpec(p, p, 2, 3, "intersection"))
        cs = jk_norm(x, JKNormSpec(p, p, 2, 3, "sum"))
        assert ci.upper == pytest.approx(want, rel=1e-12)
        assert cs.midpoint == pytest.approx(want, rel=1e-9)


def test_jk_intersection_term_by_term_oracle(rng):
    fam = ginibre_family(rng, 3, 2)
    x = VectorElement(fam, matcore.normalized(2))
    spec = JKNormSpec(2, 1, 2, 3, "intersection")
    # independent evaluation: each term from its own SVDs
    best = 0.0
    for r, s in itertools.product((4.0, 2.0), repeat=2):
        gamma = float(holder_gamma(r, s))
        total = sum(np.linalg.svd(b, compute_uv=False) ** gamma for b in fam).sum()
        best = max(best, 2 ** (-1 / gamma) * total ** (1 / gamma))
    got = jk_norm(x, spec)
    assert got.upper == best


def test_jk_sum_dual_witness_in_dual_intersection_ball(rng):
    fam = ginibre_family(rng, 3, 2)
    x = VectorElement(fam, matcore.normalized(2))
    spec = JKNormSpec(conjugate(2.0), INF, 2, 3, "sum")
    cv = jk_norm(x, spec)
    w = cv.dual_certificate.element
    dual_cap = jk_norm(w, spec.dual())
    assert dual_cap.upper <= 1 + 1e-9
    # tau-pairing of witness against x reproduces the lower bound
    val = float(np.real(np.einsum("kij,kij->", x.components, w.components))) / 2
    assert val == pytest.approx(cv.lower, rel=1e-9)


def test_jk_sum_below_intersection(rng):
    fam = ginibre_family(rng, 2, 2)
    x = VectorElement(fam, matcore.normalized(2))
    cs = jk_norm(x, JKNormSpec(1.5, INF, 2, 2, "sum"))
    ci = jk_norm(x, JKNormSpec(1.5, INF, 2, 2, "intersection"))
    assert cs.upper <= ci.upper * (1 + 1e-9)


# ---------------------------------------------------------------------------
# commutative mixed norm
# ---------------------------------------------------------------------------

def test_commutative_constant_table():
    for p, q in ((1, 1), (2, 1), (1.5, 2), (INF, 3), (2, INF)):
        n = 3
        table = np.ones((n, 5))
        w = np.full(5, 0.2)
        want = n ** (1 / float(q)) if q != INF else 1.0
        assert commutative_mixed_norm(table, w, p, q) == pytest.approx(want)


def test_commutative_single_row_is_lp(rng):
    vals = np.abs(rng.standard_normal(6))
    w = np.full(6, 1 / 6)
    want = float(np.sum(w * vals ** 2.0) ** 0.5)
    assert commutative_mixed_norm(vals[None], w, 2, 3) == pytest.approx(want)


def test_commutative_rejects_bad_weights():
    with pytest.raises(ValueError):
        commutative_mixed_norm(np.ones((2, 2)), np.array([0.7, 0.7]), 2, 2)
    with pytest.raises(ValueError):
        commutative_mixed_norm(np.ones((2, 2)), np.array([1.5, -0.5]), 2, 2)


# ---------------------------------------------------------------------------
# minimal-structure diagnostic
# ---------------------------------------------------------------------------

def test_min_structure_single_component(rng):
    y = matcore.ginibre(3, 3, rng)
    got = min_structure_diagnostic(vector_element(y), 2, restarts=8, seed=1)
    assert got == pytest.approx(schatten_norm(y, INF), rel=1e-8)


def test_min_structure_diagonal_enumeration(rng):
    vals, fam = diagonal_family(rng, 3, 4)
    got = min_structure_diagnostic(vector_element(fam), 2, restarts=8, seed=1)
    want = max(float(np.sum(np.abs(vals[:, j]) ** 2) ** 0.5) for j in range(4))
    assert got == pytest.approx(want, rel=1e-8)


def test_min_structure_basis_family():
    n = 3
    fam = np.stack([np.diag(np.eye(n)[k]).astype(complex) for k in range(n)])
    got = min_structure_diagnostic(vector_element(fam), INF, restarts=4, seed=0)
    assert got == pytest.approx(1.0, rel=1e-10)


# ---------------------------------------------------------------------------
# diagonal-of-diagonals extraction
# ---------------------------------------------------------------------------

def test_lemma_d_basis_instance_tight():
    n = 3
    stack = np.stack([np.outer(np.eye(n)[c], np.eye(n)[c]).astype(complex)
                      for c in range(n)])
    lhs, rhs = lemma_d_check(stack)
    assert lhs == pytest.approx(n, abs=1e-12)
    assert rhs == pytest.approx(n, rel=1e-6)


def test_lemma_d_zero():
    lhs, rhs = lemma_d_check(np.zeros((2, 2, 2)))
    assert (lhs, rhs) == (0.0, 0.0)


def test_lemma_d_random_sweep(rng):
    for _ in range(25):
        stack = ginibre_family(rng, 3, 3)
        lhs, rhs = lemma_d_check(stack)
        assert lhs <= rhs + 1e-6


# ---------------------------------------------------------------------------
# general q dispatch
# ---------------------------------------------------------------------------

def test_vector_norm_general_q_diagonal_exact(rng):
    vals, fam = diagonal_family(rng, 3, 4)
    x = VectorElement(fam, matcore.normalized(4))
    cv = vector_valued_norm(x, 2, 1.5)
    comm = commutative_mixed_norm(np.abs(vals), np.full(4, 0.25), 2, 1.5)
    assert cv.status == "converged"
    assert cv.upper == pytest.approx(comm, rel=1e-12)


def test_vector_norm_general_q_bracket(rng):
    # commuting but not diagonal: the rotated family has the same norm as
    # its diagonal form, which must land inside the interpolation bracket
    vals, fam = diagonal_family(rng, 3, 4)
    u = matcore.haar_unitary(4, rng)
    rotated = np.einsum("ij,kjl,lm->kim", u, fam, u.conj().T)
    x = VectorElement(rotated, matcore.normalized(4))
    cv = vector_valued_norm(x, 2, 1.5)
    assert cv.status == "gap_not_closed"
    comm = commutative_mixed_norm(np.abs(vals), np.full(4, 0.25), 2, 1.5)
    assert cv.lower <= comm * (1 + 1e-6)
    assert cv.upper >= comm * (1 - 1e-6)


def test_vector_norm_q_equals_p_exact(rng):
    fam = ginibre_family(rng, 3, 2)
    x = VectorElement(fam, matcore.normalized(2))
    cv = vector_valued_norm(x, 2, 2)
    want = float(np.sum([(0.5 * schatten_norm(b, 2) * math.sqrt(2)) ** 2
                         for b in fam]) ** 0.5)
    assert cv.upper == pytest.approx(want, rel=1e-12)
    assert cv.status == "converged"


# ---------------------------------------------------------------------------
# descriptors and serialization
# ---------------------------------------------------------------------------

def test_space_descriptor_validation():
    SpaceDescriptor("schatten", p=2)
    SpaceDescriptor("vector", p=2, q=1, n=3)
    SpaceDescriptor("asymmetric", r=4, s=2)
    with pytest.raises(ValueError):
        SpaceDescriptor("asymmetric", r=1.5, s=2)
    with pytest.raises(ValueError):
        SpaceDescriptor("banana", p=2)
    assert float(SpaceDescriptor("asymmetric", r=4, s=4).gamma) == 2.0


def test_jk_spec_exponent_pairs():
    spec = JKNormSpec(2, 1, 2, 3, "intersection")
    gammas = sorted(float(g) for _, _, g in spec.exponent_pairs())
    assert gammas == pytest.approx([1.0, 4.0 / 3.0, 4.0 / 3.0, 2.0])
    dual = spec.dual()
    assert (float(dual.p), dual.q, dual.mode) == (2.0, INF, "sum")


def test_ncvec_roundtrip(rng):
    fam = ginibre_family(rng, 3, 2)
    x = VectorElement(fam, matcore.normalized(2))
    buf = io.StringIO()
    mn.dump_ncvec(x, buf)
    buf.seek(0)
    y = mn.load_ncvec(buf)
    assert np.array_equal(x.components, y.components)
    assert y.weight == x.weight


def test_ncvec_bad_header():
    with pytest.raises(ValueError):
        mn.load_ncvec(io.StringIO("NCVEC 2 1 1 tr\n"))
