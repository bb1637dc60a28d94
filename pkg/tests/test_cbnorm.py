import math

import numpy as np
import pytest

from ncspace import matcore
from ncspace.cbnorm import (
    ColumnMapSpec,
    cb_lower_bound,
    cb_norm_closed_form,
    composition_ratio,
    holder_witness,
)
from ncspace.exponents import INF, cb_interpolation_exponent


def test_interpolation_exponent_arithmetic():
    assert cb_interpolation_exponent(INF, 2) == 2
    assert cb_interpolation_exponent(4, 2) == 4
    assert cb_interpolation_exponent(3, 3) == INF
    with pytest.raises(ValueError):
        cb_interpolation_exponent(2, 4)


def test_closed_form_identity_map():
    spec = ColumnMapSpec(np.eye(2, dtype=complex), INF, 2)
    assert cb_norm_closed_form(spec) == pytest.approx(2 ** 0.25, rel=1e-12)


def test_closed_form_equal_exponents_is_operator_norm(rng):
    a = matcore.ginibre(3, 3, rng)
    spec = ColumnMapSpec(a, 2.5, 2.5)
    assert cb_norm_closed_form(spec) == pytest.approx(
        matcore.schatten_norm(a, INF), rel=1e-12)


def test_closed_form_rank_one():
    e11 = np.zeros((3, 3), dtype=complex)
    e11[0, 0] = 1.0
    for r, s in ((INF, 2), (4, 2), (6, 3), (5, 5)):
        assert cb_norm_closed_form(ColumnMapSpec(e11, r, s)) == pytest.approx(1.0)


def test_row_orientation_same_value(rng):
    a = matcore.ginibre(3, 3, rng)
    col = ColumnMapSpec(a, 4, 2, "column")
    row = ColumnMapSpec(a, 4, 2, "row")
    assert cb_norm_closed_form(col) == cb_norm_closed_form(row)


def test_spec_rejects_s_above_r(rng):
    with pytest.raises(ValueError):
        ColumnMapSpec(matcore.ginibre(2, 2, rng), 2, 4)


def test_diagonal_example_closed_form_and_witness():
    a = np.diag([2.0, 1.0]).astype(complex)
    spec = ColumnMapSpec(a, 4, 2)
    closed = cb_norm_closed_form(spec)
    assert closed == pytest.approx((2 ** 8 + 1) ** 0.125, rel=1e-12)
    beta = holder_witness(a, 4, 2)
    # sigma_i(beta) proportional to sigma_i(alpha)^(t/r) = sigma^(4/4) = sigma
    sv = np.linalg.svd(beta, compute_uv=False)
    assert sv[0] / sv[1] == pytest.approx(2.0, rel=1e-12)
    assert matcore.schatten_norm(beta, 8) == pytest.approx(1.0, rel=1e-12)
    assert composition_ratio(a, beta, 4, 2) == pytest.approx(closed, rel=1e-12)


def test_witness_unitary_for_equal_singular_values(rng):
    u = matcore.haar_unitary(3, rng)
    beta = holder_witness(2.0 * u, 4, 2)
    sv = np.linalg.svd(beta, compute_uv=False)
    assert np.allclose(sv, sv[0])


def test_witness_rejects_zero():
    with pytest.raises(ValueError):
        holder_witness(np.zeros((2, 2)), 4, 2)


def test_witness_attains_closed_form_sweep(rng):
    for _ in range(100):
        a = matcore.ginibre(3, 3, rng)
        beta = holder_witness(a, 4, 2)
        closed = cb_norm_closed_form(ColumnMapSpec(a, 4, 2))
        assert composition_ratio(a, beta, 4, 2) >= (1 - 1e-6) * closed


def test_lower_bound_identity_by_symmetry():
    spec = ColumnMapSpec(np.eye(2, dtype=complex), INF, 2)
    lb = cb_lower_bound(spec, seed=0)
    assert lb.value == pytest.approx(2 ** 0.25, abs=1e-4)


def test_lower_bound_zero_map():
    lb = cb_lower_bound(ColumnMapSpec(np.zeros((2, 2)), 4, 2), seed=0)
    assert lb.value == 0.0


def test_lower_bound_two_sided_sweep(rng):
    for i in range(8):
        a = matcore.ginibre(3, 3, rng)
        for r, s in ((INF, 2), (4, 2), (6, 3), (4, 4)):
            spec = ColumnMapSpec(a, r, s)
            closed = cb_norm_closed_form(spec)
            lb = cb_lower_bound(spec, seed=i)
            assert lb.value <= closed * (1 + 1e-9)
            assert lb.value >= closed * (1 - 1e-3)


def test_composition_exponent_chain(rng):
    # diagonal maps compose with 1/t_total = 1/t_1 + 1/t_2
    d1 = np.diag([2.0, 0.7, 1.3]).astype(complex)
    d2 = np.diag([0.5, 1.9, 1.1]).astype(complex)
    r, s, u = 6.0, 3.0, 2.0  # r -> s -> u
    t1 = cb_interpolation_exponent(r, s)
    t2 = cb_interpolation_exponent(s, u)
    t_total = cb_interpolation_exponent(r, u)
    assert 1 / float(t_total) == pytest.approx(1 / float(t1) + 1 / float(t2))
    lhs = cb_norm_closed_form(ColumnMapSpec(d2 @ d1, r, u))
    rhs = (cb_norm_closed_form(ColumnMapSpec(d2, s, u))
           * cb_norm_closed_form(ColumnMapSpec(d1, r, s)))
    assert lhs <= rhs * (1 + 1e-12)
