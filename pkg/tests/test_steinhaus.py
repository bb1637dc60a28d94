import math

import numpy as np
import pytest

from ncspace import matcore
from ncspace.exponents import INF, conjugate
from ncspace.matcore import CapacityError, RngSeed, schatten_norm
from ncspace.steinhaus import (
    Distribution,
    FourierCoefficients,
    MCEstimate,
    ParameterSet,
    classical_rosenthal_check,
    commutative_type_bound,
    cotype_witness,
    matrix_space,
    mc_moment,
    sample_system,
    scalar_space,
    sigma_type_witness,
    synthesize,
    type_witness_coefficients,
    vector_space,
)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_commutative_set_gives_phases():
    s = sample_system(ParameterSet((1, 1, 1)), 5)
    for u in s.unitaries:
        assert u.shape == (1, 1)
        assert abs(abs(u[0, 0]) - 1) <= 1e-15


def test_unitarity_residuals():
    s = sample_system(ParameterSet((2, 3, 4)), 5)
    assert s.unitarity_residual() <= 1e-12


def test_independent_streams_differ():
    s = sample_system(ParameterSet((2, 2)), 5)
    assert not np.array_equal(s.unitaries[0], s.unitaries[1])


def test_sample_reproducibility():
    a = sample_system(ParameterSet((2, 3)), RngSeed(9, "sys"))
    b = sample_system(ParameterSet((2, 3)), RngSeed(9, "sys"))
    for u, v in zip(a.unitaries, b.unitaries):
        assert np.array_equal(u, v)


def test_sample_capacity():
    with pytest.raises(CapacityError):
        sample_system(ParameterSet((1001,)), 0)


def test_parameter_set_validation():
    with pytest.raises(ValueError):
        ParameterSet(())
    with pytest.raises(ValueError):
        ParameterSet((0, 2))
    assert ParameterSet((1, 1)).commutative
    assert not ParameterSet((1, 2)).commutative


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------

def test_synthesize_single_entry_vector():
    d = 3
    v = np.zeros((d, d, 2), dtype=np.complex128)
    v[0, 0, 1] = 1.0  # A = e_11 (x) e_2
    coeffs = FourierCoefficients((v,), vector_space(2, 2))
    s = sample_system(ParameterSet((d,)), 3)
    out = synthesize(coeffs, s)
    want = d * s.unitaries[0][0, 0]
    assert out[0] == 0
    assert out[1] == pytest.approx(want)


def test_synthesize_type_witness_is_transpose():
    d = 3
    coeffs = type_witness_coefficients(d)
    s = sample_system(ParameterSet((d,)), 11)
    out = synthesize(coeffs, s)
    assert np.allclose(out, d * s.unitaries[0].T, atol=1e-14)


def test_synthesize_zero():
    coeffs = FourierCoefficients((np.zeros((2, 2)),), scalar_space())
    s = sample_system(ParameterSet((2,)), 1)
    assert synthesize(coeffs, s) == 0


def test_synthesize_shape_mismatch():
    coeffs = FourierCoefficients((np.zeros((2, 2)),), scalar_space())
    s = sample_system(ParameterSet((3,)), 1)
    with pytest.raises(ValueError):
        synthesize(coeffs, s)


# ---------------------------------------------------------------------------
# Monte Carlo moments
# ---------------------------------------------------------------------------

def test_mc_moment_constant_function_short_circuits():
    c = np.zeros((1, 1), dtype=np.complex128)
    coeffs = FourierCoefficients((c,), scalar_space())
    est = mc_moment(coeffs, ParameterSet((1,)), 2, 1000, 0)
    assert est.deterministic
    assert est.mean == 0.0
    assert est.std_error == 0.0


def test_mc_moment_type_witness_deterministic():
    d = 3
    blocks = type_witness_coefficients(d).blocks
    coeffs = FourierCoefficients(blocks, matrix_space(1.5, d))
    est = mc_moment(coeffs, ParameterSet((d,)), 2, 1000, 0)
    assert est.deterministic
    assert est.mean == pytest.approx(d ** (1 + 1 / 1.5), rel=1e-12)


def test_mc_moment_duplicate_estimator_crosscheck():
    # scalar f = sum_sigma c_sigma zeta_sigma with fixed weights: compare
    # against an independent plain-numpy reimplementation of the estimator
    weights = np.array([1.0, 0.5, 0.25])
    blocks = tuple(np.array([[w]], dtype=np.complex128) for w in weights)
    coeffs = FourierCoefficients(blocks, scalar_space())
    ps = ParameterSet((1, 1, 1))
    est = mc_moment(coeffs, ps, 2, 4000, 77)
    rng = np.random.default_rng(123456)
    phases = np.exp(2j * np.pi * rng.random((4000, 3)))
    ref = np.abs(phases @ weights)
    ref_mean = float(np.sqrt(np.mean(ref ** 2)))
    ref_se = float(np.std(ref ** 2, ddof=1)) / math.sqrt(4000)
    ref_se_root = ref_se * ref_mean / (2 * float(np.mean(ref ** 2)))
    assert abs(est.mean - ref_mean) <= 3 * (est.std_error + ref_se_root)


def test_mc_moment_seed_and_translation_invariance():
    d = 2
    a = matcore.ginibre(d, d, np.random.default_rng(5))
    coeffs = FourierCoefficients((a,), scalar_space())  # f = d * tr(a zeta)
    ps = ParameterSet((d,))
    e1 = mc_moment(coeffs, ps, 2, 3000, 1)
    e2 = mc_moment(coeffs, ps, 2, 3000, 2)
    assert abs(e1.mean - e2.mean) <= 3 * (e1.std_error + e2.std_error)
    w = matcore.haar_unitary(d, np.random.default_rng(9))
    coeffs_t = FourierCoefficients((a @ w,), scalar_space())
    e3 = mc_moment(coeffs_t, ps, 2, 3000, 1)
    assert abs(e1.mean - e3.mean) <= 3 * (e1.std_error + e3.std_error)


def test_mc_moment_rejects_small_samples():
    coeffs = FourierCoefficients((np.ones((1, 1)),), scalar_space())
    with pytest.raises(ValueError):
        mc_moment(coeffs, ParameterSet((1,)), 2, 8, 0)


# ---------------------------------------------------------------------------
# type and cotype witnesses
# ---------------------------------------------------------------------------

def test_sigma_type_witness_d2_values():
    r = sigma_type_witness(2, 1, 2, seed=0)
    assert r.closed_lhs == pytest.approx(4.0)
    assert r.closed_rhs == pytest.approx(2.0)
    assert r.implied_bound == pytest.approx(2.0)
    assert abs(r.measured - r.closed_lhs) <= 1e-10


def test_sigma_type_witness_d3_bound():
    r = sigma_type_witness(3, 1, 2, seed=1)
    assert r.implied_bound == pytest.approx(3.0, abs=1e-12)


def test_sigma_type_witness_rejects_equal_exponents():
    with pytest.raises(ValueError):
        sigma_type_witness(2, 2, 2)


def test_sigma_type_monotone_in_d_and_gap():
    b1 = sigma_type_witness(2, 1, 2).implied_bound
    b2 = sigma_type_witness(4, 1, 2).implied_bound
    b3 = sigma_type_witness(4, 1, 1.5).implied_bound
    assert b2 > b1
    assert b2 > b3  # larger 1/p - 1/q gives a larger bound


def test_type_witness_constant_across_samples():
    vals = [sigma_type_witness(3, 1.5, 2, seed=s).measured for s in range(6)]
    assert float(np.var(vals)) < 1e-20


def test_cotype_witness_d2_values():
    r = cotype_witness(2, 1, 2, seed=0)
    assert r.closed_lhs == pytest.approx(2 ** 1.25, rel=1e-12)
    assert r.closed_rhs == pytest.approx(2 ** 0.75, rel=1e-12)
    assert r.implied_bound == pytest.approx(math.sqrt(2), rel=1e-12)
    assert abs(r.measured - r.closed_rhs) <= 1e-10


def test_cotype_witness_d4_ratio():
    assert cotype_witness(4, 1, 2).implied_bound == pytest.approx(2.0, abs=1e-12)


def test_cotype_witness_rejects_p2():
    with pytest.raises(ValueError):
        cotype_witness(2, 2, 2)


# ---------------------------------------------------------------------------
# commutative type bound
# ---------------------------------------------------------------------------

def test_commutative_bound_p1_exact():
    r = commutative_type_bound(4, 1, 2, samples=1000, seed=0)
    assert r.implied_bound == pytest.approx(1.0, abs=1e-12)
    assert r.note == "deterministic"


def test_commutative_bound_p15_in_band():
    r = commutative_type_bound(16, 1.5, 2, samples=1000, seed=0)
    assert 0.3 <= r.implied_bound <= 1.0 + 1e-12
    assert r.implied_bound - r.ci3 > 0


def test_commutative_bound_rejects_p_equal_q():
    with pytest.raises(ValueError):
        commutative_type_bound(4, 2, 2)


# ---------------------------------------------------------------------------
# classical scalar equivalence
# ---------------------------------------------------------------------------

def test_exact_moments():
    assert Distribution("exponential").moment(2.5) == pytest.approx(
        math.gamma(3.5), rel=1e-12)
    assert Distribution("bernoulli", 0.3).moment(7) == pytest.approx(0.3)
    assert Distribution("uniform").moment(2) == pytest.approx(1 / 3)


def test_exponential_moment_against_quadrature():
    # independent oracle: numerical quadrature of x^r e^(-x)
    r = 1.5
    xs = np.linspace(0, 60, 200_001)
    integrand = xs ** r * np.exp(-xs)
    want = float(np.trapezoid(integrand, xs))
    assert Distribution("exponential").moment(r) == pytest.approx(want, rel=1e-8)


def test_classical_deterministic_case():
    lhs, rhs, ratio, ci = classical_rosenthal_check(
        Distribution("bernoulli", 1.0), 8, 2, 2000, seed=0)
    assert lhs.mean == pytest.approx(8.0)
    assert rhs == pytest.approx(8.0)
    assert ratio == pytest.approx(1.0)


def test_classical_single_variable():
    lhs, rhs, ratio, ci = classical_rosenthal_check(
        Distribution("exponential"), 1, 2, 20_000, seed=1)
    want = math.sqrt(math.gamma(3.0))  # (E f^2)^(1/2) = sqrt(2)
    assert abs(lhs.mean - want) <= 4 * lhs.std_error + 1e-3
    assert 0.5 <= ratio <= 2.0


def test_classical_exponential_band():
    lhs, rhs, ratio, ci = classical_rosenthal_check(
        Distribution("exponential"), 16, 2, 50_000, seed=3)
    expected = math.sqrt(16 * 17) / 16
    assert abs(ratio - expected) <= 0.02
    assert 0.25 <= ratio <= 4.0


def test_classical_requires_samples():
    with pytest.raises(ValueError):
        classical_rosenthal_check(Distribution("uniform"), 4, 2, 10)
