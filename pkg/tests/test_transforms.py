import math

import numpy as np
import pytest
from conftest import evaluate_at
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import bergman_at, beurling_at, cauchy_green_at

from jdisc.discfield import DiscGrid, dbar, dz, field, monomial, norm
from jdisc.errors import ConfigurationError
from jdisc.transforms import (
    OPERATORS,
    ahlfors_beurling,
    bergman,
    cauchy_green,
    estimate_norm,
    r0,
    random_polynomial_field,
    t0,
    verify_identities,
)

GRID = DiscGrid(32, 64)


def probe(z):
    return np.conj(z) ** 2 * z + 0.5 * z**3 - 0.3j * np.conj(z) + 1


# values of T, R, B applied to ``probe`` computed once with the quadrature oracles
FROZEN = {
    0.3 + 0.2j: (
        0.26241666666666674 - 0.2648999999999999j,
        -0.24449999999999983 - 0.17633333333333331j,
        -0.9954999999999998 - 0.02299999999999968j,
    ),
    -0.5 + 0.1j: (
        -0.5529999999999997 - 0.0903333333333335j,
        0.2683333333333331 - 0.08566666666666663j,
        -0.9450000000000005 - 0.03699999999999952j,
    ),
    0.05 - 0.7j: (
        0.10417187499999965 + 0.8023791666666666j,
        -0.03752083333333334 + 0.07029166666666611j,
        -0.9633125000000002 - 0.1688749999999978j,
    ),
}


def one(grid=GRID):
    return field(grid, lambda z: np.ones_like(z))


@pytest.mark.parametrize("point", list(FROZEN))
def test_operators_match_frozen_oracle_values(point):
    f = field(GRID, probe)
    t_val, r_val, b_val = FROZEN[point]
    assert abs(evaluate_at(cauchy_green(f), point) - t_val) < 1e-10
    assert abs(evaluate_at(ahlfors_beurling(f), point) - r_val) < 1e-10
    assert abs(evaluate_at(bergman(f), point) - b_val) < 1e-10


def test_beurling_matches_principal_value_quadrature_at_many_nodes():
    rng = np.random.default_rng(0)
    f_coeffs = [(a, b, rng.normal() + 1j * rng.normal()) for a in range(5) for b in range(5 - a)]

    def f(z):
        return sum(c * z**a * np.conj(z) ** b for a, b, c in f_coeffs)

    F = field(GRID, f)
    R = ahlfors_beurling(F).values
    rows = np.flatnonzero(GRID.radial_nodes < 0.95)
    picks = [(rng.choice(rows), rng.integers(GRID.n_angular)) for _ in range(12)]
    for i, j in picks:
        assert abs(R[i, j] - beurling_at(f, GRID.zeta[i, j])) < 1e-9


def test_cauchy_green_and_bergman_match_quadrature():
    rng = np.random.default_rng(1)
    F = field(GRID, probe)
    T, B = cauchy_green(F).values, bergman(F).values
    for _ in range(10):
        i, j = rng.integers(GRID.n_radial - 1), rng.integers(GRID.n_angular)
        assert abs(T[i, j] - cauchy_green_at(probe, GRID.zeta[i, j])) < 1e-10
        if GRID.radial_nodes[i] < 0.9:
            assert abs(B[i, j] - bergman_at(probe, GRID.zeta[i, j])) < 1e-9


def test_operator_values_on_constants():
    assert np.abs(cauchy_green(one()).values - np.conj(GRID.zeta)).max() < 1e-13
    assert np.abs(ahlfors_beurling(one()).values).max() < 1e-12
    assert np.abs(bergman(one()).values + 1).max() < 1e-13
    assert np.abs(t0(one()).values - (np.conj(GRID.zeta) - GRID.zeta)).max() < 1e-13
    assert np.abs(r0(one()).values + 1).max() < 1e-12


@pytest.mark.parametrize("op", list(OPERATORS.values()))
def test_zero_maps_to_zero(op):
    assert np.abs(op(one() * 0).values).max() == 0.0


def test_bergman_annihilates_conj_zeta_and_negates_holomorphic_monomials():
    assert np.abs(bergman(monomial(GRID, 0, 1)).values).max() < 1e-13
    for k in range(5):
        zk = monomial(GRID, k, 0)
        assert np.abs(bergman(zk).values + zk.values).max() < 1e-8


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_cauchy_green_inverts_dbar(seed):
    f = random_polynomial_field(GRID, np.random.default_rng(seed), degree=8)
    interior = GRID.radial_nodes < 1
    assert np.abs((dbar(cauchy_green(f)) - f).values[interior]).max() < 1e-6
    assert np.abs((dbar(t0(f)) - f).values[interior]).max() < 1e-6


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_beurling_is_dz_of_cauchy_green(seed):
    f = random_polynomial_field(GRID, np.random.default_rng(seed), degree=8)
    assert np.abs((dz(cauchy_green(f)) - ahlfors_beurling(f)).values).max() < 1e-6


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_t0_has_imaginary_boundary_values(seed):
    f = random_polynomial_field(GRID, np.random.default_rng(seed), degree=8)
    assert np.abs(t0(f).boundary().values.real).max() <= 1e-8


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_r0_is_dz_of_t0_and_an_isometry(seed):
    f = random_polynomial_field(GRID, np.random.default_rng(seed), degree=8)
    assert np.abs((r0(f) - dz(t0(f))).values).max() < 1e-6
    assert abs(norm(r0(f), 2) / norm(f, 2) - 1) <= 1e-6


@given(st.integers(0, 2**31), st.complex_numbers(max_magnitude=10), st.floats(-10, 10))
@settings(max_examples=20, deadline=None)
def test_r0_is_real_linear_and_t_is_complex_linear(seed, c, s):
    rng = np.random.default_rng(seed)
    f, g = random_polynomial_field(GRID, rng, 5), random_polynomial_field(GRID, rng, 5)
    lhs = r0(f * s + g).values
    assert np.abs(lhs - (s * r0(f).values + r0(g).values)).max() < 1e-9 * (1 + abs(s))
    lhs = cauchy_green(f * c + g).values
    assert np.abs(lhs - (c * cauchy_green(f).values + cauchy_green(g).values)).max() < 1e-9 * (1 + abs(c))


@given(st.integers(0, 2**31))
@settings(max_examples=15, deadline=None)
def test_bergman_output_is_holomorphic(seed):
    f = random_polynomial_field(GRID, np.random.default_rng(seed), degree=8)
    coeffs = GRID.to_modes(bergman(f).values)
    total = np.sum(np.abs(coeffs) ** 2)
    assert np.sum(np.abs(coeffs[:, GRID.modes < 0]) ** 2) <= 1e-8 * total


def test_norm_estimate_of_r0_at_two():
    est = estimate_norm("R0", 2.0, trials=64, seed=3)
    assert 0.98 <= est.estimate <= 1.001
    assert est.trials == 64 and est.operator_id == "R0"


def test_norm_estimate_is_deterministic():
    a = estimate_norm("T", 4.0, trials=32, seed=11)
    b = estimate_norm("T", 4.0, trials=32, seed=11)
    assert math.isfinite(a.estimate) and a.estimate == b.estimate
    assert a.alpha == pytest.approx(0.5)


def test_norm_estimates_are_log_convex_in_one_over_p():
    e2, e25, e3 = (estimate_norm("R0", p, trials=32, seed=5).estimate for p in (2.0, 2.5, 3.0))
    theta = (1 / 2.5 - 1 / 3) / (1 / 2 - 1 / 3)
    assert e25 <= 1.05 * e2**theta * e3 ** (1 - theta)


@pytest.mark.parametrize("args", [("R0", 1.0), ("R0", 0.5), ("nope", 2.0)])
def test_norm_estimate_rejects_bad_input(args):
    with pytest.raises(ConfigurationError):
        estimate_norm(*args)
    with pytest.raises(ConfigurationError):
        estimate_norm("R0", 2.0, trials=0)


def test_identity_suite_passes_on_reference_grid():
    records = verify_identities(DiscGrid(64, 128), seed=7)
    assert records and all(r["pass"] for r in records)
    assert {r["grid"] for r in records} == {"64x128"}


def test_operators_are_exact_on_polynomials_across_grids():
    # polynomial data are represented exactly, so coarse and fine grids agree at shared radii
    f = field(DiscGrid(16, 32), probe)
    g = field(DiscGrid(48, 128), probe)
    for point in FROZEN:
        assert abs(evaluate_at(r0(f), point) - evaluate_at(r0(g), point)) < 1e-10


def test_cauchy_green_of_a_nonpolynomial_field_converges():
    def f(z):
        return np.exp(np.conj(z))

    coarse = evaluate_at(cauchy_green(field(DiscGrid(16, 32), f)), 0.4 + 0.3j)
    fine = evaluate_at(cauchy_green(field(DiscGrid(32, 64), f)), 0.4 + 0.3j)
    reference = cauchy_green_at(f, 0.4 + 0.3j)
    assert abs(fine - reference) <= abs(coarse - reference) + 1e-12
    assert abs(fine - reference) < 1e-10
