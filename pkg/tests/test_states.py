"""Field-state amplitude tables, factorial moments, and sizing helpers."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tpjcm.hilbert import assemble_state, ro_expectation
from tpjcm.model import Truncation
from tpjcm.states import (
    Coherent,
    FieldStateSpec,
    PairCoherent,
    SqueezedVacuum,
    amplitudes,
    default_truncation,
    factorial_moment,
    falling_factorial,
    mean_photons,
    moment_table,
    pair_xi_for_mean,
    squeezed_r_for_mean,
)

FIELDS = [
    Coherent(1.2, 0.8 * np.exp(0.5j)),
    SqueezedVacuum(r=0.9, phi=0.3),
    PairCoherent(xi=1.7, q=2),
]


@given(st.floats(min_value=-30, max_value=30, allow_nan=False))
def test_falling_factorial_base_case(x):
    assert falling_factorial(x, 0) == 1.0


@given(st.floats(min_value=-20, max_value=20, allow_nan=False),
       st.integers(min_value=0, max_value=8))
def test_falling_factorial_recurrence(x, k):
    lhs = falling_factorial(x, k + 1)
    rhs = falling_factorial(x, k) * (x - k)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@given(st.integers(min_value=0, max_value=12), st.integers(min_value=0, max_value=12))
def test_falling_factorial_integer_values(n, k):
    expected = math.perm(n, k) if k <= n else 0
    assert falling_factorial(float(n), k) == pytest.approx(float(expected))


@pytest.mark.parametrize("field", FIELDS)
def test_amplitude_table_is_normalized(field):
    dist = amplitudes(field, default_truncation(FieldStateSpec(field)))
    assert np.sum(np.abs(dist.amps) ** 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("field", FIELDS)
@pytest.mark.parametrize("n,m", [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (3, 2)])
def test_assembled_state_ro_matches_factorial_moment(field, n, m):
    """Two independent paths to the same number: amplitude table + RO weights
    versus the per-family closed-form moment evaluation. The table is oversized
    on purpose: order-(3,2) moments weight the tail by k^5, so the mass-targeted
    default truncation is not tight enough for a 1e-10 pathway comparison."""
    trunc = Truncation(80, 80)
    psi = assemble_state(amplitudes(field, trunc), "e")
    moment = factorial_moment(field, n, m)
    assert ro_expectation(psi, "N2", n, m) == pytest.approx(moment, rel=1e-10, abs=1e-10)
    assert ro_expectation(psi, "N1", n, m) == 0.0
    assert ro_expectation(psi, "D1", n, m) == pytest.approx(
        factorial_moment(field, n + 1, m), rel=1e-10, abs=1e-10)
    assert ro_expectation(psi, "D2", n, m) == pytest.approx(
        factorial_moment(field, n, m + 1), rel=1e-10, abs=1e-10)


def test_ground_level_assembly_moves_population():
    field = Coherent(1.0, 1.0)
    psi = assemble_state(amplitudes(field, Truncation(14, 14)), "g")
    assert ro_expectation(psi, "N1", 0, 0) == pytest.approx(1.0, abs=1e-12)
    assert ro_expectation(psi, "N2", 0, 0) == 0.0


def test_squeezed_marginal_is_geometric():
    r = 0.8
    dist = amplitudes(SqueezedVacuum(r=r), Truncation(60, 60))
    marginal = np.sum(np.abs(dist.amps) ** 2, axis=1)
    ratio = marginal[1:25] / marginal[:24]
    np.testing.assert_allclose(ratio, np.tanh(r) ** 2, rtol=1e-10)


def test_squeezed_is_diagonal_in_joint_photon_number():
    dist = amplitudes(SqueezedVacuum(r=0.8), Truncation(30, 30))
    off = dist.amps - np.diag(np.diag(dist.amps))
    assert np.all(off == 0.0)


@pytest.mark.parametrize("q", [0, 1, 3])
def test_pair_coherent_charge_is_exact(q):
    field = PairCoherent(xi=2.0, q=q)
    diff = factorial_moment(field, 1, 0) - factorial_moment(field, 0, 1)
    assert diff == pytest.approx(q, abs=1e-10)
    # support of the table sits on the n1 - n2 = q diagonal
    dist = amplitudes(field, Truncation(40, 36))
    n1, n2 = np.nonzero(dist.amps)
    assert np.all(n1 - n2 == q)


@pytest.mark.parametrize("field", FIELDS)
def test_moment_table_agrees_with_pointwise_moments(field):
    size = 3
    table = moment_table(field, size)
    assert table.shape == (size + 1, size + 1)
    for n in range(size + 1):
        for m in range(size + 1):
            assert table[n, m] == pytest.approx(
                factorial_moment(field, n, m), rel=1e-12, abs=1e-12)


def test_squeezed_r_for_mean_round_trip():
    r = squeezed_r_for_mean(10.0)
    assert math.sinh(r) ** 2 == pytest.approx(10.0, rel=1e-12)


@pytest.mark.parametrize("q", [0, 2])
def test_pair_xi_for_mean_round_trip(q):
    xi = pair_xi_for_mean(10.0, q=q)
    field = PairCoherent(xi, q)
    assert factorial_moment(field, 0, 1) == pytest.approx(10.0, rel=1e-9)
    assert factorial_moment(field, 1, 0) == pytest.approx(10.0 + q, rel=1e-9)


def test_mean_photons_reports_both_modes():
    spec = FieldStateSpec(Coherent(2.0, 1.0))
    assert mean_photons(spec) == pytest.approx((4.0, 1.0))


@pytest.mark.parametrize("field,mean", [
    (Coherent(math.sqrt(10), math.sqrt(10)), 10.0),
    (SqueezedVacuum(r=squeezed_r_for_mean(10.0)), 10.0),
    (PairCoherent(pair_xi_for_mean(10.0), 0), 10.0),
])
def test_default_truncation_keeps_tail_below_budget(field, mean):
    spec = FieldStateSpec(field)
    trunc = default_truncation(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dist = amplitudes(field, trunc)
    assert dist.leakage < 1e-10


def test_tight_truncation_warns_and_renormalizes():
    with pytest.warns(UserWarning, match="tail mass"):
        dist = amplitudes(Coherent(2.0, 2.0), Truncation(6, 6))
    assert dist.leakage > 1e-10
    assert np.sum(np.abs(dist.amps) ** 2) == pytest.approx(1.0, abs=1e-12)
