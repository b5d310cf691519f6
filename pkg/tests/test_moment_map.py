import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isodrast import (
    HamiltonianFn,
    InvariantError,
    TangentVector,
    equivariance_residual,
    kks_pairing,
    moment_condition_residual,
    moment_eval,
    omega_weighted,
)
from isodrast import flows, moment_map
from isodrast import sampling as smp
from isodrast.ambient import dictionary

FS = dictionary(1, max_degree=3, trig=True)
seeds = st.integers(0, 2**32 - 1)


def _point(seed, N=128):
    rng = np.random.default_rng(seed)
    return rng, smp.random_loop(rng, N), smp.positive_weighting(rng, N)


def test_moment_examples(circle, uniform):
    assert abs(moment_eval(circle, uniform, HamiltonianFn.from_expr("q"))) < 1e-15
    assert moment_eval(circle, uniform, HamiltonianFn.constant(1.0)) == pytest.approx(1.0, abs=1e-15)
    assert moment_eval(circle, uniform, HamiltonianFn.from_expr("q**2")) == pytest.approx(0.5, abs=1e-14)


def test_moment_condition_zero_tangent(circle, uniform):
    xi = TangentVector.zero(circle.N, 2)
    assert moment_condition_residual(circle, uniform, HamiltonianFn.from_expr("q**2*p"), xi) < 1e-12


def test_moment_condition_negative_control():
    rng, loop, eta = _point(3)
    f = HamiltonianFn.from_expr("q**2 + p")
    xi = smp.exact_tangent(rng, loop)
    assert moment_condition_residual(loop, eta, f, xi, sign=-1.0) > 1e-2


@given(seeds, st.integers(0, len(FS) - 1))
def test_moment_condition(seed, k):
    rng, loop, eta = _point(seed)
    assert moment_condition_residual(loop, eta, FS[k], smp.exact_tangent(rng, loop)) < 1e-6


def test_equivariance_trivial_time(circle, uniform):
    assert equivariance_residual(circle, uniform, FS[3], FS[4], 0.0, 10) == 0.0


def test_equivariance_same_integrator():
    _, loop, eta = _point(4)
    H = HamiltonianFn.from_expr("q**2/2 + sin(p)")
    assert equivariance_residual(loop, eta, FS[5], H, 1.0, 500) < 1e-8


def test_equivariance_mismatched_steps():
    _, loop, eta = _point(5)
    H = HamiltonianFn.from_expr("q**2/2 + sin(p)")
    assert equivariance_residual(loop, eta, FS[5], H, 1.0, 500, 501) < 1e-6


@given(seeds, st.integers(0, 9))
def test_equivariance_with_finer_pullback(seed, k):
    _, loop, eta = _point(seed, 64)
    H = flows.standard_hamiltonians()[k]
    assert equivariance_residual(loop, eta, FS[k % len(FS)], H, 0.5, 100, 200) < 1e-6


def test_kks_examples(circle, uniform):
    q, p = HamiltonianFn.from_expr("q"), HamiltonianFn.from_expr("p")
    assert kks_pairing(circle, uniform, q, p) == pytest.approx(1.0, abs=1e-14)
    assert kks_pairing(circle, uniform, q, q) == 0.0


@given(seeds, st.integers(0, len(FS) - 1), st.integers(0, len(FS) - 1))
def test_kks_pullback(seed, i, j):
    _, loop, eta = _point(seed)
    assert moment_map.kks_defect(loop, eta, FS[i], FS[j]) < 1e-12


def test_generating_vector_is_exact():
    _, loop, eta = _point(6)
    xi = moment_map.generating_vector(loop, FS[7])
    omega_weighted(loop, eta, xi, xi)  # passes the exactness gate
    np.testing.assert_array_equal(xi.vartheta, 0.0)


def test_dual_pairing_separates_distinct_loops():
    _, loop, eta = _point(7)
    a = moment_map.DualPairing(loop, eta)
    b = moment_map.DualPairing(smp.random_loop(8, 128), eta)
    gap, name = a.separation(b)
    assert gap > 1e-3 and isinstance(name, str)
    assert a.separation(a)[0] == 0.0


def test_dual_pairing_rejects_momentum_weighting(circle):
    chi = smp.zero_mass_weighting(0, circle.N)
    with pytest.raises(InvariantError):
        moment_map.DualPairing(circle, chi)
