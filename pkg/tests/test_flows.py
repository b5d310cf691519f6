import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isodrast import HamiltonianFn, LoopEmbedding, action_integral, flow_loop, isodrast_drift
from isodrast import flows
from isodrast import sampling as smp
from isodrast.ambient import hamiltonian_vector_field
from isodrast.loops import TWO_PI

OSC = HamiltonianFn.from_expr("(q**2 + p**2)/2")


def test_action_of_unit_circle(circle):
    assert action_integral(circle) == pytest.approx(-np.pi, abs=1e-10)


def test_action_scales_with_area():
    assert action_integral(LoopEmbedding.circle(128, radius=2.5)) == pytest.approx(-np.pi * 2.5**2, abs=1e-10)


def test_action_flips_with_orientation():
    assert action_integral(LoopEmbedding.circle(128, reverse=True)) == pytest.approx(np.pi, abs=1e-10)


def test_harmonic_oscillator_returns(circle):
    traj = flow_loop(circle, OSC, TWO_PI, 2000)
    assert np.max(np.abs(traj.final.samples - circle.samples)) < 1e-8


def test_constant_hamiltonian_is_stationary(circle):
    traj = flow_loop(circle, HamiltonianFn.constant(1.0), 1.0, 10)
    for loop in traj:
        np.testing.assert_array_equal(loop.samples, circle.samples)


def test_zero_time_has_one_frame(circle):
    traj = flow_loop(circle, OSC, 0.0, 10)
    assert len(traj) == 1
    assert isodrast_drift(traj) == 0.0


@pytest.mark.parametrize("expr", flows.STANDARD_HAMILTONIANS)
def test_drift_small_for_standard_hamiltonians(circle, expr):
    traj = flow_loop(circle, HamiltonianFn.from_expr(expr), 1.0, 1000)
    assert isodrast_drift(traj) < 1e-6


def test_radial_field_drifts(circle):
    assert isodrast_drift(flow_loop(circle, flows.radial_field, 0.5, 100)) > 0.1


def test_hamiltonian_fields_are_tangent_to_the_leaf(circle):
    for H in flows.standard_hamiltonians():
        assert flows.exactness_residual(circle, H.vector_field(circle.samples)) < 1e-12
    assert flows.exactness_residual(circle, np.zeros((circle.N, 2))) == 0.0


def test_piecewise_schedule_matches_single_hamiltonian(circle):
    H = HamiltonianFn.from_expr("q*p")
    both = flow_loop(circle, [(0.0, H), (0.5, H)], 1.0, 200)
    single = flow_loop(circle, H, 1.0, 200)
    np.testing.assert_allclose(both.final.samples, single.final.samples, atol=1e-12)


def test_piecewise_schedule_conserves_action(circle):
    sched = [(0.0, HamiltonianFn.from_expr("q**2/2")), (0.5, HamiltonianFn.from_expr("sin(p)"))]
    assert isodrast_drift(flow_loop(circle, sched, 1.0, 400)) < 1e-6


def test_tangent_flow_matches_finite_differences():
    H = HamiltonianFn.from_expr("q**3/6 + p**2/2")
    x0 = np.array([0.3, -0.2])
    V0 = np.array([1.0, 0.5])
    x, V = flows.tangent_flow(H, x0, V0, 0.7, 200)
    s = 1e-6
    fd = (flows.flow_points(H, x0 + s * V0, 0.7, 200) - flows.flow_points(H, x0 - s * V0, 0.7, 200)) / (2 * s)
    np.testing.assert_allclose(V, fd, atol=1e-7)
    np.testing.assert_allclose(x, flows.flow_points(H, x0, 0.7, 200))


def test_csv_formats(tmp_path, circle):
    traj = flow_loop(LoopEmbedding.circle(16), OSC, 0.5, 2)
    flows.write_trajectory_csv(traj, tmp_path / "t.csv")
    flows.write_action_csv(traj, tmp_path / "a.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["step", "t", "point_index", "q1", "p1"]
    assert len(rows) == 1 + 3 * 16
    actions = list(csv.reader(open(tmp_path / "a.csv")))
    assert actions[0] == ["step", "t", "action_integral"]
    assert [r[0] for r in actions[1:]] == ["0", "1", "2"]
    assert float(actions[1][2]) == pytest.approx(action_integral(traj[0]), abs=1e-15)


@given(st.integers(0, 2**32 - 1), st.sampled_from(flows.STANDARD_HAMILTONIANS))
def test_drift_on_random_loops(seed, expr):
    loop = smp.random_loop(np.random.default_rng(seed), 64)
    assert isodrast_drift(flow_loop(loop, HamiltonianFn.from_expr(expr), 1.0, 200)) < 1e-6


@given(st.integers(0, 2**32 - 1))
def test_flow_velocity_is_the_hamiltonian_field(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(5, 2))
    H = flows.standard_hamiltonians()[seed % 10]
    dt = 1e-4
    v = (flows.flow_points(H, x, dt, 1) - flows.flow_points(H, x, -dt, 1)) / (2 * dt)
    np.testing.assert_allclose(v, hamiltonian_vector_field(H, x), atol=1e-6)
