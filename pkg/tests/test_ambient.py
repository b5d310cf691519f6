import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from isodrast import AmbientSpace, HamiltonianFn, ParseError
from isodrast.ambient import (
    ambient_jacobi_residual,
    bracket_function,
    compatible_metric,
    complex_structure,
    dictionary,
    hamiltonian_vector_field,
    liouville,
    omega,
    poisson_bracket_ambient,
    symplectic_matrix,
)
from isodrast.flows import flow_points

finite = st.floats(-10, 10, allow_nan=False)
vec2n = st.integers(1, 3).flatmap(lambda n: st.tuples(*(arrays(float, (2 * n,), elements=finite) for _ in range(3))))


# -- frozen oracles ----------------------------------------------------------


def test_omega_on_basis():
    assert omega(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0
    assert omega(np.array([0.0, 1.0]), np.array([1.0, 0.0])) == -1.0


def test_liouville_is_p_dq():
    assert liouville(np.array([5.0, 2.0]), np.array([3.0, 7.0])) == 6.0


def test_hamiltonian_field_of_q():
    v = hamiltonian_vector_field(HamiltonianFn.from_expr("q"), np.array([1.0, 0.0]))
    np.testing.assert_array_equal(v, [0.0, -1.0])


def test_hamiltonian_field_of_oscillator():
    v = hamiltonian_vector_field(HamiltonianFn.from_expr("(q**2 + p**2)/2"), np.array([0.0, 1.0]))
    np.testing.assert_allclose(v, [1.0, 0.0], atol=1e-15)


def test_constant_hamiltonian_has_zero_field():
    H = HamiltonianFn.constant(3.5)
    x = np.random.default_rng(0).normal(size=(7, 2))
    np.testing.assert_array_equal(hamiltonian_vector_field(H, x), 0.0)


def test_coordinate_bracket_is_minus_one():
    F, G = HamiltonianFn.from_expr("q"), HamiltonianFn.from_expr("p")
    x = np.random.default_rng(1).normal(size=(5, 2))
    np.testing.assert_array_equal(poisson_bracket_ambient(F, G, x), -1.0)


def test_self_bracket_vanishes():
    F = HamiltonianFn.from_expr("q**2*p + sin(p)")
    x = np.random.default_rng(2).normal(size=(5, 2))
    np.testing.assert_array_equal(poisson_bracket_ambient(F, F, x), 0.0)


def test_bracket_q2_p_matches_flow_derivative():
    # {F, G} = -omega(X_F, X_G) = -dF(X_G): minus the derivative of F along the flow of X_G
    F, G = HamiltonianFn.from_expr("q**2"), HamiltonianFn.from_expr("p")
    x = np.array([3.0, 0.0])
    value = float(poisson_bracket_ambient(F, G, x))
    s = 1e-4
    fd = (F(flow_points(G, x, s, 4)) - F(flow_points(G, x, -s, 4))) / (2 * s)
    assert value == pytest.approx(-6.0, abs=1e-12)
    assert fd == pytest.approx(-value, abs=1e-7)


def test_symbolic_bracket_function():
    B = bracket_function(HamiltonianFn.from_expr("q**2"), HamiltonianFn.from_expr("p"))
    assert B(np.array([3.0, 0.0])) == pytest.approx(-6.0)


def test_symplectic_matrix_and_ambient_space():
    S = symplectic_matrix(2)
    np.testing.assert_array_equal(S @ S, -np.eye(4))
    M = AmbientSpace(2)
    assert M.dim == 4
    assert M.coordinate_names() == ["q1", "q2", "p1", "p2"]


def test_dictionary_contents():
    names = [f.name for f in dictionary(1, max_degree=2, trig=True)]
    assert names[:2] == ["q1", "p1"]
    assert "sin(q1)" in names and "cos(p1)" in names


def test_from_callable_uses_finite_differences():
    H = HamiltonianFn.from_callable(lambda x: x[..., 0] ** 2 * x[..., 1], 1)
    assert not H.analytic
    np.testing.assert_allclose(H.grad(np.array([2.0, 3.0])), [12.0, 4.0], atol=1e-6)


def test_parse_error():
    with pytest.raises(ParseError):
        HamiltonianFn.from_expr("q +* p")
    with pytest.raises(ParseError):
        HamiltonianFn.from_expr("z**2")


def test_ambient_jacobi_for_polynomials():
    F, G, H = (HamiltonianFn.from_expr(e) for e in ("q**2*p", "sin(q) + p**3", "q*p**2"))
    x = np.random.default_rng(3).normal(size=(6, 2))
    assert ambient_jacobi_residual(F, G, H, x) < 1e-6


# -- invariants --------------------------------------------------------------


@given(vec2n)
def test_omega_antisymmetric(uvw):
    u, v, _ = uvw
    assert omega(u, v) == pytest.approx(-omega(v, u), abs=1e-12)


@given(vec2n)
def test_compatible_metric_positive(uvw):
    u, _, _ = uvw
    assert compatible_metric(u, u) == pytest.approx(float(u @ u), abs=1e-9)
    assert compatible_metric(u, u) >= 0.0


@given(vec2n)
def test_complex_structure_squares_to_minus_one(uvw):
    u, v, _ = uvw
    np.testing.assert_allclose(complex_structure(complex_structure(u)), -u)
    # J preserves omega
    assert omega(complex_structure(u), complex_structure(v)) == pytest.approx(omega(u, v), abs=1e-9)
