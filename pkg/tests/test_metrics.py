import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isodrast import (
    DegenerateMetric,
    InvariantError,
    MetricField,
    MetricTangent,
    MomentumField,
    SignatureBreach,
    omega_metric,
    theta_metric,
    xi_Fr,
)
from isodrast import metrics as M
from isodrast import sampling as smp
from isodrast.numerics import richardson_ratio
from isodrast.suites import _metric_functionals

seeds = st.integers(0, 2**32 - 1)
preset_names = st.sampled_from(sorted(M.PRESETS))


def _scalar(v):
    return MetricField(np.array([[[v]]]), (1,), (1, 0) if v > 0 else (0, 1))


def _t(k, l):
    return MetricTangent(np.array([[[k]]], dtype=float), np.array([[[l]]], dtype=float))


# -- frozen examples ---------------------------------------------------------


def test_volume_density_examples():
    assert M.volume_density(_scalar(4.0))[0] == pytest.approx(2.0)
    g = M.riemannian_preset(2)
    np.testing.assert_allclose(M.volume_density(g), g.cell_volume)
    lor = MetricField.constant(np.diag([-1.0, 1.0, 1.0, 1.0]), (2, 1, 1, 1), (3, 1))
    np.testing.assert_allclose(M.volume_density(lor), lor.cell_volume)


def test_theta_scalar_example():
    # (1/4)(1)(1/4)(2) times the density: sqrt(4) = 2 gives 1/4, |det| = 4 gives 1/2
    g, h = _scalar(4.0), np.array([[[2.0]]])
    assert theta_metric(g, h, _t(1.0, 0.0), exponent=0.5) == pytest.approx(0.25, abs=1e-15)
    assert theta_metric(g, h, _t(1.0, 0.0)) == pytest.approx(0.5, abs=1e-15)
    assert theta_metric(g, h, _t(0.0, 3.0)) == 0.0


def test_omega_scalar_example():
    g, h = _scalar(1.0), np.zeros((1, 1, 1))
    assert omega_metric(g, h, _t(1.0, 0.0), _t(0.0, 1.0)) == pytest.approx(1.0, abs=1e-15)
    xi = _t(0.7, -0.2)
    assert omega_metric(g, h, xi, xi) == 0.0


def test_Fr_examples():
    g = MetricField.constant(np.eye(2), (1, 1), (2, 0))
    eye = np.eye(2)[None]
    assert M.functional_Fr(eye, g, eye) == pytest.approx(2.0, abs=1e-15)
    assert M.functional_Fr(eye, g, np.zeros_like(eye)) == 0.0


def test_xi_Fr_examples():
    eye = np.eye(2)[None]
    xi = xi_Fr(eye, eye, eye)
    np.testing.assert_array_equal(xi.k, eye)
    np.testing.assert_array_equal(xi.l, 0 * eye)
    xi0 = xi_Fr(np.zeros_like(eye), eye, eye)
    np.testing.assert_array_equal(xi0.k, 0.0)
    np.testing.assert_array_equal(xi0.l, 0.0)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_identity_case(d):
    eye = np.eye(d)[None]
    xi = xi_Fr(eye, eye, eye)
    np.testing.assert_array_equal(xi.k, eye)
    np.testing.assert_array_equal(xi.l, (2 - d) * eye)


def test_metric_bracket_self():
    g = M.lorentzian_preset()
    r = smp.random_symmetric(0, g.n_cells, 4)
    h = smp.random_symmetric(1, g.n_cells, 4)
    assert M.metric_bracket(r, r, g, h) == 0.0


def test_Fr_family_commutes():
    # F_r only moves g by translation, and the trace terms cancel pairwise
    rng = np.random.default_rng(2)
    for _, g in smp.metric_configurations(rng):
        r, s, h = (smp.random_symmetric(rng, g.n_cells, g.base_dim) for _ in range(3))
        assert abs(M.metric_bracket(r, s, g, h)) < 1e-12


# -- validation --------------------------------------------------------------


def test_metric_validation():
    with pytest.raises(DegenerateMetric):
        MetricField(np.zeros((1, 2, 2)), (1, 1), (2, 0))
    with pytest.raises(InvariantError):
        MetricField(np.array([[[1.0, 0.5], [0.0, 1.0]]]), (1, 1), (2, 0))
    with pytest.raises(SignatureBreach):
        MetricField(np.diag([1.0, -1.0])[None], (1, 1), (2, 0))
    with pytest.raises(InvariantError):
        MetricField(np.eye(2)[None], (2, 1), (2, 0))
    with pytest.raises(InvariantError):
        MomentumField(np.array([[[0.0, 1.0], [0.0, 0.0]]]))


def test_tangent_arithmetic():
    a, b = _t(1.0, 2.0), _t(0.5, -1.0)
    c = np.float64(2.0) * a - b
    assert isinstance(c, MetricTangent)
    np.testing.assert_array_equal(c.k, [[[1.5]]])
    np.testing.assert_array_equal((-c).l, [[[-5.0]]])


def test_presets():
    for name, make in M.PRESETS.items():
        g = make()
        assert g.base_dim == int(name[-1])
    assert M.lorentzian_preset().signature == (1, 3)


# -- forms and Hamiltonian fields --------------------------------------------


@given(seeds)
def test_antisymmetry_and_bilinearity(seed):
    rng = np.random.default_rng(seed)
    for _, g in smp.metric_configurations(rng):
        h = smp.random_momentum(rng, g)
        a, b, c = (smp.random_metric_tangent(rng, g) for _ in range(3))
        s = float(rng.normal())
        f = lambda u, v: omega_metric(g, h, u, v)
        assert f(a, b) == pytest.approx(-f(b, a), abs=1e-12)
        assert f(s * a + c, b) == pytest.approx(s * f(a, b) + f(c, b), abs=1e-12)


@given(seeds, preset_names)
def test_hamiltonian_field_at_presets(seed, name):
    rng = np.random.default_rng(seed)
    g = M.PRESETS[name]()
    h = smp.random_momentum(rng, g)
    r = smp.random_symmetric(rng, g.n_cells, g.base_dim)
    assert M.hamiltonian_defect(r, g, h, smp.random_metric_tangent(rng, g)) < 1e-6


@given(seeds)
def test_closedness_exactness_hamiltonian(seed):
    rng = np.random.default_rng(seed)
    for _, g in smp.metric_configurations(rng):
        h = smp.random_momentum(rng, g)
        a, b, c = (smp.random_metric_tangent(rng, g) for _ in range(3))
        r = smp.random_symmetric(rng, g.n_cells, g.base_dim)
        assert abs(M.fd_omega_exterior(g, h, a, b, c)) < 1e-6
        assert M.exactness_defect(g, h, a, b) < 1e-6
        assert M.hamiltonian_defect(r, g, h, a) < 1e-6


@pytest.mark.parametrize("exponent", [0.5, 1.0, 1.5])
def test_forms_consistent_for_any_density_exponent(exponent):
    rng = np.random.default_rng(13)
    for _, g in smp.metric_configurations(rng):
        h = smp.random_momentum(rng, g)
        a, b, c = (smp.random_metric_tangent(rng, g) for _ in range(3))
        r = smp.random_symmetric(rng, g.n_cells, g.base_dim)
        assert abs(M.fd_omega_exterior(g, h, a, b, c, exponent=exponent)) < 1e-6
        assert M.exactness_defect(g, h, a, b, exponent=exponent) < 1e-6
        assert M.hamiltonian_defect(r, g, h, a, exponent=exponent) < 1e-6


def test_richardson_halving_is_second_order():
    rng = np.random.default_rng(3)
    steps = [0.04, 0.02, 0.01, 0.005]
    for _, g in smp.metric_configurations(rng):
        h = smp.random_momentum(rng, g)
        a, b, c = (smp.random_metric_tangent(rng, g) for _ in range(3))
        for errs in ([M.exactness_defect(g, h, a, b, s) for s in steps],
                     [abs(M.fd_omega_exterior(g, h, a, b, c, s)) for s in steps]):
            np.testing.assert_allclose(richardson_ratio(errs), 4.0, rtol=0.05)


@given(seeds)
def test_index_summation(seed):
    rng = np.random.default_rng(seed)
    g = smp.random_metric(rng, 3)
    r, h = (smp.random_symmetric(rng, g.n_cells, 3) for _ in range(2))
    assert abs(M.functional_Fr(r, g, h) - M.functional_Fr_index(r, g, h)) < 1e-13


@given(seeds)
def test_nondegeneracy_witness(seed):
    rng = np.random.default_rng(seed)
    for _, g in smp.metric_configurations(rng):
        h = smp.random_momentum(rng, g)
        xi = smp.random_metric_tangent(rng, g)
        assert omega_metric(g, h, xi, M.nondegeneracy_witness(g, xi)) > 0
        only_l = MetricTangent(np.zeros_like(xi.k), xi.l)
        assert omega_metric(g, h, only_l, M.nondegeneracy_witness(g, only_l)) > 0


def test_riemannian_witness():
    rng = np.random.default_rng(4)
    g = smp.random_metric(rng, 3)
    h = smp.random_momentum(rng, g)
    xi = MetricTangent(smp.random_symmetric(rng, g.n_cells, 3), np.zeros((g.n_cells, 3, 3)))
    assert omega_metric(g, h, xi, M.riemannian_witness(xi)) > 0


# -- composed functionals ----------------------------------------------------


@given(seeds)
def test_composed_functionals(seed):
    rng = np.random.default_rng(seed)
    for _, g in smp.metric_configurations(rng):
        h = smp.random_momentum(rng, g)
        F, G, H = _metric_functionals(g)
        for A in (F, G, H):
            assert M.functional_defining_residual(A, g, h, smp.random_metric_tangent(rng, g)) < 1e-6
        assert M.functional_leibniz_residual(F, G, H, g, h) < 1e-10
        assert M.functional_jacobi_residual(F, G, H, g, h) < 1e-5


def test_composed_brackets_are_nontrivial():
    rng = np.random.default_rng(5)
    g = smp.random_metric(rng, 2)
    h = smp.random_momentum(rng, g)
    F, G, _ = _metric_functionals(g)
    assert abs(M.functional_bracket(F, G, g, h)) > 1e-3


def test_potential_field_matches_gradient():
    rng = np.random.default_rng(6)
    g = smp.random_metric(rng, 3)
    h = smp.random_momentum(rng, g)
    P = M.MetricFunctional("y0", (M.QuadraticPotential(smp.random_symmetric(rng, g.n_cells, 3)),),
                           cell_volume=g.cell_volume)
    assert np.max(np.abs(P.field(g, h).l)) > 0
    assert M.functional_defining_residual(P, g, h, smp.random_metric_tangent(rng, g)) < 1e-8


def test_unknown_outer_symbol():
    with pytest.raises(InvariantError):
        M.MetricFunctional("y0 + z", (np.ones((2, 1, 1)),))


# -- flows -------------------------------------------------------------------


def test_flow_translates_metric_and_conserves_Fr():
    rng = np.random.default_rng(7)
    g = smp.random_metric(rng, 2)
    h = smp.random_momentum(rng, g)
    r = 0.1 * smp.random_symmetric(rng, g.n_cells, 2)
    traj = M.flow_metric(r, g, h, 1.0, 50)
    np.testing.assert_allclose(traj.metrics[-1].cells, g.cells + r, atol=1e-12)
    F0 = M.functional_Fr(r, g, h)
    drift = max(abs(M.functional_Fr(r, gt, ht) - F0) for gt, ht in zip(traj.metrics, traj.momenta))
    assert drift < 1e-8
    s = smp.random_symmetric(rng, g.n_cells, 2)
    # the F_r commute, so every F_s is conserved too
    assert M.functional_Fr(s, traj.metrics[-1], traj.momenta[-1]) == pytest.approx(M.functional_Fr(s, g, h), abs=1e-8)


def test_flow_signature_breach():
    g = _scalar(1.0)
    with pytest.raises(SignatureBreach):
        M.flow_metric(-np.ones((1, 1, 1)), g, np.zeros((1, 1, 1)), 2.0, 10)


def test_flow_up_to_the_boundary():
    g = _scalar(1.0)
    traj = M.flow_metric(-np.ones((1, 1, 1)), g, np.zeros((1, 1, 1)), 0.99, 2)
    assert traj.halvings == 0
    assert traj.times[-1] == pytest.approx(0.99)
    assert traj.metrics[-1].cells[0, 0, 0] == pytest.approx(0.01)
