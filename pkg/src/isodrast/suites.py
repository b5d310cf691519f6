"""Named property suites run by ``isodrast verify``.

Each property draws its own generator from ``(seed, suite, property)`` so
results do not depend on execution order or on the thread count.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import flows, metrics, moment_map, pairings, poisson
from .ambient import HamiltonianFn, dictionary
from .errors import InvariantError, IsodrastError, UnknownSuite
from .loops import (
    LoopEmbedding,
    TangentVector,
    Weighting,
    moser_normalize,
    compose_inverse,
    reparametrize,
)
from . import sampling as smp


@dataclass
class SuiteConfig:
    seed: int = 0
    samples: int = 128
    fd_step: float = 1e-4
    cases: int = 10
    tolerances: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Property:
    name: str
    gate: float
    run: Callable[[np.random.Generator, SuiteConfig], float]


def _rng(cfg: SuiteConfig, suite: str, name: str) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, zlib.crc32(f"{suite}.{name}".encode())])


def _max(values) -> float:
    """Largest residual; a non-finite one is a failure, never silently skipped."""
    values = np.asarray(list(values), dtype=float)
    if values.size and not np.all(np.isfinite(values)):
        raise InvariantError("non-finite residual")
    return float(values.max(initial=0.0))


# ---------------------------------------------------------------------------
# pairings


def _modes(cfg) -> int:
    """Band limit for data that gets composed with diffeomorphisms; coarse grids alias otherwise."""
    return max(2, min(smp.MAX_MODE, cfg.samples // 12))


def _weighted_point(rng, cfg, half_dim=1, modes=smp.MAX_MODE):
    loop = smp.random_loop(rng, cfg.samples, half_dim, modes)
    return loop, smp.positive_weighting(rng, cfg.samples, modes)


def _p_antisymmetry(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        loop, eta = _weighted_point(rng, cfg)
        a, b = smp.exact_tangent(rng, loop), smp.exact_tangent(rng, loop)
        out.append(abs(pairings.omega_weighted(loop, eta, a, b).value + pairings.omega_weighted(loop, eta, b, a).value))
        out.append(abs(pairings.omega_donaldson(loop, a.X, b.X).value + pairings.omega_donaldson(loop, b.X, a.X).value))
        chi = smp.zero_mass_weighting(rng, cfg.samples)
        out.append(abs(pairings.omega_momentum(loop, chi, a, b).value + pairings.omega_momentum(loop, chi, b, a).value))
    return _max(out)


def _p_bilinearity(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        loop, eta = _weighted_point(rng, cfg)
        a, a2, b = (smp.exact_tangent(rng, loop) for _ in range(3))
        s, t = rng.normal(size=2)
        lhs = pairings.omega_weighted(loop, eta, s * a + t * a2, b, tol=1e-8).value
        rhs = s * pairings.omega_weighted(loop, eta, a, b).value + t * pairings.omega_weighted(loop, eta, a2, b).value
        out.append(abs(lhs - rhs))
    return _max(out)


def _p_basicness(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        loop, eta = _weighted_point(rng, cfg)
        a, b = smp.exact_tangent(rng, loop), smp.exact_tangent(rng, loop)
        shift = pairings.tangential_shift(loop, eta, smp.band_limited(rng, cfg.samples, mean=True))
        base = pairings.omega_weighted(loop, eta, a, b).value
        out.append(abs(pairings.omega_weighted(loop, eta, a, b + shift).value - base))
    return _max(out)


def _p_weighted_closed(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        loop, eta = _weighted_point(rng, cfg)
        xs = [smp.free_tangent(rng, loop) for _ in range(3)]
        out.append(abs(pairings.exterior_derivative_weighted(loop, eta, *xs, step=cfg.fd_step)))
    return _max(out)


def _p_donaldson_closed(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        loop, eta = _weighted_point(rng, cfg)
        xs = [pairings.as_direction(smp.free_tangent(rng, loop)) for _ in range(3)]
        out.append(abs(pairings.fd_exterior_derivative_2form(
            pairings.donaldson_chart_form, pairings.as_chart(loop, eta), *xs, cfg.fd_step)))
    return _max(out)


def _p_momentum_exact(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        loop = smp.random_loop(rng, cfg.samples)
        chi = smp.zero_mass_weighting(rng, cfg.samples)
        a, b = smp.free_tangent(rng, loop), smp.free_tangent(rng, loop)
        out.append(pairings.exactness_defect_momentum(loop, chi, a, b, cfg.fd_step))
    return _max(out)


def _p_reparametrization(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        m = _modes(cfg)
        loop, eta = _weighted_point(rng, cfg, modes=m)
        a, b = smp.exact_tangent(rng, loop, m), smp.exact_tangent(rng, loop, m)
        phi = smp.mild_diffeo(rng, cfg.samples, min(5, m), 0.3 * min(1.0, cfg.samples / 128))
        loop2, eta2, (a2, b2) = reparametrize(loop, eta, (a, b), phi)
        v1 = pairings.omega_weighted(loop, eta, a, b).value
        v2 = pairings.omega_weighted(loop2, eta2, a2, b2, tol=1e-8).value
        out.append(abs(v1 - v2))
    return _max(out)


def reduction_defect(loop: LoopEmbedding, eta: Weighting, X1, X2) -> float:
    """``|Omega(i, eta)((X1, 0), (X2, 0)) - Omega_red(i o a^-1)([X1 o a^-1], [X2 o a^-1])|``."""
    zero = np.zeros(loop.N)
    lhs = pairings.omega_weighted(loop, eta, TangentVector(X1, zero), TangentVector(X2, zero)).value
    moved, a = moser_normalize(loop, eta)
    s = a.inverse()
    Y1, Y2 = compose_inverse(X1, a, s), compose_inverse(X2, a, s)
    rhs = pairings.omega_reduced(moved, None, Y1, Y2, tol=1e-8).value
    return abs(lhs - rhs)


def _p_reduction(rng, cfg):
    out = []
    for k in range(cfg.cases):
        m = _modes(cfg)
        loop, eta = _weighted_point(rng, cfg, 1 + k % 2, m)
        out.append(reduction_defect(loop, eta, smp.exact_field(rng, loop, m), smp.exact_field(rng, loop, m)))
    return _max(out)


def _p_moser(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        eta = smp.positive_weighting(rng, cfg.samples)
        loop = smp.random_loop(rng, cfg.samples)
        _, a = moser_normalize(loop, eta)
        out.append(float(np.max(np.abs(a.pullback_reference() - eta.samples))))
    return _max(out)


def _p_fourier(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        h1, h2 = (smp.band_limited(rng, cfg.samples, mean=True) for _ in range(2))
        t1, t2 = (smp.zero_mass_density(rng, cfg.samples) for _ in range(2))
        out.append(pairings.omega_fourier(h1, t1, h2, t2).residuals["parseval_defect"])
    return _max(out)


def _p_tangential_expression(rng, cfg):
    out = []
    for _ in range(cfg.cases):
        loop = smp.random_loop(rng, cfg.samples)
        X1, X2 = smp.exact_field(rng, loop), smp.exact_field(rng, loop)
        out.append(abs(pairings.reduced_form_tangential(loop, X1, X2) - pairings.omega_reduced(loop, None, X1, X2).value))
    return _max(out)


# ---------------------------------------------------------------------------
# flows


def _hamiltonians(half_dim=1):
    return dictionary(half_dim, max_degree=3, trig=True)


def _f_drift(rng, cfg):
    out = []
    hams = flows.standard_hamiltonians()
    for k in range(min(cfg.cases, len(hams))):
        loop = smp.random_loop(rng, cfg.samples)
        out.append(flows.isodrast_drift(flows.flow_loop(loop, hams[k], 1.0, 200)))
    return _max(out)


def _f_circle_action(rng, cfg):
    return abs(flows.action_integral(LoopEmbedding.circle(cfg.samples)) + np.pi)


def _f_harmonic_return(rng, cfg):
    loop = LoopEmbedding.circle(cfg.samples)
    H = HamiltonianFn.from_expr("(q**2 + p**2)/2")
    end = flows.flow_loop(loop, H, 2 * np.pi, 2000).final
    return float(np.max(np.abs(end.samples - loop.samples)))


def _f_leaf_tangency(rng, cfg):
    out = []
    for H in _hamiltonians():
        loop = smp.random_loop(rng, cfg.samples)
        out.append(flows.exactness_residual(loop, H.vector_field(loop.samples)))
    return _max(out)


# ---------------------------------------------------------------------------
# moment map


def _m_condition(rng, cfg):
    out = []
    fs = dictionary(1, max_degree=3, trig=True)
    for k in range(cfg.cases):
        loop, eta = _weighted_point(rng, cfg)
        xi = smp.exact_tangent(rng, loop)
        out.append(moment_map.moment_condition_residual(loop, eta, fs[k % len(fs)], xi, cfg.fd_step))
    return _max(out)


def _m_equivariance(rng, cfg):
    out = []
    fs = dictionary(1, max_degree=3, trig=False)
    hs = flows.standard_hamiltonians()
    for k in range(min(cfg.cases, 5)):
        loop, eta = _weighted_point(rng, cfg)
        out.append(moment_map.equivariance_residual(loop, eta, fs[k % len(fs)], hs[(3 * k + 1) % len(hs)], 0.5, 100, 200))
    return _max(out)


def _m_kks(rng, cfg):
    out = []
    fs = dictionary(1, max_degree=3, trig=True)
    for k in range(cfg.cases):
        loop, eta = _weighted_point(rng, cfg)
        out.append(moment_map.kks_defect(loop, eta, fs[k % len(fs)], fs[(k + 3) % len(fs)]))
    return _max(out)


# ---------------------------------------------------------------------------
# poisson


def _functionals():
    F = poisson.IntegralFunctional.from_spec({"outer": "y0*y1 + y0", "inner": ["q", "p**2"]})
    G = poisson.IntegralFunctional.from_spec({"outer": "y0**2", "inner": ["q*p"]})
    H = poisson.IntegralFunctional.from_spec({"outer": "sin(y0) + y1", "inner": ["q**2 + p", "cos(q)"]})
    return F, G, H


def _q_defining(rng, cfg):
    out = []
    for F in _functionals():
        loop = smp.random_loop(rng, cfg.samples)
        X = smp.random_field(rng, cfg.samples, 2)
        out.append(poisson.defining_property_residual(F, loop, X, cfg.fd_step))
    return _max(out)


def _q_leibniz(rng, cfg):
    F, G, H = _functionals()
    return _max(poisson.leibniz_residual(F, G, H, smp.random_loop(rng, cfg.samples)) for _ in range(3))


def _q_jacobi(rng, cfg):
    F, G, H = _functionals()
    return _max(poisson.jacobi_residual(F, G, H, smp.random_loop(rng, cfg.samples), cfg.fd_step) for _ in range(3))


def _q_tangency(rng, cfg):
    out = []
    for F in _functionals():
        loop = smp.random_loop(rng, cfg.samples)
        out.append(flows.exactness_residual(loop, poisson.hamiltonian_field_of(F, loop)))
    return _max(out)


def _q_coordinate(rng, cfg):
    Fq, Fp = poisson.coordinate_functionals(1)
    return abs(poisson.bracket(Fq, Fp, smp.random_loop(rng, cfg.samples)) + 1.0)


# ---------------------------------------------------------------------------
# metrics


def _metric_points(rng):
    for label, g in smp.metric_configurations(rng):
        yield label, g, smp.random_momentum(rng, g)


def _g_antisymmetry(rng, cfg):
    out = []
    for _, g, h in _metric_points(rng):
        a, b = smp.random_metric_tangent(rng, g), smp.random_metric_tangent(rng, g)
        out.append(abs(metrics.omega_metric(g, h, a, b) + metrics.omega_metric(g, h, b, a)))
    return _max(out)


def _g_closed(rng, cfg):
    out = []
    for _, g, h in _metric_points(rng):
        xs = [smp.random_metric_tangent(rng, g) for _ in range(3)]
        out.append(abs(metrics.fd_omega_exterior(g, h, *xs, step=cfg.fd_step)))
    return _max(out)


def _g_exact(rng, cfg):
    out = []
    for _, g, h in _metric_points(rng):
        a, b = smp.random_metric_tangent(rng, g), smp.random_metric_tangent(rng, g)
        out.append(metrics.exactness_defect(g, h, a, b, cfg.fd_step))
    return _max(out)


def _g_hamiltonian(rng, cfg):
    out = []
    for _, g, h in _metric_points(rng):
        r = smp.random_symmetric(rng, g.n_cells, g.base_dim)
        out.append(metrics.hamiltonian_defect(r, g, h, smp.random_metric_tangent(rng, g), cfg.fd_step))
    return _max(out)


def _g_identity(rng, cfg):
    out = []
    for d in (1, 2, 3, 4):
        eye = np.eye(d)[None]
        xi = metrics.xi_Fr(eye, eye, eye)
        out.append(float(np.max(np.abs(xi.k - eye))))
        out.append(float(np.max(np.abs(xi.l - (2 - d) * eye))))
    return _max(out)


def _g_index(rng, cfg):
    g = smp.random_metric(rng, 3, (3, 0))
    r, h = smp.random_symmetric(rng, g.n_cells, 3), smp.random_symmetric(rng, g.n_cells, 3)
    return abs(metrics.functional_Fr(r, g, h) - metrics.functional_Fr_index(r, g, h))


def _metric_functionals(g):
    rng = np.random.default_rng(0)
    rs = [smp.random_symmetric(rng, g.n_cells, g.base_dim) for _ in range(3)]
    cv = g.cell_volume
    pot = metrics.QuadraticPotential(smp.random_symmetric(rng, g.n_cells, g.base_dim, 0.5))
    F = metrics.MetricFunctional("y0*y1", (rs[0], pot), cell_volume=cv)
    G = metrics.MetricFunctional("y0**2 + y0", (rs[2],), cell_volume=cv)
    H = metrics.MetricFunctional("sin(y0) + y1", (rs[0] + rs[2], pot), cell_volume=cv)
    return F, G, H


def _g_defining(rng, cfg):
    out = []
    for _, g, h in _metric_points(rng):
        for F in _metric_functionals(g):
            out.append(metrics.functional_defining_residual(F, g, h, smp.random_metric_tangent(rng, g), cfg.fd_step))
    return _max(out)


def _g_leibniz(rng, cfg):
    out = []
    for _, g, h in _metric_points(rng):
        out.append(metrics.functional_leibniz_residual(*_metric_functionals(g), g, h))
    return _max(out)


def _g_jacobi(rng, cfg):
    out = []
    for _, g, h in _metric_points(rng):
        out.append(metrics.functional_jacobi_residual(*_metric_functionals(g), g, h, cfg.fd_step))
    return _max(out)


# ---------------------------------------------------------------------------
# registry


SUITES: dict[str, list[Property]] = {
    "pairings": [
        Property("antisymmetry", 1e-12, _p_antisymmetry),
        Property("bilinearity", 1e-12, _p_bilinearity),
        Property("basicness", 1e-9, _p_basicness),
        Property("weighted_closedness", 1e-6, _p_weighted_closed),
        Property("donaldson_closedness", 1e-6, _p_donaldson_closed),
        Property("momentum_exactness", 1e-6, _p_momentum_exact),
        Property("reparametrization_invariance", 1e-8, _p_reparametrization),
        Property("reduction_equivalence", 1e-8, _p_reduction),
        Property("moser_roundtrip", 1e-8, _p_moser),
        Property("fourier_parseval", 1e-12, _p_fourier),
        Property("reduced_tangential_form", 1e-9, _p_tangential_expression),
    ],
    "flows": [
        Property("action_drift", 1e-6, _f_drift),
        Property("circle_action", 1e-10, _f_circle_action),
        Property("harmonic_return", 1e-8, _f_harmonic_return),
        Property("hamiltonian_leaf_tangency", 1e-10, _f_leaf_tangency),
    ],
    "moment": [
        Property("moment_condition", 1e-6, _m_condition),
        Property("equivariance", 1e-6, _m_equivariance),
        Property("kks_pullback", 1e-12, _m_kks),
    ],
    "poisson": [
        Property("defining_property", 1e-6, _q_defining),
        Property("leibniz", 1e-10, _q_leibniz),
        Property("jacobi", 1e-5, _q_jacobi),
        Property("leaf_tangency", 1e-10, _q_tangency),
        Property("coordinate_bracket", 1e-12, _q_coordinate),
    ],
    "metrics": [
        Property("antisymmetry", 1e-12, _g_antisymmetry),
        Property("closedness", 1e-6, _g_closed),
        Property("exactness", 1e-6, _g_exact),
        Property("hamiltonian_field", 1e-6, _g_hamiltonian),
        Property("identity_case", 1e-14, _g_identity),
        Property("index_summation", 1e-13, _g_index),
        Property("defining_property", 1e-6, _g_defining),
        Property("leibniz", 1e-10, _g_leibniz),
        Property("jacobi", 1e-5, _g_jacobi),
    ],
}

SUITE_NAMES = tuple(SUITES) + ("all",)


def property_names(suite: str) -> list[str]:
    suites = list(SUITES) if suite == "all" else [suite]
    return [f"{s}.{p.name}" for s in suites for p in SUITES[s]]


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("ISODRAST_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(suite: str, cfg: SuiteConfig) -> list[dict]:
    """Evaluate every property of ``suite`` (or of all suites); ordered results."""
    if suite not in SUITE_NAMES:
        raise UnknownSuite(suite)
    names = list(SUITES) if suite == "all" else [suite]
    jobs = [(s, p) for s in names for p in SUITES[s]]

    def evaluate(job):
        s, p = job
        full = f"{s}.{p.name}"
        gate = float(cfg.tolerances.get(full, cfg.tolerances.get(p.name, p.gate)))
        try:
            residual = float(p.run(_rng(cfg, s, p.name), cfg))
        except IsodrastError as exc:
            return {"name": full, "residual": None, "gate": gate, "pass": False, "error": str(exc)}
        return {"name": full, "residual": residual, "gate": gate, "pass": bool(residual < gate)}

    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        return list(pool.map(evaluate, jobs))
