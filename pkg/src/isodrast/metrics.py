"""Momentum-weighted pseudo-Riemannian metrics on a discretized flat torus.

Fields are piecewise constant on a uniform grid of ``[0, 1)^d``. Every
quantity here is pointwise algebra in g, h, k, l integrated against a
density, so the per-cell representation is exact.

The density entering the phase-space forms is ``mu_s(g) = |det g|^s`` per
unit volume. Its derivative is ``s Tr(g^-1 k) mu_s``, and the 2-form and
Hamiltonian fields below carry that factor s. The default ``s = 1`` keeps
the form and the fields free of extra factors; ``s = 1/2`` is the
Riemannian volume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import sympy as sp

from .errors import DegenerateMetric, InvariantError, SignatureBreach

EPS_DET = 1e-10
SYMMETRY_TOL = 1e-14
DEFAULT_EXPONENT = 1.0


def _as_cells(a, d: Optional[int] = None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise InvariantError(f"expected (cells, d, d) array, got shape {a.shape}")
    if d is not None and a.shape[1] != d:
        raise InvariantError(f"expected {d}x{d} cells, got {a.shape[1]}x{a.shape[2]}")
    return a


def _check_symmetric(a: np.ndarray, name: str, tol: float = SYMMETRY_TOL) -> None:
    defect = np.max(np.abs(a - np.swapaxes(a, 1, 2)), initial=0.0)
    if defect > tol:
        raise InvariantError(f"{name} not symmetric (defect {defect:.3g})")


def signature_of(cells: np.ndarray) -> np.ndarray:
    """Per-cell ``(pos, neg)`` eigenvalue counts, shape (C, 2)."""
    ev = np.linalg.eigvalsh(cells)
    return np.stack([(ev > 0).sum(axis=1), (ev < 0).sum(axis=1)], axis=1)


@dataclass(frozen=True, eq=False)
class MetricField:
    """Per-cell symmetric matrices of fixed signature on a uniform grid."""

    cells: np.ndarray
    grid: tuple
    signature: tuple
    eps_det: float = EPS_DET

    def __post_init__(self):
        cells = _as_cells(self.cells)
        grid = tuple(int(n) for n in self.grid)
        d = cells.shape[1]
        if len(grid) != d or any(n < 1 for n in grid):
            raise InvariantError(f"grid {grid} does not match base dimension {d}")
        if int(np.prod(grid)) != cells.shape[0]:
            raise InvariantError(f"grid {grid} has {int(np.prod(grid))} cells, got {cells.shape[0]}")
        _check_symmetric(cells, "metric")
        sig = tuple(int(s) for s in self.signature)
        if len(sig) != 2 or sum(sig) != d:
            raise InvariantError(f"signature {sig} incompatible with dimension {d}")
        dets = np.abs(np.linalg.det(cells))
        if np.any(dets <= self.eps_det):
            raise DegenerateMetric(f"|det g| = {dets.min():.3g} <= {self.eps_det:g} in cell {int(np.argmin(dets))}")
        found = signature_of(cells)
        bad = np.any(found != np.array(sig), axis=1)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise SignatureBreach(f"cell {k} has signature {tuple(int(n) for n in found[k])}, expected {sig}")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "signature", sig)

    @property
    def base_dim(self) -> int:
        return self.cells.shape[1]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def cell_volume(self) -> float:
        return 1.0 / float(np.prod(self.grid))

    def replace(self, cells) -> "MetricField":
        return MetricField(cells, self.grid, self.signature, self.eps_det)

    @classmethod
    def constant(cls, matrix, grid: Sequence[int], signature=None) -> "MetricField":
        m = np.asarray(matrix, dtype=float)
        if signature is None:
            signature = tuple(signature_of(m[None])[0])
        return cls(np.broadcast_to(m, (int(np.prod(grid)),) + m.shape).copy(), tuple(grid), signature)


@dataclass(frozen=True, eq=False)
class MomentumField:
    """Per-cell symmetric matrices h."""

    cells: np.ndarray

    def __post_init__(self):
        cells = _as_cells(self.cells)
        _check_symmetric(cells, "momentum")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def zeros_like(cls, g: MetricField) -> "MomentumField":
        return cls(np.zeros_like(g.cells))


@dataclass(frozen=True, eq=False)
class MetricTangent:
    """A tangent vector ``(k, l)`` at a point of the phase space."""

    k: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        k, l = _as_cells(self.k), _as_cells(self.l)
        if k.shape != l.shape:
            raise InvariantError(f"k and l shapes differ: {k.shape} vs {l.shape}")
        # tolerance scaled for fields built from products of matrices
        tol = 1e-12 * max(1.0, float(np.max(np.abs(k), initial=0.0)), float(np.max(np.abs(l), initial=0.0)))
        _check_symmetric(k, "k", tol)
        _check_symmetric(l, "l", tol)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)

    def __add__(self, other):
        return MetricTangent(self.k + other.k, self.l + other.l)

    def __sub__(self, other):
        return MetricTangent(self.k - other.k, self.l - other.l)

    # keep numpy scalars from broadcasting over the dataclass
    __array_ufunc__ = None

    def __mul__(self, c: float):
        return MetricTangent(c * self.k, c * self.l)

    __rmul__ = __mul__

    def __neg__(self):
        return MetricTangent(-self.k, -self.l)


# ---------------------------------------------------------------------------
# pointwise algebra


def _cells(x) -> np.ndarray:
    if isinstance(x, (MetricField, MomentumField)):
        return x.cells
    return _as_cells(x)


def _inverse(g: np.ndarray, eps_det: float = EPS_DET) -> np.ndarray:
    dets = np.linalg.det(g)
    if np.any(np.abs(dets) <= eps_det):
        raise DegenerateMetric(f"|det g| = {np.abs(dets).min():.3g} <= {eps_det:g}")
    return np.linalg.inv(g)


def _cell_volume(g, cell_volume: Optional[float]) -> float:
    if cell_volume is not None:
        return cell_volume
    return g.cell_volume if isinstance(g, MetricField) else 1.0


def _tr(a):
    return np.trace(a, axis1=1, axis2=2)


def _tr2(gi, a, b):
    """Per-cell ``Tr(g^-1 a g^-1 b)``."""
    return np.einsum("cjr,crq,cqp,cpj->c", gi, a, gi, b)


def volume_density(g, cell_volume: Optional[float] = None, eps_det: float = EPS_DET) -> np.ndarray:
    """Per-cell Riemannian volume ``sqrt|det g|`` times the cell volume."""
    cells = _cells(g)
    dets = np.abs(np.linalg.det(cells))
    if np.any(dets <= eps_det):
        raise DegenerateMetric(f"|det g| = {dets.min():.3g} <= {eps_det:g}")
    return np.sqrt(dets) * _cell_volume(g, cell_volume)


def phase_density(g, exponent: float = DEFAULT_EXPONENT, cell_volume: Optional[float] = None,
                  eps_det: float = EPS_DET) -> np.ndarray:
    """Per-cell ``|det g|^s`` times the cell volume."""
    cells = _cells(g)
    dets = np.abs(np.linalg.det(cells))
    if np.any(dets <= eps_det):
        raise DegenerateMetric(f"|det g| = {dets.min():.3g} <= {eps_det:g}")
    return dets ** exponent * _cell_volume(g, cell_volume)


def _tangent(xi):
    if isinstance(xi, MetricTangent):
        return xi.k, xi.l
    k, l = xi
    return _as_cells(k), _as_cells(l)


def theta_metric(g, h, xi, exponent: float = DEFAULT_EXPONENT, cell_volume: Optional[float] = None) -> float:
    """``Theta(k, l) = sum_cells Tr(g^-1 k g^-1 h) mu``; l is ignored."""
    gc, hc = _cells(g), _cells(h)
    k, _ = _tangent(xi)
    gi = _inverse(gc)
    return float(np.sum(_tr2(gi, k, hc) * phase_density(g, exponent, cell_volume)))


def omega_metric(g, h, xi1, xi2, exponent: float = DEFAULT_EXPONENT, cell_volume: Optional[float] = None) -> float:
    """``Omega = -d Theta``.

    ``sum_cells [s (Tr(g^-1 k1 g^-1 h) Tr(g^-1 k2) - Tr(g^-1 k2 g^-1 h) Tr(g^-1 k1))
    + Tr(g^-1 k1 g^-1 l2) - Tr(g^-1 k2 g^-1 l1)] mu``.
    """
    gc, hc = _cells(g), _cells(h)
    k1, l1 = _tangent(xi1)
    k2, l2 = _tangent(xi2)
    gi = _inverse(gc)
    tk1, tk2 = _tr(gi @ k1), _tr(gi @ k2)
    density = exponent * (_tr2(gi, k1, hc) * tk2 - _tr2(gi, k2, hc) * tk1) + _tr2(gi, k1, l2) - _tr2(gi, k2, l1)
    return float(np.sum(density * phase_density(g, exponent, cell_volume)))


def functional_Fr(r, g, h, exponent: float = DEFAULT_EXPONENT, cell_volume: Optional[float] = None) -> float:
    """``F_r(g, h) = sum_cells Tr(g^-1 r g^-1 h) mu``."""
    gi = _inverse(_cells(g))
    return float(np.sum(_tr2(gi, _cells(r), _cells(h)) * phase_density(g, exponent, cell_volume)))


def xi_Fr(r, g, h, exponent: float = DEFAULT_EXPONENT) -> MetricTangent:
    """Hamiltonian field of F_r: ``(r, r g^-1 h + h g^-1 r - s Tr(g^-1 r) h)``."""
    rc, gc, hc = _cells(r), _cells(g), _cells(h)
    gi = _inverse(gc)
    a = rc @ gi @ hc
    l = a + np.swapaxes(a, 1, 2) - exponent * _tr(gi @ rc)[:, None, None] * hc
    return MetricTangent(np.broadcast_to(rc, gc.shape).copy(), l)


def metric_bracket(r, s, g, h, exponent: float = DEFAULT_EXPONENT, cell_volume: Optional[float] = None) -> float:
    """``{F_r, F_s} = -Omega(xi_{F_r}, xi_{F_s})``."""
    return -omega_metric(g, h, xi_Fr(r, g, h, exponent), xi_Fr(s, g, h, exponent), exponent, cell_volume)


def index_trace(g, k, h) -> np.ndarray:
    """``g^{jr} k_{rq} g^{qp} h_{pj}`` by explicit loops; an oracle for the traces."""
    gi = np.linalg.inv(_cells(g))
    k, h = _cells(k), _cells(h)
    C, d, _ = gi.shape
    out = np.zeros(C)
    for c in range(C):
        total = 0.0
        for j in range(d):
            for r_ in range(d):
                for q in range(d):
                    for p in range(d):
                        total += gi[c, j, r_] * k[c, r_, q] * gi[c, q, p] * h[c, p, j]
        out[c] = total
    return out


def functional_Fr_index(r, g, h, exponent: float = DEFAULT_EXPONENT, cell_volume: Optional[float] = None) -> float:
    return float(np.sum(index_trace(g, r, h) * phase_density(g, exponent, cell_volume)))


# ---------------------------------------------------------------------------
# finite differences on the (g, h) chart


def _fd(fn, step: float) -> float:
    return (fn(step) - fn(-step)) / (2 * step)


def _moved(g, h, xi, s):
    k, l = _tangent(xi)
    return _cells(g) + s * k, _cells(h) + s * l


def fd_theta_exterior(g, h, xi1, xi2, step: float = 1e-4, exponent: float = DEFAULT_EXPONENT,
                      cell_volume: Optional[float] = None) -> float:
    """``d Theta(xi1, xi2)`` with constant extensions."""
    cv = _cell_volume(g, cell_volume)

    def along(a, b):
        return _fd(lambda s: theta_metric(*_moved(g, h, a, s), b, exponent, cv), step)

    return along(xi1, xi2) - along(xi2, xi1)


def fd_omega_exterior(g, h, xi0, xi1, xi2, step: float = 1e-4, exponent: float = DEFAULT_EXPONENT,
                      cell_volume: Optional[float] = None) -> float:
    """Cyclic ``d Omega(xi0, xi1, xi2)``; zero for a closed form."""
    cv = _cell_volume(g, cell_volume)

    def along(a, b, c):
        return _fd(lambda s: omega_metric(*_moved(g, h, a, s), b, c, exponent, cv), step)

    return along(xi0, xi1, xi2) - along(xi1, xi0, xi2) + along(xi2, xi0, xi1)


def exactness_defect(g, h, xi1, xi2, step: float = 1e-4, exponent: float = DEFAULT_EXPONENT,
                     cell_volume: Optional[float] = None) -> float:
    """``|d Theta(xi1, xi2) + Omega(xi1, xi2)|``."""
    cv = _cell_volume(g, cell_volume)
    return abs(fd_theta_exterior(g, h, xi1, xi2, step, exponent, cv) + omega_metric(g, h, xi1, xi2, exponent, cv))


def hamiltonian_defect(r, g, h, xi, step: float = 1e-4, exponent: float = DEFAULT_EXPONENT,
                       cell_volume: Optional[float] = None) -> float:
    """``|dF_r(xi) - Omega(xi_{F_r}, xi)|`` with dF_r by central differences."""
    cv = _cell_volume(g, cell_volume)
    dF = _fd(lambda s: functional_Fr(r, *_moved(g, h, xi, s), exponent, cv), step)
    return abs(dF - omega_metric(g, h, xi_Fr(r, g, h, exponent), xi, exponent, cv))


# ---------------------------------------------------------------------------
# composed functionals


@dataclass(frozen=True, eq=False)
class QuadraticPotential:
    """``P_c(g) = sum_cells (1/2) Tr(c g c g) * cell volume``, a function of g alone.

    Its Hamiltonian field is ``(0, -g (c g c) g cv / mu)``. Unlike the
    ``F_r``, which Poisson-commute among themselves, these give brackets that
    depend on the base point.
    """

    c: np.ndarray

    def __post_init__(self):
        c = _as_cells(self.c)
        _check_symmetric(c, "potential")
        object.__setattr__(self, "c", c)

    def value(self, g, h, exponent, cell_volume) -> float:
        gc = _cells(g)
        return float(np.sum(0.5 * _tr(self.c @ gc @ self.c @ gc)) * cell_volume)

    def field(self, g, h, exponent, cell_volume) -> MetricTangent:
        gc = _cells(g)
        scale = cell_volume / phase_density(gc, exponent, cell_volume)
        l = -(gc @ self.c @ gc @ self.c @ gc) * scale[:, None, None]
        return MetricTangent(np.zeros_like(gc), (l + np.swapaxes(l, 1, 2)) / 2)


def _component_value(comp, g, h, exponent, cell_volume):
    if isinstance(comp, QuadraticPotential):
        return comp.value(g, h, exponent, cell_volume)
    return functional_Fr(comp, g, h, exponent, cell_volume)


def _component_field(comp, g, h, exponent, cell_volume):
    if isinstance(comp, QuadraticPotential):
        return comp.field(g, h, exponent, cell_volume)
    return xi_Fr(comp, g, h, exponent)


@dataclass(frozen=True, eq=False)
class MetricFunctional:
    """``F(g, h) = A(F_{r_1}(g, h), ..., F_{r_m}(g, h))`` with A a sympy expression in y0..y{m-1}.

    A component may also be a :class:`QuadraticPotential`.
    """

    outer: sp.Expr
    sections: tuple
    exponent: float = DEFAULT_EXPONENT
    cell_volume: float = 1.0

    def __post_init__(self):
        syms = [sp.Symbol(f"y{j}", real=True) for j in range(len(self.sections))]
        names = {str(y): y for y in syms}
        expr = sp.sympify(self.outer, locals=names)
        expr = expr.subs({sp.Symbol(n): y for n, y in names.items()}, simultaneous=True)
        extra = {str(f) for f in expr.free_symbols} - set(names)
        if extra:
            raise InvariantError(f"outer map uses unknown symbols {sorted(extra)}")
        comps = tuple(r if isinstance(r, QuadraticPotential) else _as_cells(r) for r in self.sections)
        object.__setattr__(self, "outer", expr)
        object.__setattr__(self, "sections", comps)
        object.__setattr__(self, "_value", sp.lambdify([syms], expr, "numpy"))
        object.__setattr__(self, "_grad", sp.lambdify([syms], [sp.diff(expr, y) for y in syms], "numpy"))

    def inputs(self, g, h) -> np.ndarray:
        return np.array([_component_value(r, g, h, self.exponent, self.cell_volume) for r in self.sections])

    def __call__(self, g, h) -> float:
        return float(self._value(list(self.inputs(g, h))))

    def field(self, g, h) -> MetricTangent:
        """``v_F = sum_j dA/dy_j xi_j`` with xi_j the field of the j-th component."""
        coeffs = np.asarray(self._grad(list(self.inputs(g, h))), dtype=float)
        total = None
        for c, r in zip(coeffs, self.sections):
            term = _component_field(r, g, h, self.exponent, self.cell_volume) * float(c)
            total = term if total is None else total + term
        return total

    def __mul__(self, other: "MetricFunctional") -> "MetricFunctional":
        return _combine(self, other, sp.Mul)

    def __add__(self, other: "MetricFunctional") -> "MetricFunctional":
        return _combine(self, other, sp.Add)


def _combine(F: MetricFunctional, G: MetricFunctional, op) -> MetricFunctional:
    m, k = len(F.sections), len(G.sections)
    new = [sp.Symbol(f"y{j}", real=True) for j in range(m + k)]
    a = F.outer.subs({sp.Symbol(f"y{j}", real=True): new[j] for j in range(m)}, simultaneous=True)
    b = G.outer.subs({sp.Symbol(f"y{j}", real=True): new[m + j] for j in range(k)}, simultaneous=True)
    return MetricFunctional(op(a, b), F.sections + G.sections, F.exponent, F.cell_volume)


def functional_bracket(F: MetricFunctional, G: MetricFunctional, g, h) -> float:
    """``{F, G} = -Omega(v_F, v_G)``."""
    return -omega_metric(g, h, F.field(g, h), G.field(g, h), F.exponent, F.cell_volume)


def functional_defining_residual(F: MetricFunctional, g, h, xi, step: float = 1e-4) -> float:
    """``|dF(xi) - Omega(v_F, xi)|`` with dF by Richardson-extrapolated central differences."""
    fn = lambda s: F(*_moved(g, h, xi, s))
    dF = (4 * _fd(fn, step / 2) - _fd(fn, step)) / 3
    return abs(dF - omega_metric(g, h, F.field(g, h), xi, F.exponent, F.cell_volume))


def functional_leibniz_residual(F, G, H, g, h) -> float:
    return abs(
        functional_bracket(F * G, H, g, h) - F(g, h) * functional_bracket(G, H, g, h)
        - functional_bracket(F, H, g, h) * G(g, h)
    )


def functional_jacobi_residual(F, G, H, g, h, step: float = 1e-4) -> float:
    """Cyclic sum of ``{A, {B, C}}``, each the FD derivative of the inner bracket along v_A.

    The derivative is Richardson-extrapolated central differences, O(step^4).
    """

    def nested(A, B, C):
        v = A.field(g, h)
        fn = lambda s: functional_bracket(B, C, *_moved(g, h, v, s))
        return (4 * _fd(fn, step / 2) - _fd(fn, step)) / 3

    return abs(nested(F, G, H) + nested(G, H, F) + nested(H, F, G))


# ---------------------------------------------------------------------------
# weak nondegeneracy


def nondegeneracy_witness(g, xi1) -> MetricTangent:
    """A tangent ``xi2`` with ``Omega(xi1, xi2) > 0`` whenever ``xi1 != 0``.

    For ``k1 != 0`` take ``k2 = 0, l2 = g k1 g`` (``l2 = k1`` is also positive for
    Riemannian g); the pairing is ``sum Tr(k1^2) mu``. For ``k1 = 0`` take
    ``k2 = -g l1 g``.
    """
    gc = _cells(g)
    k1, l1 = _tangent(xi1)
    if np.any(k1 != 0.0):
        return MetricTangent(np.zeros_like(k1), gc @ k1 @ gc)
    return MetricTangent(-(gc @ l1 @ gc), np.zeros_like(l1))


def riemannian_witness(xi1) -> MetricTangent:
    k1, _ = _tangent(xi1)
    return MetricTangent(np.zeros_like(k1), k1.copy())


# ---------------------------------------------------------------------------
# flows


@dataclass
class MetricTrajectory:
    times: list = field(default_factory=list)
    metrics: list = field(default_factory=list)
    momenta: list = field(default_factory=list)
    halvings: int = 0


def flow_metric(r, g: MetricField, h, T: float, steps: int, exponent: float = DEFAULT_EXPONENT,
                min_dt: Optional[float] = None) -> MetricTrajectory:
    """RK4 integration of ``xi_{F_r}`` with a signature guard.

    A step whose endpoint (or any stage point) leaves the signature class is
    retried with half the step. Once the step falls below ``min_dt`` the
    breach is reported as :class:`SignatureBreach`.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rc = _cells(r)
    sig = np.array(g.signature)
    dt0 = T / steps
    min_dt = abs(dt0) * 2.0 ** -20 if min_dt is None else min_dt

    def rhs(gc, hc):
        xi = xi_Fr(rc, gc, hc, exponent)
        return xi.k, xi.l

    def admissible(gc):
        if np.any(np.abs(np.linalg.det(gc)) <= g.eps_det):
            return False
        return bool(np.all(signature_of(gc) == sig))

    gc, hc = g.cells.copy(), _cells(h).copy()
    out = MetricTrajectory([0.0], [g], [MomentumField(hc)])
    t, target = 0.0, T
    dt = dt0
    while (target - t) * np.sign(T) > 1e-15 * max(1.0, abs(T)):
        dt = np.sign(T) * min(abs(dt), abs(target - t))
        stage_g = [gc, gc + dt / 2 * rc, gc + dt * rc]
        if not all(admissible(s) for s in stage_g):
            dt = dt / 2
            out.halvings += 1
            if abs(dt) < min_dt:
                raise SignatureBreach(f"signature {tuple(int(n) for n in sig)} lost near t = {t:.6g}")
            continue
        k1 = rhs(gc, hc)
        k2 = rhs(gc + dt / 2 * k1[0], hc + dt / 2 * k1[1])
        k3 = rhs(gc + dt / 2 * k2[0], hc + dt / 2 * k2[1])
        k4 = rhs(gc + dt * k3[0], hc + dt * k3[1])
        gc = gc + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        hc = hc + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        gc = (gc + np.swapaxes(gc, 1, 2)) / 2
        hc = (hc + np.swapaxes(hc, 1, 2)) / 2
        t += dt
        out.times.append(t)
        out.metrics.append(g.replace(gc))
        out.momenta.append(MomentumField(hc))
        dt = dt0
    return out


# ---------------------------------------------------------------------------
# presets


def riemannian_preset(d: int, grid: Optional[Sequence[int]] = None) -> MetricField:
    """Identity metric on a ``2^d``-cell grid (or the one given)."""
    if d not in (1, 2, 3):
        raise ValueError("Riemannian presets exist for d = 1, 2, 3")
    grid = tuple(grid) if grid is not None else (2,) * d
    return MetricField.constant(np.eye(d), grid, (d, 0))


def lorentzian_preset(grid: Optional[Sequence[int]] = None) -> MetricField:
    """Minkowski ``diag(1, -1, -1, -1)`` on a d = 4 grid, signature (1, 3)."""
    grid = tuple(grid) if grid is not None else (2, 1, 1, 1)
    return MetricField.constant(np.diag([1.0, -1.0, -1.0, -1.0]), grid, (1, 3))


PRESETS = {
    "riemannian-1": lambda: riemannian_preset(1),
    "riemannian-2": lambda: riemannian_preset(2),
    "riemannian-3": lambda: riemannian_preset(3),
    "lorentzian-4": lorentzian_preset,
}
