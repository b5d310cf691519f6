"""Moment map for the Ham(M) action on positively weighted isotropic loops.

Phi(i, eta) pairs with a Hamiltonian f as ``int (f o i) eta``. The dual of the
Lie algebra is never formed; Phi is probed through a finite dictionary of
test functions. Functions are taken modulo constants: every identity below
only sees ``f o i`` against zero-mass densities or through ``X_f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ambient import HamiltonianFn, dictionary, hamiltonian_vector_field, poisson_bracket_ambient
from .errors import InvariantError
from .flows import flow_map
from .loops import EXACTNESS_TOL, LoopEmbedding, TangentVector, Weighting, quadrature
from .pairings import omega_weighted, weighted_form
from .ambient import directional_derivative


def _w(eta):
    return eta.samples if isinstance(eta, Weighting) else np.asarray(eta, dtype=float)


def _x(loop):
    return loop.samples if isinstance(loop, LoopEmbedding) else np.asarray(loop, dtype=float)


def moment_eval(loop, eta, f: HamiltonianFn) -> float:
    """``<Phi(i, eta), f> = int (f o i) eta``."""
    return float(quadrature(f(_x(loop)) * _w(eta)))


def generating_vector(loop: LoopEmbedding, f: HamiltonianFn) -> TangentVector:
    """Infinitesimal action of f: ``(X_f o i, 0)``."""
    return TangentVector.of_field(hamiltonian_vector_field(f, loop.samples))


def moment_condition_residual(loop: LoopEmbedding, eta: Weighting, f: HamiltonianFn, xi: TangentVector,
                              step: float = 1e-4, sign: float = 1.0, tol: float = EXACTNESS_TOL) -> float:
    """``|d<Phi, f>(xi) - sign * Omega(f_I, xi)|``.

    The derivative moves the loop along X and the weighting along vartheta
    (central differences). ``sign = -1`` is a negative control.
    """
    x, w = loop.samples, eta.samples

    def phi(s):
        return moment_eval(x + s * xi.X, w + s * xi.vartheta, f)

    derivative = directional_derivative(phi, step)
    value = omega_weighted(loop, eta, generating_vector(loop, f), xi, tol).value
    return abs(derivative - sign * value)


def equivariance_residual(loop: LoopEmbedding, eta, f: HamiltonianFn, H: HamiltonianFn, T: float, steps: int,
                          composed_steps: Optional[int] = None) -> float:
    """``|<Phi(phi . i), f> - <Phi(i), f o phi>|`` for the time-T flow phi of X_H.

    The left side flows the loop; the right side pulls f back pointwise through
    the integrator's time-T map (``composed_steps`` may differ to probe
    integrator error).
    """
    moved = flow_map(H, T, steps)(loop.samples)
    phi = flow_map(H, T, composed_steps or steps)
    pulled_back = HamiltonianFn.from_callable(lambda y: f(phi(y)), f.half_dim, name=f"{f.name} o phi")
    return abs(moment_eval(moved, eta, f) - moment_eval(loop, eta, pulled_back))


def kks_pairing(loop, eta, f1: HamiltonianFn, f2: HamiltonianFn) -> float:
    """Pullback of the KKS form to generating vectors: ``-int (i^* {f1, f2}) eta``."""
    return float(-quadrature(poisson_bracket_ambient(f1, f2, _x(loop)) * _w(eta)))


def kks_defect(loop: LoopEmbedding, eta: Weighting, f1: HamiltonianFn, f2: HamiltonianFn) -> float:
    """``|Phi^* Omega_KKS - Omega|`` on the generating vectors of f1, f2."""
    omega_val = omega_weighted(loop, eta, generating_vector(loop, f1), generating_vector(loop, f2)).value
    return abs(kks_pairing(loop, eta, f1, f2) - omega_val)


@dataclass
class DualPairing:
    """A weighted loop seen through a finite dictionary of test functions."""

    loop: LoopEmbedding
    eta: Weighting
    functions: Sequence[HamiltonianFn] = field(default_factory=list)

    def __post_init__(self):
        if self.eta.kind == "zero_mass":
            raise InvariantError("moment map pairings need a unit-mass weighting")
        if not self.functions:
            self.functions = dictionary(self.loop.half_dim, max_degree=4, trig=False)

    def values(self) -> np.ndarray:
        return np.array([moment_eval(self.loop, self.eta, f) for f in self.functions])

    def separation(self, other: "DualPairing") -> tuple[float, str]:
        """Largest ``|Delta <Phi, f>|`` over the shared dictionary and the f attaining it."""
        diff = np.abs(self.values() - other.values())
        k = int(np.argmax(diff))
        return float(diff[k]), self.functions[k].name


def moment_condition_raw(x, w, X, th, f: HamiltonianFn, step=1e-4) -> float:
    """Unchecked variant of :func:`moment_condition_residual` on sample arrays."""
    derivative = directional_derivative(lambda s: moment_eval(x + s * X, w + s * th, f), step)
    Xf = hamiltonian_vector_field(f, x)
    return abs(derivative - weighted_form(x, w, Xf, np.zeros_like(w), X, th))
