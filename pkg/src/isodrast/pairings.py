"""Symplectic pairings on weighted loops.

Two layers:

* ``*_form`` functions take raw sample arrays, never gate on exactness and
  extend each pairing smoothly off the isodrast (the primitive of alpha_X is
  always the mean-free antiderivative). These are what finite-difference
  checks differentiate.
* ``omega_*`` / ``theta_*`` functions take validated value types, gate on
  exactness and return a :class:`PairingReport`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ambient import complex_structure, omega
from .errors import ExactnessError, InvariantError
from .loops import (
    EXACTNESS_TOL,
    TWO_PI,
    LoopEmbedding,
    TangentVector,
    Weighting,
    alpha_of,
    exactness_correction,
    fourier_coefficients,
    normal_field_with_primitive,
    normal_representative,
    primitive_of,
    quadrature,
    spectral_antiderivative,
    spectral_derivative,
)
from .numerics import fd_exterior_derivative_1form, fd_exterior_derivative_2form  # noqa: F401  (re-export)


@dataclass
class PairingReport:
    value: float
    residuals: dict = field(default_factory=dict)
    valid: bool = True

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "valid": bool(self.valid),
        }

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# raw forms


def _primitives(x, X1, X2, dx=None):
    dx = spectral_derivative(x) if dx is None else dx
    h1 = spectral_antiderivative(omega(X1, dx))
    h2 = spectral_antiderivative(omega(X2, dx))
    return h1, h2


def weighted_form(x, w, X1, th1, X2, th2, dx=None) -> float:
    """``int [omega(X1, X2) w + h1 th2 - h2 th1] dt`` with h_k primitives of alpha_{X_k}."""
    h1, h2 = _primitives(x, X1, X2, dx)
    return float(quadrature(omega(X1, X2) * w + h1 * th2 - h2 * th1))


def donaldson_form(X1, X2, w0) -> float:
    """``int omega(X1, X2) eta_0``; independent of the base loop."""
    return float(quadrature(omega(X1, X2) * w0))


def momentum_theta_form(x, chi, X, th=None, dx=None) -> float:
    """``int h chi`` with ``alpha_X = dh``; ``th`` is unused (the form only sees X)."""
    dx = spectral_derivative(x) if dx is None else dx
    return float(quadrature(spectral_antiderivative(omega(X, dx)) * chi))


def fourier_form(h1, th1, h2, th2) -> float:
    """Spectral version of ``int (h1 th2 - h2 th1) dt``: ``2 pi sum_m [h1^(m) th2^(-m) - h2^(m) th1^(-m)]``."""
    a1, b1 = fourier_coefficients(h1), fourier_coefficients(th1)
    a2, b2 = fourier_coefficients(h2), fourier_coefficients(th2)
    # coefficients are ordered m = -N/2+1 .. N/2-1, so reversing gives index -m
    total = np.sum(a1 * b2[::-1] - a2 * b1[::-1])
    return float(TWO_PI * np.real(total))


# ---------------------------------------------------------------------------
# checked API


def _field(xi):
    return xi.X if isinstance(xi, TangentVector) else np.asarray(xi, dtype=float)


def _gate(loop, X, tol, label):
    h, residual = primitive_of(alpha_of(loop, X))
    if residual >= tol:
        raise ExactnessError(residual, tol, label)
    return h, residual


def omega_weighted(loop: LoopEmbedding, eta: Weighting, xi1: TangentVector, xi2: TangentVector,
                   tol: float = EXACTNESS_TOL) -> PairingReport:
    """The 2-form on an isodrast of weighted loops.

    Also serves positive weightings and isotropic loops in R^{2n}, n > 1.
    """
    h1, r1 = _gate(loop, xi1.X, tol, "xi1")
    h2, r2 = _gate(loop, xi2.X, tol, "xi2")
    w = eta.samples
    value = float(quadrature(omega(xi1.X, xi2.X) * w + h1 * xi2.vartheta - h2 * xi1.vartheta))
    residuals = {
        "exactness_1": r1,
        "exactness_2": r2,
        "vartheta_mass_1": abs(quadrature(xi1.vartheta)),
        "vartheta_mass_2": abs(quadrature(xi2.vartheta)),
        "weighting_mass_defect": abs(quadrature(w) - (0.0 if eta.kind == "zero_mass" else 1.0)),
    }
    return PairingReport(value, residuals)


def omega_donaldson(loop: LoopEmbedding, X1, X2, eta0: Optional[Weighting] = None) -> PairingReport:
    """Donaldson's form on all of Emb(S^1, R^{2n}); no exactness requirement."""
    X1, X2 = _field(X1), _field(X2)
    w0 = (eta0 or Weighting.uniform(loop.N)).samples
    return PairingReport(donaldson_form(X1, X2, w0), {"weighting_mass_defect": abs(quadrature(w0) - 1.0)})


def omega_reduced(loop: LoopEmbedding, eta0: Optional[Weighting], X1, X2, tol: float = EXACTNESS_TOL) -> PairingReport:
    """Reduced Donaldson form on classes of exact variations (any representatives)."""
    X1, X2 = _field(X1), _field(X2)
    _, r1 = _gate(loop, X1, tol, "X1")
    _, r2 = _gate(loop, X2, tol, "X2")
    report = omega_donaldson(loop, X1, X2, eta0)
    report.residuals.update(exactness_1=r1, exactness_2=r2)
    return report


def reduced_form_tangential(loop: LoopEmbedding, X1, X2) -> float:
    """Planar-loop expression ``(1/2pi) int [L_{Y2} h1 - L_{Y1} h2] dt`` of the
    reduced form, from the splitting ``X = Z + Y`` into normal and tangential parts.
    """
    if loop.half_dim != 1:
        raise InvariantError("the normal/tangential expression holds for planar loops only")
    X1, X2 = _field(X1), _field(X2)
    _, y1 = normal_representative(loop, X1)
    _, y2 = normal_representative(loop, X2)
    dh1 = alpha_of(loop, X1)
    dh2 = alpha_of(loop, X2)
    return float(quadrature(y2 * dh1 - y1 * dh2) / TWO_PI)


def local_form(loop: LoopEmbedding, xi: TangentVector, tol: float = EXACTNESS_TOL):
    """``(h, vartheta)`` for a tangent vector, h the normalised primitive of alpha_X."""
    h, _ = _gate(loop, xi.X, tol, "xi")
    return h, xi.vartheta


def omega_fourier(h1, th1, h2, th2) -> PairingReport:
    """Pairing of local forms ``(h_k, vartheta_k)`` computed mode by mode."""
    value = fourier_form(h1, th1, h2, th2)
    direct = float(quadrature(np.asarray(h1) * th2 - np.asarray(h2) * th1))
    return PairingReport(value, {"parseval_defect": abs(value - direct)})


def theta_momentum(loop: LoopEmbedding, chi: Weighting, xi: TangentVector, tol: float = EXACTNESS_TOL) -> PairingReport:
    """Canonical 1-form ``int h chi`` on momentum-weighted loops."""
    h, r = _gate(loop, xi.X, tol, "xi")
    value = float(quadrature(h * chi.samples))
    return PairingReport(value, {"exactness": r, "chi_mass": abs(quadrature(chi.samples))})


def omega_momentum(loop: LoopEmbedding, chi: Weighting, xi1: TangentVector, xi2: TangentVector,
                   tol: float = EXACTNESS_TOL) -> PairingReport:
    """Same expression as :func:`omega_weighted` with a zero-mass weighting."""
    if chi.kind != "zero_mass":
        raise InvariantError("omega_momentum needs a zero_mass weighting")
    return omega_weighted(loop, chi, xi1, xi2, tol)


# ---------------------------------------------------------------------------
# chart adapters for finite-difference checks
#
# chart points are (x, w) sample arrays, directions are (X, vartheta)


def weighted_chart_form(point, u, v) -> float:
    x, w = point
    return weighted_form(x, w, u[0], u[1], v[0], v[1])


def momentum_chart_theta(point, u) -> float:
    x, chi = point
    return momentum_theta_form(x, chi, u[0])


def donaldson_chart_form(point, u, v) -> float:
    # eta_0 stays fixed; only the loop moves
    x, w0 = point
    return donaldson_form(u[0], v[0], np.full(x.shape[0], 1.0 / TWO_PI))


def as_chart(loop: LoopEmbedding, eta) -> tuple:
    w = eta.samples if isinstance(eta, Weighting) else np.asarray(eta, dtype=float)
    return (loop.samples, w)


def as_direction(xi: TangentVector) -> tuple:
    return (xi.X, xi.vartheta)


def exterior_derivative_weighted(loop, eta, xi0, xi1, xi2, step=1e-4) -> float:
    """FD ``d Omega(xi0, xi1, xi2)`` of the weighted form with constant extensions."""
    return fd_exterior_derivative_2form(
        weighted_chart_form, as_chart(loop, eta), as_direction(xi0), as_direction(xi1), as_direction(xi2), step
    )


def exactness_defect_momentum(loop, chi, xi1, xi2, step=1e-4) -> float:
    """``|d Theta(xi1, xi2) + Omega(xi1, xi2)|`` by finite differences."""
    point = as_chart(loop, chi)
    d_theta = fd_exterior_derivative_1form(momentum_chart_theta, point, as_direction(xi1), as_direction(xi2), step)
    value = weighted_chart_form(point, as_direction(xi1), as_direction(xi2))
    return abs(d_theta + value)


# ---------------------------------------------------------------------------
# horizontality and nondegeneracy


def tangential_shift(loop: LoopEmbedding, eta, y) -> TangentVector:
    """The vertical vector ``(y x', L_Y eta)`` generated by ``Y = y d/dt``."""
    w = eta.samples if isinstance(eta, Weighting) else np.asarray(eta, dtype=float)
    y = np.asarray(y, dtype=float)
    return TangentVector(y[:, None] * loop.derivative, spectral_derivative(y * w), mass_tol=1e-10)


def nondegeneracy_witness(loop: LoopEmbedding, eta, xi1: TangentVector, floor: float = 1e-12):
    """Build ``xi2`` with ``Omega(xi1, xi2) > 0``, or return None when xi1 is
    numerically zero in the quotient by tangential shifts.

    Candidates: a vartheta proportional to the mean-free part of h1, a normal
    field whose primitive is ``-vartheta_1``, and an exactness-corrected ``J X1``.
    The one with the largest pairing is returned, its sign fixed.
    """
    w = eta.samples if isinstance(eta, Weighting) else np.asarray(eta, dtype=float)
    x = loop.samples
    h1 = spectral_antiderivative(alpha_of(loop, xi1.X))
    zero_field = np.zeros_like(xi1.X)
    candidates = [
        (zero_field, h1 - quadrature(h1) / TWO_PI),
        (normal_field_with_primitive(loop, -xi1.vartheta), np.zeros(loop.N)),
        (exactness_correction(loop, complex_structure(xi1.X)), np.zeros(loop.N)),
    ]
    best, best_val = None, 0.0
    for X2, th2 in candidates:
        val = weighted_form(x, w, xi1.X, xi1.vartheta, X2, th2, dx=loop.derivative)
        if abs(val) > abs(best_val):
            best, best_val = (X2, th2), val
    if best is None or abs(best_val) <= floor:
        return None
    sign = 1.0 if best_val > 0 else -1.0
    return TangentVector(sign * best[0], sign * best[1], mass_tol=1e-9)


def donaldson_witness(X1) -> np.ndarray:
    """``J X1``: pairs with X1 to ``int g(X1, X1) eta_0 > 0``."""
    return complex_structure(_field(X1))
