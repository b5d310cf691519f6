"""Discretised loops S^1 -> R^{2n}, weightings, variations and circle diffeomorphisms.

All data live on the uniform periodic grid ``t_k = 2 pi k / N``. Integrals use
the trapezoid rule and derivatives use the DFT, both spectrally accurate for
smooth periodic data. Functions below operate on sample arrays whose first
axis is the grid axis; the dataclasses add validation on top.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ambient import AmbientSpace, compatible_metric, complex_structure, omega
from .errors import ExactnessError, InvariantError, PositivityError

TWO_PI = 2.0 * np.pi
MIN_SAMPLES = 16
EXACTNESS_TOL = 1e-9


def grid(N: int) -> np.ndarray:
    return TWO_PI * np.arange(N) / N


def check_grid(N: int):
    if N % 2:
        raise InvariantError(f"grid size must be even, got N={N}")


def quadrature(f) -> float | np.ndarray:
    """Trapezoid rule on the periodic grid: ``(2 pi / N) sum_k f_k`` along axis 0."""
    f = np.asarray(f, dtype=float)
    return TWO_PI / f.shape[0] * np.sum(f, axis=0)


def _wavenumbers(N: int) -> np.ndarray:
    m = np.arange(N // 2 + 1, dtype=float)
    m[-1] = 0.0  # Nyquist mode is dropped by differentiation
    return m


def spectral_derivative(f) -> np.ndarray:
    """d/dt of periodic samples via the DFT (Nyquist mode zeroed)."""
    f = np.asarray(f, dtype=float)
    N = f.shape[0]
    check_grid(N)
    fhat = np.fft.rfft(f, axis=0)
    m = _wavenumbers(N).reshape((-1,) + (1,) * (f.ndim - 1))
    return np.fft.irfft(1j * m * fhat, n=N, axis=0)


def spectral_antiderivative(f) -> np.ndarray:
    """Periodic antiderivative of ``f - mean(f)`` vanishing at ``t_0``."""
    f = np.asarray(f, dtype=float)
    N = f.shape[0]
    check_grid(N)
    fhat = np.fft.rfft(f, axis=0)
    m = _wavenumbers(N)
    inv = np.zeros_like(m, dtype=complex)
    inv[1:-1] = 1.0 / (1j * m[1:-1])
    inv = inv.reshape((-1,) + (1,) * (f.ndim - 1))
    h = np.fft.irfft(inv * fhat, n=N, axis=0)
    return h - h[0]


def fourier_modes(N: int) -> np.ndarray:
    return np.arange(-N // 2 + 1, N // 2)


def fourier_coefficients(f) -> np.ndarray:
    """Coefficients of ``f(t) = sum_m fhat(m) e^{imt}`` for m in [-N/2+1, N/2-1]."""
    f = np.asarray(f, dtype=float)
    N = f.shape[0]
    check_grid(N)
    fhat = np.fft.fft(f, axis=0) / N
    return np.fft.fftshift(fhat, axes=0)[1:]


def trig_interpolate(f, s) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at points ``s``.

    Exact for data band-limited below the Nyquist mode; reproduces the samples
    at grid points.
    """
    f = np.asarray(f, dtype=float)
    s = np.asarray(s, dtype=float)
    N = f.shape[0]
    check_grid(N)
    fhat = np.fft.rfft(f, axis=0) / N
    m = np.arange(N // 2 + 1)
    weights = np.full(N // 2 + 1, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    phase = np.exp(1j * np.outer(s.ravel(), m))
    out = np.real(phase @ (weights.reshape((-1,) + (1,) * (f.ndim - 1)) * fhat).reshape(N // 2 + 1, -1))
    return out.reshape(s.shape + f.shape[1:])


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class LoopEmbedding:
    """Samples ``x_k = i(t_k)`` of a periodic immersion S^1 -> R^{2n}.

    Self-intersections are not checked; every formula downstream is an
    integral of local data.
    """

    samples: np.ndarray
    ambient: Optional[AmbientSpace] = None
    immersion_eps: float = 1e-8
    derivative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.samples, dtype=float)
        if x.ndim != 2 or x.shape[1] % 2:
            raise InvariantError(f"loop samples must have shape (N, 2n), got {x.shape}")
        N = x.shape[0]
        if N < MIN_SAMPLES:
            raise InvariantError(f"loop needs N >= {MIN_SAMPLES} samples, got {N}")
        check_grid(N)
        if not np.all(np.isfinite(x)):
            raise InvariantError("loop samples must be finite")
        ambient = self.ambient or AmbientSpace(x.shape[1] // 2)
        if ambient.dim != x.shape[1]:
            raise InvariantError(f"samples have dimension {x.shape[1]}, ambient is R^{ambient.dim}")
        dx = spectral_derivative(x)
        speed = np.linalg.norm(dx, axis=1)
        if np.min(speed) <= self.immersion_eps:
            raise InvariantError(
                f"not an immersion: |x'| = {np.min(speed):.3g} at t_{int(np.argmin(speed))}"
            )
        x.setflags(write=False)
        dx.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "derivative", dx)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def half_dim(self) -> int:
        return self.ambient.half_dim

    @property
    def t(self) -> np.ndarray:
        return grid(self.N)

    def evaluate(self, s) -> np.ndarray:
        return trig_interpolate(self.samples, s)

    @classmethod
    def from_function(cls, fn, N: int, **kwargs) -> "LoopEmbedding":
        return cls(np.asarray(fn(grid(N)), dtype=float), **kwargs)

    @classmethod
    def circle(cls, N: int, radius: float = 1.0, half_dim: int = 1, reverse: bool = False) -> "LoopEmbedding":
        """Round circle in the (q_1, p_1) plane, counter-clockwise unless ``reverse``."""
        t = grid(N)
        if reverse:
            t = -t
        x = np.zeros((N, 2 * half_dim))
        x[:, 0] = radius * np.cos(t)
        x[:, half_dim] = radius * np.sin(t)
        return cls(x)


@dataclass(frozen=True, eq=False)
class Weighting:
    """Density ``eta = w(t) dt`` sampled on the grid.

    ``kind`` is one of ``unit_mass``, ``positive_unit_mass`` (both integrate to
    one) or ``zero_mass`` (momentum weightings).
    """

    samples: np.ndarray
    kind: str = "positive_unit_mass"
    mass_tol: float = 1e-12

    KINDS = ("unit_mass", "zero_mass", "positive_unit_mass")

    def __post_init__(self):
        w = np.array(self.samples, dtype=float)
        if w.ndim != 1:
            raise InvariantError("weighting samples must be one-dimensional")
        if self.kind not in self.KINDS:
            raise InvariantError(f"unknown weighting kind {self.kind!r}")
        target = 0.0 if self.kind == "zero_mass" else 1.0
        mass = quadrature(w)
        if abs(mass - target) > self.mass_tol:
            raise InvariantError(f"{self.kind} weighting has mass {mass!r}, expected {target}")
        if self.kind == "positive_unit_mass" and np.min(w) <= 0:
            raise PositivityError(f"positive weighting has min sample {np.min(w):.3g}")
        w.setflags(write=False)
        object.__setattr__(self, "samples", w)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def mass(self) -> float:
        return float(quadrature(self.samples))

    @classmethod
    def uniform(cls, N: int) -> "Weighting":
        """The reference weighting ``eta_0 = dt / 2 pi``."""
        return cls(np.full(N, 1.0 / TWO_PI), "positive_unit_mass")

    @classmethod
    def normalized(cls, values, kind="positive_unit_mass") -> "Weighting":
        w = np.asarray(values, dtype=float)
        return cls(w / quadrature(w), kind)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A variation ``(X, vartheta)`` of a weighted loop.

    ``X`` has shape (N, 2n); ``vartheta`` holds density samples integrating to 0.
    """

    X: np.ndarray
    vartheta: np.ndarray
    mass_tol: float = 1e-12

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        th = np.array(self.vartheta, dtype=float)
        if X.ndim != 2 or th.shape != (X.shape[0],):
            raise InvariantError(f"tangent shapes do not match: X {X.shape}, vartheta {th.shape}")
        mass = quadrature(th)
        if abs(mass) > self.mass_tol:
            raise InvariantError(f"vartheta must integrate to 0, got {mass!r}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "vartheta", th)

    @classmethod
    def zero(cls, N: int, dim: int) -> "TangentVector":
        return cls(np.zeros((N, dim)), np.zeros(N))

    @classmethod
    def of_field(cls, X) -> "TangentVector":
        X = np.asarray(X, dtype=float)
        return cls(X, np.zeros(X.shape[0]))

    def __add__(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(self.X + other.X, self.vartheta + other.vartheta, max(self.mass_tol, other.mass_tol))

    def __sub__(self, other: "TangentVector") -> "TangentVector":
        return self + (-1.0) * other

    def __mul__(self, c: float) -> "TangentVector":
        return TangentVector(c * self.X, c * self.vartheta, self.mass_tol * max(1.0, abs(c)))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self


@dataclass(frozen=True, eq=False)
class CircleDiffeo:
    """Orientation-preserving diffeomorphism of S^1 given by samples of its lift.

    ``samples[k] = a(t_k)`` with ``a(t + 2 pi) = a(t) + 2 pi``. The periodic part
    ``a(t) - t`` is interpolated trigonometrically.
    """

    samples: np.ndarray
    monotone_tol: float = 1e-12

    def __post_init__(self):
        a = np.array(self.samples, dtype=float)
        N = a.shape[0]
        check_grid(N)
        lifted = np.append(a, a[0] + TWO_PI)
        if np.any(np.diff(lifted) <= 0):
            raise InvariantError("circle diffeomorphism samples are not strictly increasing")
        if np.min(self.derivative_of(a)) < -self.monotone_tol:
            raise InvariantError("circle diffeomorphism has negative derivative")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    @staticmethod
    def derivative_of(a):
        N = a.shape[0]
        return 1.0 + spectral_derivative(a - grid(N))

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def periodic_part(self) -> np.ndarray:
        return self.samples - grid(self.N)

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return s + trig_interpolate(self.periodic_part, s)

    def derivative(self, s=None) -> np.ndarray:
        dp = spectral_derivative(self.periodic_part)
        if s is None:
            return 1.0 + dp
        return 1.0 + trig_interpolate(dp, s)

    def inverse(self, t=None, tol=1e-12, max_iter=60) -> np.ndarray:
        """Solve ``a(s) = t`` for s; Newton steps safeguarded by bisection."""
        t = grid(self.N) if t is None else np.asarray(t, dtype=float)
        # |a(s) - s| <= max|p| brackets the root; the grid maximum of p can
        # undershoot by at most half a cell times max|p'|
        p = self.periodic_part
        slack = np.pi / self.N * np.max(np.abs(spectral_derivative(p)))
        bound = np.max(np.abs(p)) + 2.0 * slack + 1e-9
        lo = t - bound
        hi = t + bound
        s = t - trig_interpolate(self.periodic_part, t)
        s = np.clip(s, lo, hi)
        for _ in range(max_iter):
            r = self(s) - t
            lo = np.where(r < 0, s, lo)
            hi = np.where(r > 0, s, hi)
            d = self.derivative(s)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(d > 1e-8, r / d, np.inf)
            cand = s - step
            bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
            s_new = np.where(bad, 0.5 * (lo + hi), cand)
            if np.max(np.abs(s_new - s)) < tol:
                s = s_new
                break
            s = s_new
        return s

    @classmethod
    def identity(cls, N: int) -> "CircleDiffeo":
        return cls(grid(N))

    @classmethod
    def rotation(cls, N: int, angle: float) -> "CircleDiffeo":
        return cls(grid(N) + angle)

    @classmethod
    def from_function(cls, fn, N: int) -> "CircleDiffeo":
        return cls(np.asarray(fn(grid(N)), dtype=float))

    def pullback_reference(self) -> np.ndarray:
        """Density samples of ``a^* (dt / 2 pi)``, i.e. ``a'(t) / 2 pi``."""
        return self.derivative() / TWO_PI


# ---------------------------------------------------------------------------
# 1-forms on the circle


def alpha_of(loop: LoopEmbedding, X) -> np.ndarray:
    """Samples of ``alpha_X(d/dt) = omega(X, x')`` along the loop."""
    return alpha_raw(_loop_samples(loop), X, derivative=getattr(loop, "derivative", None))


def alpha_raw(x, X, derivative=None) -> np.ndarray:
    dx = spectral_derivative(x) if derivative is None else derivative
    X = np.asarray(X, dtype=float)
    if X.shape != dx.shape:
        raise InvariantError(f"field shape {X.shape} does not match loop {dx.shape}")
    return omega(X, dx)


def primitive_of(alpha) -> tuple[np.ndarray, float]:
    """Primitive ``h`` of ``alpha - mean(alpha)`` with ``h(t_0) = 0``, and the
    exactness defect ``|integral of alpha|``.

    Callers decide whether the defect is small enough to treat alpha as exact.
    """
    alpha = np.asarray(alpha, dtype=float)
    residual = abs(float(quadrature(alpha)))
    return spectral_antiderivative(alpha), residual


def exact_primitive(loop, X, tol: float = EXACTNESS_TOL, label: str = "") -> np.ndarray:
    """Primitive of alpha_X, raising :class:`ExactnessError` when alpha_X has a period."""
    h, residual = primitive_of(alpha_of(loop, X))
    if residual >= tol:
        raise ExactnessError(residual, tol, label)
    return h


def _loop_samples(loop) -> np.ndarray:
    return loop.samples if isinstance(loop, LoopEmbedding) else np.asarray(loop, dtype=float)


# ---------------------------------------------------------------------------
# representatives and tangential directions


def normal_representative(loop: LoopEmbedding, X) -> tuple[np.ndarray, np.ndarray]:
    """Split ``X = X_norm + c x'`` with X_norm orthogonal to x' in the
    compatible metric. In R^2 this places X_norm in ``J span(x')``.
    """
    dx = loop.derivative
    X = np.asarray(X, dtype=float)
    c = compatible_metric(X, dx) / compatible_metric(dx, dx)
    return X - c[:, None] * dx, c


def tangential_field(loop: LoopEmbedding, y) -> np.ndarray:
    """Pushforward ``y(t) x'(t)`` of the circle field ``y d/dt``."""
    return np.asarray(y, dtype=float)[:, None] * loop.derivative


def lie_derivative_density(y, w) -> np.ndarray:
    """``L_Y eta = d(iota_Y eta)`` for ``Y = y d/dt`` and ``eta = w dt``."""
    return spectral_derivative(np.asarray(y, dtype=float) * np.asarray(w, dtype=float))


def exactness_correction(loop: LoopEmbedding, X) -> np.ndarray:
    """Add a multiple of ``J x'`` to X so that alpha_X has zero period."""
    X = np.asarray(X, dtype=float)
    dx = loop.derivative
    period = quadrature(alpha_of(loop, X))
    # alpha_{J x'} = -|x'|^2
    c = period / quadrature(compatible_metric(dx, dx))
    return X + c * complex_structure(dx)


def normal_field_with_primitive(loop: LoopEmbedding, h) -> np.ndarray:
    """A field normal to the loop whose alpha has primitive ``h``.

    Uses ``alpha_{-f J x' / |x'|^2} = f``.
    """
    dx = loop.derivative
    dh = spectral_derivative(np.asarray(h, dtype=float))
    return -(dh / compatible_metric(dx, dx))[:, None] * complex_structure(dx)


# ---------------------------------------------------------------------------
# reparametrisation


def diffeo_from_weighting(w) -> CircleDiffeo:
    """``a(t) = 2 pi int_0^t w``, the map with ``a^* (dt / 2 pi) = w dt``."""
    w = np.asarray(w, dtype=float)
    N = w.shape[0]
    mass = quadrature(w)
    return CircleDiffeo(grid(N) * mass + TWO_PI * spectral_antiderivative(w))


def moser_normalize(loop: LoopEmbedding, eta: Weighting) -> tuple[LoopEmbedding, CircleDiffeo]:
    """Move a positively weighted loop to the reference weighting dt/2pi.

    Returns ``(loop o a^{-1}, a)`` where ``a^* eta_0 = eta``; together with
    ``eta_0`` the new loop represents the same weighted submanifold.

    Isolated zeros of ``w`` are accepted as long as ``a`` stays strictly
    increasing; negative samples raise :class:`PositivityError`.
    """
    w = eta.samples if isinstance(eta, Weighting) else np.asarray(eta, dtype=float)
    if np.min(w) < 0:
        raise PositivityError(f"weighting has min sample {np.min(w):.3g} < 0")
    if abs(quadrature(w) - 1.0) > 1e-10:
        raise InvariantError("Moser normalisation needs a unit-mass weighting")
    try:
        a = diffeo_from_weighting(w)
    except InvariantError as exc:
        raise PositivityError(f"weighting does not define a diffeomorphism: {exc}") from exc
    new_loop, _, _ = reparametrize(loop, None, (), a)
    return new_loop, a


def _grid_index(s, N, tol=1e-13):
    k = s * N / TWO_PI
    kr = np.round(k)
    if np.max(np.abs(k - kr)) < tol * N:
        return np.mod(kr.astype(int), N)
    return None


def compose_inverse(f, a: CircleDiffeo, s=None) -> np.ndarray:
    """Samples of ``f o a^{-1}`` on the grid, for functions or vector fields."""
    f = np.asarray(f, dtype=float)
    s = a.inverse() if s is None else s
    idx = _grid_index(s, f.shape[0])
    if idx is not None:
        return f[idx].copy()
    return trig_interpolate(f, s)


def push_density(w, a: CircleDiffeo, s=None) -> np.ndarray:
    """Density samples of ``(a^{-1})^* (w dt)``: ``w(a^{-1} t) / a'(a^{-1} t)``."""
    w = np.asarray(w, dtype=float)
    s = a.inverse() if s is None else s
    return compose_inverse(w, a, s) / a.derivative(s)


def reparametrize(loop: LoopEmbedding, eta: Optional[Weighting], tangents: Sequence[TangentVector], a: CircleDiffeo):
    """Act by ``a`` on a weighted loop and its tangent vectors.

    ``a . (i, eta) = (i o a^{-1}, (a^{-1})^* eta)``; fields compose with
    ``a^{-1}`` and the vartheta densities pick up the Jacobian factor.
    Returns ``(loop, eta, tangents)`` with ``None`` passed through.
    """
    s = a.inverse()
    new_loop = LoopEmbedding(compose_inverse(loop.samples, a, s), loop.ambient, loop.immersion_eps)
    new_eta = None
    if eta is not None:
        new_eta = Weighting(push_density(eta.samples, a, s), eta.kind, mass_tol=1e-8)
    new_tangents = [
        TangentVector(compose_inverse(xi.X, a, s), push_density(xi.vartheta, a, s), mass_tol=1e-8)
        for xi in tangents
    ]
    return new_loop, new_eta, new_tangents
