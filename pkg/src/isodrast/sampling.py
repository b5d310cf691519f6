"""Seeded band-limited random data for tests, suites and scripts."""

from __future__ import annotations


import numpy as np

from .loops import (
    TWO_PI,
    CircleDiffeo,
    LoopEmbedding,
    TangentVector,
    Weighting,
    exactness_correction,
    grid,
    quadrature,
    spectral_derivative,
)
from .metrics import MetricField, MomentumField, MetricTangent

MAX_MODE = 10


def rng_for(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def band_limited(rng, N: int, modes: int = MAX_MODE, decay: float = 1.0, mean: bool = False, shape=()) -> np.ndarray:
    """Random trigonometric polynomial of degree ``modes`` sampled on the grid.

    Mode m has amplitude ``~ m^-decay``. Extra trailing ``shape`` gives several
    independent components. Mean-free unless ``mean``.
    """
    t = grid(N)
    m = np.arange(1, modes + 1)
    amp = m ** -float(decay)
    a = rng.normal(size=(modes,) + tuple(shape)) * amp.reshape((-1,) + (1,) * len(shape))
    b = rng.normal(size=(modes,) + tuple(shape)) * amp.reshape((-1,) + (1,) * len(shape))
    f = np.tensordot(np.cos(np.outer(t, m)), a, axes=(1, 0)) + np.tensordot(np.sin(np.outer(t, m)), b, axes=(1, 0))
    if mean:
        f = f + rng.normal(size=tuple(shape))
    return f


def random_loop(rng, N: int = 128, half_dim: int = 1, modes: int = MAX_MODE, amplitude: float = 0.15) -> LoopEmbedding:
    """A perturbed round circle in the (q1, p1) plane, wobbling in every coordinate."""
    rng = rng_for(rng)
    t = grid(N)
    x = np.zeros((N, 2 * half_dim))
    radius = 1.0 + 0.5 * rng.random()
    x[:, 0] = radius * np.cos(t)
    x[:, half_dim] = radius * np.sin(t)
    x = x + rng.normal(size=2 * half_dim) * 0.5
    x = x + amplitude * band_limited(rng, N, modes, decay=2.0, shape=(2 * half_dim,))
    return LoopEmbedding(x)


def random_field(rng, N: int, dim: int, modes: int = MAX_MODE) -> np.ndarray:
    return band_limited(rng_for(rng), N, modes, decay=1.0, mean=True, shape=(dim,))


def exact_field(rng, loop: LoopEmbedding, modes: int = MAX_MODE) -> np.ndarray:
    """A random field tangent to the isodrast (alpha_X has no period)."""
    return exactness_correction(loop, random_field(rng, loop.N, 2 * loop.half_dim, modes))


def positive_weighting(rng, N: int, modes: int = MAX_MODE, spread: float = 0.3) -> Weighting:
    """``w > 0`` with ``min w / max w`` bounded below; unit mass."""
    f = band_limited(rng_for(rng), N, modes, decay=1.5)
    f = spread * f / max(np.max(np.abs(f)), 1e-12)
    w = (1.0 + f) / TWO_PI
    return Weighting(w / quadrature(w), "positive_unit_mass")


def zero_mass_density(rng, N: int, modes: int = MAX_MODE, scale: float = 0.2) -> np.ndarray:
    return scale * band_limited(rng_for(rng), N, modes, decay=1.0)


def zero_mass_weighting(rng, N: int, modes: int = MAX_MODE) -> Weighting:
    return Weighting(zero_mass_density(rng, N, modes), "zero_mass")


def exact_tangent(rng, loop: LoopEmbedding, modes: int = MAX_MODE) -> TangentVector:
    rng = rng_for(rng)
    return TangentVector(exact_field(rng, loop, modes), zero_mass_density(rng, loop.N, modes), mass_tol=1e-10)


def free_tangent(rng, loop: LoopEmbedding, modes: int = MAX_MODE) -> TangentVector:
    """A chart direction with no exactness constraint."""
    rng = rng_for(rng)
    return TangentVector(random_field(rng, loop.N, 2 * loop.half_dim, modes),
                         zero_mass_density(rng, loop.N, modes), mass_tol=1e-10)


def mild_diffeo(rng, N: int, modes: int = 5, strength: float = 0.3) -> CircleDiffeo:
    """``a(t) = t + p(t)`` with ``max |p'| = strength < 1``."""
    p = band_limited(rng_for(rng), N, modes, decay=2.0)
    dp = spectral_derivative(p)
    p = strength * p / max(np.max(np.abs(dp)), 1e-12)
    return CircleDiffeo(grid(N) + p)


# ---------------------------------------------------------------------------
# metrics


def _sym(a):
    return (a + np.swapaxes(a, -1, -2)) / 2


def random_symmetric(rng, cells: int, d: int, scale: float = 1.0) -> np.ndarray:
    return scale * _sym(rng_for(rng).normal(size=(cells, d, d)))


def random_metric(rng, d: int, signature=None, grid_shape=None, eigen_range=(0.7, 1.5)) -> MetricField:
    """Per cell ``Q diag(+-lambda) Q^T`` with Q Haar-orthogonal and ``|lambda|`` in ``eigen_range``.

    Bounding the eigenvalues away from zero keeps the condition number, and so
    the finite-difference truncation error, under control.
    """
    rng = rng_for(rng)
    signature = (d, 0) if signature is None else tuple(signature)
    grid_shape = tuple(grid_shape) if grid_shape is not None else (2,) + (1,) * (d - 1)
    C = int(np.prod(grid_shape))
    signs = np.array([1.0] * signature[0] + [-1.0] * signature[1])
    Q, R = np.linalg.qr(rng.normal(size=(C, d, d)))
    Q = Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]
    lam = signs * rng.uniform(*eigen_range, size=(C, d))
    cells = _sym(np.einsum("cij,cj,ckj->cik", Q, lam, Q))
    return MetricField(cells, grid_shape, signature)


def random_momentum(rng, g: MetricField, scale: float = 0.5) -> MomentumField:
    return MomentumField(random_symmetric(rng, g.n_cells, g.base_dim, scale))


def random_metric_tangent(rng, g: MetricField, scale: float = 0.5) -> MetricTangent:
    """Random ``(k, l)``; the default scale keeps Frobenius norms O(1) so FD checks at step 1e-4 stay below 1e-6."""
    rng = rng_for(rng)
    return MetricTangent(random_symmetric(rng, g.n_cells, g.base_dim, scale),
                         random_symmetric(rng, g.n_cells, g.base_dim, scale))


def metric_configurations(rng):
    """Riemannian d = 1, 2, 3 and Lorentzian d = 4 random points, labelled."""
    rng = rng_for(rng)
    out = []
    for d in (1, 2, 3):
        out.append((f"riemannian-{d}", random_metric(rng, d, (d, 0))))
    out.append(("lorentzian-4", random_metric(rng, 4, (1, 3))))
    return out
