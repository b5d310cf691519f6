"""Hamiltonian motion of loops, action integrals and isodrast membership."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .ambient import HamiltonianFn, hamiltonian_vector_field, liouville, symplectic_matrix
from .loops import LoopEmbedding, alpha_of, quadrature, spectral_derivative

# (t, x) -> dx/dt, vectorised over the leading axes of x
VectorField = Callable[[float, np.ndarray], np.ndarray]


def radial_field(t, x):
    """The dilation ``(q, p) -> (q, p)``; not Hamiltonian (it scales omega)."""
    return np.asarray(x, dtype=float)


def piecewise_hamiltonian(schedule: Sequence[tuple[float, HamiltonianFn]]):
    """Time-dependent Hamiltonian interpolated linearly between ``(t_j, H_j)`` knots.

    Returns the vector field and a matching Hessian callable.
    """
    times = np.array([t for t, _ in schedule], dtype=float)
    fns = [H for _, H in schedule]
    if np.any(np.diff(times) <= 0):
        raise ValueError("schedule times must be strictly increasing")

    def weights(t):
        if t <= times[0]:
            return 0, 0, 0.0
        if t >= times[-1]:
            j = len(times) - 1
            return j, j, 0.0
        j = int(np.searchsorted(times, t, side="right")) - 1
        lam = (t - times[j]) / (times[j + 1] - times[j])
        return j, j + 1, lam

    def field(t, x):
        j0, j1, lam = weights(t)
        v = hamiltonian_vector_field(fns[j0], x)
        if lam:
            v = (1 - lam) * v + lam * hamiltonian_vector_field(fns[j1], x)
        return v

    def hessian(t, x):
        j0, j1, lam = weights(t)
        hmat = fns[j0].hess(x)
        if lam:
            hmat = (1 - lam) * hmat + lam * fns[j1].hess(x)
        return hmat

    return field, hessian


def as_vector_field(H) -> VectorField:
    if isinstance(H, HamiltonianFn):
        return lambda t, x: hamiltonian_vector_field(H, x)
    if isinstance(H, (list, tuple)):
        return piecewise_hamiltonian(H)[0]
    if callable(H):
        return H
    raise TypeError(f"cannot interpret {H!r} as a vector field")


def _hessian_of(H):
    if isinstance(H, HamiltonianFn):
        return lambda t, x: H.hess(x)
    if isinstance(H, (list, tuple)):
        return piecewise_hamiltonian(H)[1]
    raise TypeError("tangent flow needs a HamiltonianFn or a schedule of them")


def rk4_step(field: VectorField, t: float, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = field(t, x)
    k2 = field(t + dt / 2, x + dt / 2 * k1)
    k3 = field(t + dt / 2, x + dt / 2 * k2)
    k4 = field(t + dt, x + dt * k3)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def flow_points(H, x0, T: float, steps: int, t0: float = 0.0, keep: bool = False):
    """Classical RK4 for ``x' = X_H(x)``, vectorised over points.

    Returns the endpoint, or the full ``(steps + 1, ...)`` history with ``keep``.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    field = as_vector_field(H)
    x = np.array(x0, dtype=float)
    dt = T / steps
    history = [x.copy()] if keep else None
    for j in range(steps):
        x = rk4_step(field, t0 + j * dt, x, dt)
        if keep:
            history.append(x.copy())
    return np.stack(history) if keep else x


def flow_map(H, T: float, steps: int):
    """The time-T map of the RK4 integrator as a function of points."""
    return lambda x: flow_points(H, x, T, steps) if T != 0 else np.array(x, dtype=float)


@dataclass
class Trajectory:
    times: np.ndarray
    loops: list

    def __len__(self):
        return len(self.loops)

    def __getitem__(self, k):
        return self.loops[k]

    def __iter__(self):
        return iter(self.loops)

    @property
    def final(self) -> LoopEmbedding:
        return self.loops[-1]


def flow_loop(loop: LoopEmbedding, H: Union[HamiltonianFn, Sequence, VectorField], T: float, steps: int) -> Trajectory:
    """Move every sample point by the flow; ``steps + 1`` loops (one when T = 0)."""
    if T == 0:
        return Trajectory(np.zeros(1), [loop])
    hist = flow_points(H, loop.samples, T, steps, keep=True)
    times = np.linspace(0.0, T, steps + 1)
    loops = [loop] + [LoopEmbedding(x, loop.ambient, loop.immersion_eps) for x in hist[1:]]
    return Trajectory(times, loops)


def tangent_flow(H, x0, V0, T: float, steps: int):
    """Flow points together with tangent vectors: ``V' = S Hess H(x) V``.

    ``V0`` has the shape of ``x0`` (one vector per point) or ``x0.shape + (k,)``
    for k vectors per point.
    """
    field = as_vector_field(H)
    hess = _hessian_of(H)
    x = np.array(x0, dtype=float)
    V = np.array(V0, dtype=float)
    S = symplectic_matrix(x.shape[-1] // 2)
    single = V.shape == x.shape
    if single:
        V = V[..., None]

    def joint(t, state):
        y, W = state
        return field(t, y), S @ hess(t, y) @ W

    dt = T / steps
    for j in range(steps):
        t = j * dt
        k1 = joint(t, (x, V))
        k2 = joint(t + dt / 2, (x + dt / 2 * k1[0], V + dt / 2 * k1[1]))
        k3 = joint(t + dt / 2, (x + dt / 2 * k2[0], V + dt / 2 * k2[1]))
        k4 = joint(t + dt, (x + dt * k3[0], V + dt * k3[1]))
        x = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        V = V + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return x, (V[..., 0] if single else V)


def action_integral(loop) -> float:
    """``A(i) = int i^* beta = int sum_k p_k q_k' dt``."""
    x = loop.samples if isinstance(loop, LoopEmbedding) else np.asarray(loop, dtype=float)
    dx = loop.derivative if isinstance(loop, LoopEmbedding) else spectral_derivative(x)
    return float(quadrature(liouville(x, dx)))


def isodrast_drift(trajectory) -> float:
    """``max_t |A(i_t) - A(i_0)|`` along a trajectory."""
    actions = np.array([action_integral(l) for l in trajectory])
    return float(np.max(np.abs(actions - actions[0])))


def exactness_residual(loop: LoopEmbedding, X) -> float:
    """Period ``|int alpha_X|``; zero exactly on the isodrast distribution."""
    return abs(float(quadrature(alpha_of(loop, X))))


# ---------------------------------------------------------------------------
# CSV export


def write_trajectory_csv(trajectory: Trajectory, path) -> None:
    """Columns ``step, t, point_index, q1..qn, p1..pn``."""
    names = trajectory[0].ambient.coordinate_names()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "t", "point_index"] + names)
        for step, (t, loop) in enumerate(zip(trajectory.times, trajectory.loops)):
            for k, point in enumerate(loop.samples):
                writer.writerow([step, repr(float(t)), k] + [repr(float(c)) for c in point])


def write_action_csv(trajectory: Trajectory, path) -> None:
    """Columns ``step, t, action_integral``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "t", "action_integral"])
        for step, (t, loop) in enumerate(zip(trajectory.times, trajectory.loops)):
            writer.writerow([step, repr(float(t)), repr(action_integral(loop))])


STANDARD_HAMILTONIANS = (
    "q", "p", "q**2/2", "p**2/2", "q*p", "(q**2 + p**2)/2",
    "sin(q)", "cos(p)", "q*sin(p)", "q**3/6 + p**2/2",
)


def standard_hamiltonians() -> list[HamiltonianFn]:
    """Ten planar Hamiltonians whose flows stay bounded over unit time on loops of size O(1)."""
    return [HamiltonianFn.from_expr(e) for e in STANDARD_HAMILTONIANS]
