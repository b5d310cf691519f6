"""Finite-difference exterior derivatives on linear charts.

A chart point or tangent vector is a tuple of numpy arrays; directions are
extended constantly, so every Lie-bracket term of the global formula drops
out and only the directional-derivative terms remain.
"""

from __future__ import annotations

import numpy as np

from .ambient import directional_derivative


def _shift(point, direction, s):
    return tuple(np.asarray(p) + s * np.asarray(d) for p, d in zip(point, direction))


def fd_derivative_along(fn, point, direction, step=1e-4, order=2):
    """Derivative at ``point`` of ``fn(point)`` along a chart direction."""
    return directional_derivative(lambda s: fn(_shift(point, direction, s)), step, order)


def fd_exterior_derivative_1form(theta, point, xi1, xi2, step=1e-4, order=2):
    """``d theta(xi1, xi2) = xi1 . theta(xi2) - xi2 . theta(xi1)`` for constant extensions.

    ``theta(point, xi)`` returns a real.
    """
    a = fd_derivative_along(lambda p: theta(p, xi2), point, xi1, step, order)
    b = fd_derivative_along(lambda p: theta(p, xi1), point, xi2, step, order)
    return a - b


def fd_exterior_derivative_2form(form, point, xi0, xi1, xi2, step=1e-4, order=2):
    """Cyclic sum ``xi0.W(xi1,xi2) - xi1.W(xi0,xi2) + xi2.W(xi0,xi1)``.

    ``form(point, u, v)`` returns a real. Vanishes (to FD accuracy) for closed forms.
    """
    t0 = fd_derivative_along(lambda p: form(p, xi1, xi2), point, xi0, step, order)
    t1 = fd_derivative_along(lambda p: form(p, xi0, xi2), point, xi1, step, order)
    t2 = fd_derivative_along(lambda p: form(p, xi0, xi1), point, xi2, step, order)
    return t0 - t1 + t2


def richardson_ratio(errors_at_steps):
    """Successive error ratios for a halving step sequence; ~4 for O(step^2)."""
    e = np.abs(np.asarray(errors_at_steps, dtype=float))
    return e[:-1] / e[1:]
