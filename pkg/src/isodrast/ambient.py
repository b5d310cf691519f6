"""Flat symplectic space R^{2n} and Hamiltonian functions on it.

Coordinates are ordered ``(q_1, ..., q_n, p_1, ..., p_n)`` along the last axis.

Sign conventions (used everywhere else in the package)::

    omega = sum_k dq_k ^ dp_k          omega(u, v) = u_q . v_p - u_p . v_q
    beta  = sum_k p_k dq_k             d(beta) = -omega
    J(q, p) = (-p, q)                  omega(u, J v) = u . v
    iota(X_H) omega = dH               X_H = (dH/dp, -dH/dq)
    {F, G} = -omega(X_F, X_G)          {q, p} = -1

With these choices the action integral of a loop decreases by the integral
of omega over a swept cylinder, and ``{F, G} = dG(X_F)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import (
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from .errors import ParseError


def _split(u):
    u = np.asarray(u, dtype=float)
    n = u.shape[-1] // 2
    return u[..., :n], u[..., n:]


def omega(u, v):
    """Canonical symplectic pairing, vectorised over leading axes."""
    uq, up = _split(u)
    vq, vp = _split(v)
    return np.sum(uq * vp - up * vq, axis=-1)


def liouville(x, v):
    """Canonical 1-form ``beta_x(v) = sum_k p_k v_{q_k}``."""
    _, xp = _split(x)
    vq, _ = _split(v)
    return np.sum(xp * vq, axis=-1)


def complex_structure(v):
    """``J(q, p) = (-p, q)``; satisfies J^2 = -1 and omega(u, Jv) = u.v."""
    vq, vp = _split(v)
    return np.concatenate([-vp, vq], axis=-1)


def compatible_metric(u, v):
    return omega(u, complex_structure(v))


def symplectic_matrix(half_dim: int) -> np.ndarray:
    """Matrix S with omega(u, v) = u^T S v; also X_H = S grad H."""
    eye = np.eye(half_dim)
    zero = np.zeros((half_dim, half_dim))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class AmbientSpace:
    """The flat symplectic vector space R^{2n}."""

    half_dim: int

    def __post_init__(self):
        if int(self.half_dim) != self.half_dim or self.half_dim < 1:
            raise ValueError(f"half_dim must be a positive integer, got {self.half_dim!r}")

    @property
    def dim(self) -> int:
        return 2 * self.half_dim

    def omega(self, u, v):
        return omega(u, v)

    def liouville(self, x, v):
        return liouville(x, v)

    def J(self, v):
        return complex_structure(v)

    def metric(self, u, v):
        return compatible_metric(u, v)

    @property
    def omega_matrix(self) -> np.ndarray:
        return symplectic_matrix(self.half_dim)

    def basis(self) -> np.ndarray:
        return np.eye(self.dim)

    def coordinate_names(self) -> list[str]:
        n = self.half_dim
        return [f"q{k + 1}" for k in range(n)] + [f"p{k + 1}" for k in range(n)]


# ---------------------------------------------------------------------------
# Hamiltonian functions


def fd_gradient(fn, x, step=1e-6):
    """Central-difference gradient of a scalar function, vectorised over points."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for j in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[j] = step
        grad[..., j] = (fn(x + e) - fn(x - e)) / (2 * step)
    return grad


def fd_jacobian(vec_fn, x, step=1e-5):
    """Central-difference Jacobian ``d vec_fn / dx`` of shape (..., m, dim)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[j] = step
        cols.append((vec_fn(x + e) - vec_fn(x - e)) / (2 * step))
    return np.stack(cols, axis=-1)


@dataclass(frozen=True, eq=False)
class HamiltonianFn:
    """A smooth function on R^{2n} carrying its gradient (and Hessian).

    Build one with :meth:`from_expr` (analytic derivatives through sympy) or
    :meth:`from_callable` (finite-difference fallback, ``analytic=False``).
    Evaluation broadcasts over leading axes of ``x``.
    """

    name: str
    half_dim: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    analytic: bool = True
    expr: Optional[sp.Expr] = None

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def grad(self, x):
        return self.gradient(np.asarray(x, dtype=float))

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        if self.hessian is not None:
            return self.hessian(x)
        return fd_jacobian(self.gradient, x)

    def vector_field(self, x):
        return hamiltonian_vector_field(self, x)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_expr(cls, expr, half_dim: int = 1, name: Optional[str] = None) -> "HamiltonianFn":
        """Parse an expression in ``q1..qn, p1..pn`` (``q``, ``p`` when n = 1)."""
        symbols = coordinate_symbols(half_dim)
        if isinstance(expr, str):
            expr_obj = parse_expression(expr, _local_symbols(half_dim))
        else:
            expr_obj = sp.sympify(expr)
        extra = expr_obj.free_symbols - set(symbols)
        if extra:
            raise ParseError(f"unknown symbols {sorted(map(str, extra))} in {expr!r}")
        grad_exprs = [sp.diff(expr_obj, s) for s in symbols]
        hess_exprs = [[sp.diff(g, s) for s in symbols] for g in grad_exprs]
        value = _vectorise_scalar(expr_obj, symbols)
        grads = [_vectorise_scalar(g, symbols) for g in grad_exprs]
        hess = [[_vectorise_scalar(h, symbols) for h in row] for row in hess_exprs]

        def gradient(x):
            return np.stack([g(x) for g in grads], axis=-1)

        def hessian(x):
            return np.stack([np.stack([h(x) for h in row], axis=-1) for row in hess], axis=-2)

        label = name if name is not None else (expr if isinstance(expr, str) else str(expr_obj))
        return cls(label, half_dim, value, gradient, hessian, True, expr_obj)

    @classmethod
    def from_callable(cls, fn, half_dim: int, name: str = "user", gradient=None, hessian=None):
        """Wrap a user function; missing derivatives fall back to finite differences."""
        analytic = gradient is not None
        if gradient is None:
            def gradient(x):
                return fd_gradient(fn, x)
        return cls(name, half_dim, fn, gradient, hessian, analytic, None)

    @classmethod
    def constant(cls, c: float, half_dim: int = 1) -> "HamiltonianFn":
        return cls.from_expr(sp.sympify(c), half_dim, name=str(c))

    def shifted(self, c: float) -> "HamiltonianFn":
        """Same function plus a constant; identical gradient and Hessian."""
        base = self
        expr = None if self.expr is None else self.expr + c
        return HamiltonianFn(
            f"{self.name}+{c}", self.half_dim,
            lambda x: base.value(x) + c, base.gradient, base.hessian, base.analytic, expr,
        )

    def scaled(self, c: float) -> "HamiltonianFn":
        base = self
        hess = None if base.hessian is None else (lambda x: c * base.hessian(x))
        expr = None if self.expr is None else c * self.expr
        return HamiltonianFn(
            f"{c}*({self.name})", self.half_dim,
            lambda x: c * base.value(x), lambda x: c * base.gradient(x), hess, base.analytic, expr,
        )

    def __repr__(self):
        return f"HamiltonianFn({self.name!r}, half_dim={self.half_dim})"


def coordinate_symbols(half_dim: int) -> list[sp.Symbol]:
    qs = [sp.Symbol(f"q{k + 1}", real=True) for k in range(half_dim)]
    ps = [sp.Symbol(f"p{k + 1}", real=True) for k in range(half_dim)]
    return qs + ps


def _local_symbols(half_dim: int) -> dict:
    syms = coordinate_symbols(half_dim)
    local = {str(s): s for s in syms}
    if half_dim == 1:
        local["q"] = syms[0]
        local["p"] = syms[1]
    return local


_TRANSFORMS = standard_transformations + (implicit_multiplication_application,)


def parse_expression(text: str, local: dict) -> sp.Expr:
    try:
        expr = parse_expr(text.replace("^", "**"), local_dict=local, transformations=_TRANSFORMS)
    except Exception as exc:  # sympy raises a zoo of exception types
        raise ParseError(f"cannot parse expression {text!r}: {exc}") from exc
    if not isinstance(expr, sp.Expr):
        raise ParseError(f"expression {text!r} is not scalar")
    return expr


def _vectorise_scalar(expr, symbols):
    fn = sp.lambdify(symbols, expr, modules="numpy")

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        out = fn(*np.moveaxis(x, -1, 0))
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape[:-1]).copy()

    return evaluate


def dictionary(half_dim: int = 1, max_degree: int = 4, trig: bool = True, constant: bool = False):
    """Built-in test functions: coordinate monomials up to ``max_degree`` and
    ``sin``/``cos`` of each coordinate."""
    symbols = coordinate_symbols(half_dim)
    out = []
    start = 0 if constant else 1
    for deg in range(start, max_degree + 1):
        for combo in itertools.combinations_with_replacement(symbols, deg):
            expr = sp.Mul(*combo) if combo else sp.Integer(1)
            out.append(HamiltonianFn.from_expr(expr, half_dim, name=str(expr)))
    if trig:
        for s in symbols:
            out.append(HamiltonianFn.from_expr(sp.sin(s), half_dim, name=f"sin({s})"))
            out.append(HamiltonianFn.from_expr(sp.cos(s), half_dim, name=f"cos({s})"))
    return out


# ---------------------------------------------------------------------------
# operations


def hamiltonian_vector_field(H: HamiltonianFn, x) -> np.ndarray:
    """X_H(x) = (dH/dp, -dH/dq), the unique field with iota(X_H) omega = dH."""
    g = H.grad(x)
    gq, gp = _split(g)
    return np.concatenate([gp, -gq], axis=-1)


def poisson_bracket_ambient(F: HamiltonianFn, G: HamiltonianFn, x) -> np.ndarray:
    """``{F, G}(x) = -omega(X_F(x), X_G(x))``."""
    return -omega(hamiltonian_vector_field(F, x), hamiltonian_vector_field(G, x))


def bracket_function(F: HamiltonianFn, G: HamiltonianFn) -> HamiltonianFn:
    """``{F, G}`` as a new Hamiltonian function.

    Symbolic when both inputs are; otherwise the gradient is taken by finite
    differences and flagged non-analytic.
    """
    if F.expr is not None and G.expr is not None and F.half_dim == G.half_dim:
        n = F.half_dim
        syms = coordinate_symbols(n)
        qs, ps = syms[:n], syms[n:]
        expr = -sum(
            sp.diff(F.expr, qs[k]) * sp.diff(G.expr, ps[k]) - sp.diff(F.expr, ps[k]) * sp.diff(G.expr, qs[k])
            for k in range(n)
        )
        # X_F = (F_p, -F_q); -omega(X_F, X_G) = -(F_p*(-G_q) - (-F_q)*G_p) = F_p G_q - F_q G_p
        return HamiltonianFn.from_expr(sp.expand(expr), n, name=f"{{{F.name},{G.name}}}")
    return HamiltonianFn.from_callable(
        lambda x: poisson_bracket_ambient(F, G, x), F.half_dim, name=f"{{{F.name},{G.name}}}"
    )


def ambient_jacobi_residual(F, G, H, x, step=1e-4) -> float:
    """Cyclic sum of nested ambient brackets, the outer bracket taken by
    differentiating the inner bracket along the outer Hamiltonian field.

    Uses ``{A, K}(x) = dK_x(X_A(x))`` with a fourth-order central stencil.
    """
    x = np.asarray(x, dtype=float)

    def outer(A, B, C):
        inner = lambda y: poisson_bracket_ambient(B, C, y)
        v = hamiltonian_vector_field(A, x)
        return directional_derivative(lambda s: inner(x + s * v), step, order=4)

    return float(np.max(np.abs(outer(F, G, H) + outer(G, H, F) + outer(H, F, G))))


def directional_derivative(fn, step=1e-4, order=2):
    """Derivative at 0 of a function of one real variable, by central differences."""
    if order == 2:
        return (fn(step) - fn(-step)) / (2 * step)
    if order == 4:
        return (-fn(2 * step) + 8 * fn(step) - 8 * fn(-step) + fn(-2 * step)) / (12 * step)
    raise ValueError(f"unsupported stencil order {order}")
