"""Poisson algebra of integral functionals on loop space.

A functional is ``F(i) = A(int (i^* h_1) eta_0, ..., int (i^* h_m) eta_0)``.
The outer map A is a sympy expression in ``y0 .. y{m-1}`` so its gradient is
exact; the inner functions are :class:`HamiltonianFn`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import sympy as sp

from .ambient import HamiltonianFn, directional_derivative, hamiltonian_vector_field, parse_expression
from .errors import ParseError, SchemaError
from .loops import TWO_PI, LoopEmbedding, quadrature
from .pairings import donaldson_form


def outer_symbols(m: int) -> list[sp.Symbol]:
    return [sp.Symbol(f"y{j}", real=True) for j in range(m)]


@dataclass(frozen=True, eq=False)
class Outer:
    """An outer map ``A: R^m -> R`` with its exact gradient."""

    expr: sp.Expr
    arity: int

    def __post_init__(self):
        syms = outer_symbols(self.arity)
        extra = self.expr.free_symbols - set(syms)
        if extra:
            raise ParseError(f"outer map uses unknown symbols {sorted(map(str, extra))}")
        object.__setattr__(self, "_value", sp.lambdify([syms], self.expr, "numpy"))
        grads = [sp.diff(self.expr, s) for s in syms]
        object.__setattr__(self, "_grad", sp.lambdify([syms], grads, "numpy"))

    def __call__(self, y) -> float:
        return float(self._value(list(np.asarray(y, dtype=float))))

    def gradient(self, y) -> np.ndarray:
        return np.asarray(self._grad(list(np.asarray(y, dtype=float))), dtype=float)

    @classmethod
    def parse(cls, spec, arity: int) -> "Outer":
        """From a string like ``"y0*y1"`` or a JSON expression tree."""
        syms = outer_symbols(arity)
        if isinstance(spec, str):
            expr = parse_expression(spec, {str(s): s for s in syms})
        else:
            expr = _tree_to_expr(spec, syms)
        return cls(sp.sympify(expr), arity)


def _tree_to_expr(node, syms):
    if isinstance(node, (int, float)):
        return sp.sympify(node)
    if isinstance(node, str):
        return parse_expression(node, {str(s): s for s in syms})
    if not isinstance(node, dict) or "op" not in node:
        raise SchemaError("outer expression node must be an object with an 'op' key", field="outer")
    op = node["op"]
    if op == "var":
        idx = node.get("index")
        if not isinstance(idx, int) or not 0 <= idx < len(syms):
            raise SchemaError(f"bad variable index {idx!r}", field="outer.index")
        return syms[idx]
    if op == "const":
        return sp.sympify(node.get("value", 0))
    args = [_tree_to_expr(a, syms) for a in node.get("args", [])]
    if op == "add":
        return sp.Add(*args)
    if op == "mul":
        return sp.Mul(*args)
    if op == "neg" and len(args) == 1:
        return -args[0]
    if op == "pow":
        base = _tree_to_expr(node["base"], syms)
        return base ** int(node["exp"])
    raise SchemaError(f"unknown outer op {op!r}", field="outer.op")


@dataclass(frozen=True, eq=False)
class IntegralFunctional:
    """``F(i) = A(int (h_j o i) eta_0)`` with eta_0 = dt / 2pi unless given."""

    outer: Outer
    inner: tuple
    eta0: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.inner) < 1 or len(self.inner) != self.outer.arity:
            raise ValueError(f"outer map takes {self.outer.arity} inputs, got {len(self.inner)} inner functions")
        object.__setattr__(self, "inner", tuple(self.inner))

    @classmethod
    def linear(cls, h: HamiltonianFn, coefficient: float = 1.0) -> "IntegralFunctional":
        y = outer_symbols(1)[0]
        return cls(Outer(sp.sympify(coefficient) * y, 1), (h,))

    @classmethod
    def constant(cls, c: float, half_dim: int = 1) -> "IntegralFunctional":
        # the single inner function is irrelevant to A
        return cls(Outer(sp.sympify(c), 1), (HamiltonianFn.from_expr("0", half_dim),))

    @classmethod
    def from_spec(cls, spec: dict, half_dim: int = 1) -> "IntegralFunctional":
        """``{"outer": tree-or-string, "inner": ["q", "p**2", ...]}``."""
        if not isinstance(spec, dict) or "outer" not in spec or "inner" not in spec:
            raise SchemaError("functional needs 'outer' and 'inner' keys")
        inner = [HamiltonianFn.from_expr(h, half_dim) for h in spec["inner"]]
        return cls(Outer.parse(spec["outer"], len(inner)), tuple(inner))

    def weights(self, N: int) -> np.ndarray:
        return np.full(N, 1.0 / TWO_PI) if self.eta0 is None else np.asarray(self.eta0, dtype=float)

    def integrals(self, x) -> np.ndarray:
        x = _samples(x)
        w = self.weights(x.shape[0])
        return np.array([quadrature(h(x) * w) for h in self.inner])

    def __call__(self, x) -> float:
        return self.outer(self.integrals(x))

    def __mul__(self, other: "IntegralFunctional") -> "IntegralFunctional":
        return _combine(self, other, sp.Mul)

    def __add__(self, other: "IntegralFunctional") -> "IntegralFunctional":
        return _combine(self, other, sp.Add)


def _combine(F: IntegralFunctional, G: IntegralFunctional, op):
    m, k = F.outer.arity, G.outer.arity
    syms = outer_symbols(m + k)
    a = F.outer.expr.subs({s: syms[j] for j, s in enumerate(outer_symbols(m))}, simultaneous=True)
    b = G.outer.expr.subs({s: syms[m + j] for j, s in enumerate(outer_symbols(k))}, simultaneous=True)
    return IntegralFunctional(Outer(op(a, b), m + k), F.inner + G.inner, F.eta0)


def _samples(x) -> np.ndarray:
    return x.samples if isinstance(x, LoopEmbedding) else np.asarray(x, dtype=float)


def eval_functional(F: IntegralFunctional, loop) -> float:
    return F(loop)


def hamiltonian_field_of(F: IntegralFunctional, loop) -> np.ndarray:
    """``v_F(i) = sum_j dA/dy_j X_{h_j} o i``, satisfying ``dF = iota(v_F) Omega^D``."""
    x = _samples(loop)
    coeffs = F.outer.gradient(F.integrals(x))
    v = np.zeros_like(x)
    for c, h in zip(coeffs, F.inner):
        if c != 0.0:
            v = v + c * hamiltonian_vector_field(h, x)
    return v


def bracket(F: IntegralFunctional, G: IntegralFunctional, loop) -> float:
    """``{F, G} = -Omega^D(v_F, v_G)``."""
    x = _samples(loop)
    return -donaldson_form(hamiltonian_field_of(F, x), hamiltonian_field_of(G, x), F.weights(x.shape[0]))


def defining_property_residual(F: IntegralFunctional, loop, X, step: float = 1e-4) -> float:
    """``|dF(X) - Omega^D(v_F, X)|`` with dF by central differences."""
    x = _samples(loop)
    X = np.asarray(X, dtype=float)
    dF = directional_derivative(lambda s: F(x + s * X), step)
    return abs(dF - donaldson_form(hamiltonian_field_of(F, x), X, F.weights(x.shape[0])))


def nested_bracket(F: IntegralFunctional, G: IntegralFunctional, H: IntegralFunctional, loop,
                   step: float = 1e-4) -> float:
    """``{F, {G, H}}`` as the derivative of the inner bracket along v_F.

    Brackets of composed functionals can be large, so a fourth-order stencil
    keeps the truncation error well below the Jacobi gate.
    """
    x = _samples(loop)
    vF = hamiltonian_field_of(F, x)
    return directional_derivative(lambda s: bracket(G, H, x + s * vF), step, order=4)


def jacobi_residual(F, G, H, loop, step: float = 1e-4) -> float:
    return abs(
        nested_bracket(F, G, H, loop, step) + nested_bracket(G, H, F, loop, step) + nested_bracket(H, F, G, loop, step)
    )


def leibniz_residual(F, G, H, loop) -> float:
    """``|{FG, H} - F{G, H} - {F, H}G|``."""
    return abs(bracket(F * G, H, loop) - F(loop) * bracket(G, H, loop) - bracket(F, H, loop) * G(loop))


def functional_from_json(spec, half_dim: int = 1) -> IntegralFunctional:
    return IntegralFunctional.from_spec(spec, half_dim)


FunctionalLike = Union[IntegralFunctional, dict]


def as_functional(obj: FunctionalLike, half_dim: int = 1) -> IntegralFunctional:
    return obj if isinstance(obj, IntegralFunctional) else IntegralFunctional.from_spec(obj, half_dim)


def coordinate_functionals(half_dim: int = 1) -> Sequence[IntegralFunctional]:
    """``int i^* q_k eta_0`` and ``int i^* p_k eta_0`` for each k."""
    from .ambient import coordinate_symbols
    return [IntegralFunctional.linear(HamiltonianFn.from_expr(s, half_dim, name=str(s))) for s in coordinate_symbols(half_dim)]
