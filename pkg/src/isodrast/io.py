"""JSON input formats for loops, tangents, metric fields and functionals."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .errors import SchemaError
from .loops import LoopEmbedding, TangentVector, Weighting
from .metrics import MetricField, MomentumField, MetricTangent

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM}
_MAT = {"type": "array", "items": _VEC}

LOOP_SCHEMA = {
    "type": "object",
    "required": ["half_dim", "samples"],
    "properties": {
        "half_dim": {"type": "integer", "minimum": 1},
        "samples": {"type": "array", "items": _VEC, "minItems": 1},
        "weighting": {
            "type": "object",
            "required": ["values"],
            "properties": {
                "kind": {"enum": ["unit_mass", "zero_mass", "positive_unit_mass"]},
                "values": _VEC,
            },
        },
        "tangents": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"X": _MAT, "vartheta": _VEC},
            },
        },
    },
}

METRIC_SCHEMA = {
    "type": "object",
    "required": ["base_dim", "grid", "signature", "cells"],
    "properties": {
        "base_dim": {"type": "integer", "minimum": 1},
        "grid": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "signature": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
        "cells": {"type": "array", "items": _VEC},
        "momentum": {"type": "array", "items": _VEC},
    },
}

_TREE = {"anyOf": [{"type": "string"}, {"type": "number"}, {"type": "object", "required": ["op"]}]}

FUNCTIONAL_SCHEMA = {
    "type": "object",
    "required": ["outer", "inner"],
    "properties": {"outer": _TREE, "inner": {"type": "array", "items": {"type": "string"}, "minItems": 1}},
}


def _line_of(text: Optional[str], path) -> Optional[int]:
    """Best-effort line of the innermost named key of a JSON path."""
    if not text:
        return None
    keys = [p for p in path if isinstance(p, str)]
    pos = 0
    for key in keys:
        found = text.find(f'"{key}"', pos)
        if found < 0:
            break
        pos = found
    return text.count("\n", 0, pos) + 1


def validate(doc, schema: dict, text: Optional[str] = None) -> None:
    """Raise :class:`SchemaError` naming the first offending field and line."""
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        field = ".".join(str(p) for p in path) or "<root>"
        raise SchemaError(err.message, line=_line_of(text, path), field=field)


def load_json(path) -> tuple[dict, str]:
    text = Path(path).read_text()
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, line=exc.lineno, field=None) from exc


def _array(values, field: str, text: Optional[str]) -> np.ndarray:
    try:
        return np.asarray(values, dtype=float)
    except ValueError as exc:
        raise SchemaError(f"ragged array: {exc}", line=_line_of(text, field.split(".")), field=field) from exc


def loop_from_dict(doc: dict, text: Optional[str] = None):
    """Returns ``(loop, weighting, tangents)``; missing tangents are zero."""
    validate(doc, LOOP_SCHEMA, text)
    n = doc["half_dim"]
    x = _array(doc["samples"], "samples", text)
    if x.ndim != 2 or x.shape[1] != 2 * n:
        raise SchemaError(f"samples must be N x {2 * n}", line=_line_of(text, ["samples"]), field="samples")
    N = x.shape[0]
    loop = LoopEmbedding(x)
    if "weighting" in doc:
        w = _array(doc["weighting"]["values"], "weighting.values", text)
        if w.shape != (N,):
            raise SchemaError(f"weighting has {w.size} values, expected {N}",
                              line=_line_of(text, ["weighting", "values"]), field="weighting.values")
        eta = Weighting(w, doc["weighting"].get("kind", "positive_unit_mass"))
    else:
        eta = Weighting.uniform(N)
    tangents = []
    for j, t in enumerate(doc.get("tangents", [])):
        X = _array(t.get("X") or np.zeros((N, 2 * n)), f"tangents.{j}.X", text)
        th = _array(t.get("vartheta") or np.zeros(N), f"tangents.{j}.vartheta", text)
        if X.shape != (N, 2 * n) or th.shape != (N,):
            raise SchemaError(f"tangent {j} has the wrong shape", line=_line_of(text, ["tangents", "X"]),
                              field=f"tangents.{j}")
        tangents.append(TangentVector(X, th, mass_tol=1e-9))
    while len(tangents) < 2:
        tangents.append(TangentVector.zero(N, 2 * n))
    return loop, eta, tangents


def loop_to_dict(loop: LoopEmbedding, eta: Optional[Weighting] = None, tangents=()) -> dict:
    doc = {"half_dim": loop.half_dim, "samples": loop.samples.tolist()}
    if eta is not None:
        doc["weighting"] = {"kind": eta.kind, "values": eta.samples.tolist()}
    if tangents:
        doc["tangents"] = [{"X": t.X.tolist(), "vartheta": t.vartheta.tolist()} for t in tangents]
    return doc


def metric_from_dict(doc: dict, text: Optional[str] = None):
    """Returns ``(g, h)``; h defaults to zero."""
    validate(doc, METRIC_SCHEMA, text)
    d = doc["base_dim"]
    cells = _array(doc["cells"], "cells", text)
    if cells.ndim != 2 or cells.shape[1] != d * d:
        raise SchemaError(f"each cell must list {d * d} row-major entries", line=_line_of(text, ["cells"]), field="cells")
    if len(doc["grid"]) != d:
        raise SchemaError(f"grid must have {d} entries", line=_line_of(text, ["grid"]), field="grid")
    g = MetricField(cells.reshape(-1, d, d), tuple(doc["grid"]), tuple(doc["signature"]))
    if "momentum" in doc:
        m = _array(doc["momentum"], "momentum", text)
        if m.shape != cells.shape:
            raise SchemaError("momentum must match cells", line=_line_of(text, ["momentum"]), field="momentum")
        h = MomentumField(m.reshape(-1, d, d))
    else:
        h = MomentumField.zeros_like(g)
    return g, h


def metric_to_dict(g: MetricField, h: Optional[MomentumField] = None) -> dict:
    d = g.base_dim
    doc = {
        "base_dim": d,
        "grid": list(g.grid),
        "signature": list(g.signature),
        "cells": g.cells.reshape(-1, d * d).tolist(),
    }
    if h is not None:
        doc["momentum"] = h.cells.reshape(-1, d * d).tolist()
    return doc


def tangent_from_lists(k, l, d: int) -> MetricTangent:
    return MetricTangent(np.asarray(k, dtype=float).reshape(-1, d, d), np.asarray(l, dtype=float).reshape(-1, d, d))


def functional_spec(doc: dict, text: Optional[str] = None) -> dict:
    validate(doc, FUNCTIONAL_SCHEMA, text)
    return doc
