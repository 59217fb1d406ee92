"""JSON scenario files: parse to a :class:`Framework`, emit canonical text.

Layout (``version`` is mandatory, unknown keys are rejected everywhere)::

    {"version": 1, "name": "...", "dim": 4,
     "initial_state": [[re, im], ...],
     "times": ["t0", "t1", ...],
     "unitaries": [<operator>, ...],
     "event_tree": {"label": "A", "projector": <operator>, "children": [...],
                    "branch": "coin", "choice": "heads"},
     "queries": [{"observed": "D1", "pivot": "B1", "antecedent": {"W2": "down"},
                  "outcomes": ["D1", "D2"]}]}

An ``<operator>`` is one of

    {"matrix": [[[re, im], ...], ...]}          dense, row-major
    {"sparse": [[i, j, re, im], ...]}           nonzero entries only
    {"vectors": [[[re, im], ...], ...]}         projector onto their span
    {"named": "spin-z-plus", "params": {...}}   see ``NAMED``
    {"tensor": [<operator>, ...]}               Kronecker product, left slowest
    {"complement": <operator>}                  I - P

Emission writes every float with ``repr`` so parse -> emit reproduces the
input byte for byte and the parsed framework has the same id as the original.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import hilbert as hb
from .errors import ChqError, ScenarioFileError
from .framework import EventNode, Framework, FrameworkSpec, build_framework
from .hilbert import Projector

VERSION = 1
DENSE_MAX_DIM = 32

TOP_KEYS = {"version", "name", "dim", "initial_state", "times", "unitaries", "event_tree", "queries"}
REQUIRED_TOP = {"version", "dim", "initial_state", "times", "unitaries", "event_tree"}
NODE_KEYS = {"label", "projector", "children", "branch", "choice"}
QUERY_KEYS = {"observed", "pivot", "antecedent", "outcomes"}


@dataclass(frozen=True)
class ScenarioFile:
    framework: Framework
    queries: tuple[dict, ...] = field(default_factory=tuple)


def _fail(where: str, msg: str):
    raise ScenarioFileError(f"{where}: {msg}" if where else msg)


def _keys(obj, allowed: set, where: str, required: set = frozenset()):
    if not isinstance(obj, dict):
        _fail(where, f"expected an object, got {type(obj).__name__}")
    extra = sorted(set(obj) - allowed)
    if extra:
        _fail(where, f"unknown field(s) {extra}")
    missing = sorted(set(required) - set(obj))
    if missing:
        _fail(where, f"missing field(s) {missing}")


def _complex(pair, where: str) -> complex:
    if (not isinstance(pair, list) or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
        _fail(where, f"expected [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _vector(entries, where: str) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        _fail(where, "expected a nonempty list of [re, im] pairs")
    return np.array([_complex(e, f"{where}[{k}]") for k, e in enumerate(entries)], dtype=complex)


# ---------------------------------------------------------------------------
# named constructors


def _spin_projector(params, where):
    theta = float(params.get("theta", 0.0))
    phi = float(params.get("phi", 0.0))
    sign = int(params.get("sign", 1))
    return hb.outer(hb.spin_state(theta, phi, sign))


def _basis_projector(params, where):
    try:
        d, k = int(params["dim"]), int(params["index"])
    except (KeyError, TypeError, ValueError):
        _fail(where, "basis needs integer params dim and index")
    return hb.outer(hb.basis(d, k))


def _coin(params, where):
    heads = _complex(params.get("heads", [2 ** -0.5, 0.0]), f"{where}.params.heads")
    tails = _complex(params.get("tails", [2 ** -0.5, 0.0]), f"{where}.params.tails")
    return hb.coin_unitary(heads, tails)


def _identity(params, where, dim):
    return np.eye(int(params.get("dim", dim)), dtype=complex)


def _zero(params, where, dim):
    d = int(params.get("dim", dim))
    return np.zeros((d, d), dtype=complex)


NAMED = {
    "identity": _identity,
    "zero": _zero,
    "spin": lambda p, w, d: _spin_projector(p, w),
    "basis": lambda p, w, d: _basis_projector(p, w),
    "coin": lambda p, w, d: _coin(p, w),
    **{name: (lambda v: lambda p, w, d: hb.outer(v))(v) for name, v in hb.SPIN_STATES.items()},
}


def _operator(obj, dim: int, where: str, *, projector: bool) -> np.ndarray:
    if not isinstance(obj, dict) or len(obj) == 0:
        _fail(where, "expected an operator object")
    forms = {"matrix", "sparse", "vectors", "named", "tensor", "complement"}
    kinds = set(obj) & forms
    if len(kinds) != 1:
        _fail(where, f"expected exactly one of {sorted(forms)}, got {sorted(obj)}")
    kind = kinds.pop()
    _keys(obj, {kind, "params"} if kind == "named" else {kind}, where)
    body = obj[kind]
    if kind == "matrix":
        if not isinstance(body, list) or not body:
            _fail(where, "matrix must be a list of rows")
        if not all(isinstance(r, list) and len(r) == len(body) for r in body):
            _fail(where, "matrix must be square")
        m = np.array([_vector(row, f"{where}.matrix[{i}]") for i, row in enumerate(body)])
    elif kind == "sparse":
        m = np.zeros((dim, dim), dtype=complex)
        if not isinstance(body, list):
            _fail(where, "sparse must be a list of [i, j, re, im]")
        for k, e in enumerate(body):
            if not isinstance(e, list) or len(e) != 4 or not all(isinstance(x, int) for x in e[:2]):
                _fail(f"{where}.sparse[{k}]", f"expected [i, j, re, im], got {e!r}")
            i, j = e[0], e[1]
            if not (0 <= i < dim and 0 <= j < dim):
                _fail(f"{where}.sparse[{k}]", f"index ({i}, {j}) outside dimension {dim}")
            m[i, j] = _complex(e[2:], f"{where}.sparse[{k}]")
    elif kind == "vectors":
        if not projector:
            _fail(where, "vectors form is only valid for projectors")
        vs = [_vector(v, f"{where}.vectors[{k}]") for k, v in enumerate(body or [])]
        if not vs:
            _fail(where, "vectors must be nonempty")
        return hb.make_projector(vs).matrix
    elif kind == "named":
        make = NAMED.get(body)
        if make is None:
            _fail(where, f"unknown constructor {body!r}; known: {sorted(NAMED)}")
        params = obj.get("params", {})
        if not isinstance(params, dict):
            _fail(where, "params must be an object")
        m = make(params, where, dim)
    elif kind == "tensor":
        if not isinstance(body, list) or not body:
            _fail(where, "tensor must be a nonempty list of factors")
        factors = [_operator(f, dim, f"{where}.tensor[{k}]", projector=projector) for k, f in enumerate(body)]
        m = hb.tensor(*factors)
    else:
        if not projector:
            _fail(where, "complement is only valid for projectors")
        inner = _operator(body, dim, f"{where}.complement", projector=True)
        m = np.eye(inner.shape[0], dtype=complex) - inner
    return np.asarray(m, dtype=complex)


def _node(obj, dim: int, where: str) -> EventNode:
    _keys(obj, NODE_KEYS, where, {"label", "projector"})
    label = obj["label"]
    if not isinstance(label, str):
        _fail(where, "label must be a string")
    m = _operator(obj["projector"], dim, f"{where}.projector", projector=True)
    if m.shape != (dim, dim):
        _fail(f"{where}.projector", f"shape {m.shape} does not match dim {dim}")
    try:
        p = Projector(m)
    except ChqError as e:
        _fail(f"{where}.projector", str(e))
    kids = obj.get("children", [])
    if not isinstance(kids, list):
        _fail(where, "children must be a list")
    children = tuple(_node(c, dim, f"{where}.children[{k}]") for k, c in enumerate(kids))
    for key in ("branch", "choice"):
        if obj.get(key) is not None and not isinstance(obj[key], str):
            _fail(where, f"{key} must be a string")
    return EventNode(label, p, children, obj.get("branch"), obj.get("choice"))


def _query(obj, where: str) -> dict:
    _keys(obj, QUERY_KEYS, where, {"observed", "pivot"})
    ante = obj.get("antecedent", {})
    if not isinstance(ante, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in ante.items()):
        _fail(where, "antecedent must map node names to child labels")
    out = {"observed": str(obj["observed"]), "pivot": str(obj["pivot"]), "antecedent": dict(ante)}
    if "outcomes" in obj:
        if not isinstance(obj["outcomes"], list):
            _fail(where, "outcomes must be a list")
        out["outcomes"] = [str(o) for o in obj["outcomes"]]
    return out


def from_dict(doc) -> ScenarioFile:
    _keys(doc, TOP_KEYS, "", REQUIRED_TOP)
    if doc["version"] != VERSION:
        _fail("version", f"unsupported version {doc['version']!r}")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        _fail("dim", f"expected a positive integer, got {dim!r}")
    if dim > hb.DIM_CAP:
        _fail("dim", f"{dim} exceeds the cap of {hb.DIM_CAP}")
    psi = _vector(doc["initial_state"], "initial_state")
    if psi.shape[0] != dim:
        _fail("initial_state", f"length {psi.shape[0]} does not match dim {dim}")
    times = doc["times"]
    if not isinstance(times, list) or not all(isinstance(t, str) for t in times):
        _fail("times", "expected a list of strings")
    if not isinstance(doc["unitaries"], list):
        _fail("unitaries", "expected a list")
    us = []
    for k, u in enumerate(doc["unitaries"]):
        m = _operator(u, dim, f"unitaries[{k}]", projector=False)
        if m.shape != (dim, dim):
            _fail(f"unitaries[{k}]", f"shape {m.shape} does not match dim {dim}")
        us.append(m)
    root = _node(doc["event_tree"], dim, "event_tree")
    queries = tuple(_query(q, f"queries[{k}]") for k, q in enumerate(doc.get("queries", [])))
    name = doc.get("name", "scenario")
    try:
        f = build_framework(FrameworkSpec(str(name), psi, tuple(times), tuple(us), root))
    except ChqError as e:
        raise ScenarioFileError(f"{e.code}: {e}") from e
    return ScenarioFile(f, queries)


def loads(text: str) -> ScenarioFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        lines = text.splitlines()
        context = lines[e.lineno - 1].strip() if 0 < e.lineno <= len(lines) else "<end of input>"
        raise ScenarioFileError(f"line {e.lineno}, column {e.colno}: {e.msg}: {context[:80]}") from e
    return from_dict(doc)


def load(path) -> ScenarioFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ScenarioFileError(f"cannot read {path}: {e.strerror}") from e
    return loads(text)


# ---------------------------------------------------------------------------
# emission


def _pair(z) -> list[float]:
    return [float(z.real), float(z.imag)]


def _emit_operator(m: np.ndarray) -> dict:
    dim = m.shape[0]
    if np.array_equal(m, np.eye(dim)):
        return {"named": "identity"}
    if dim <= DENSE_MAX_DIM:
        return {"matrix": [[_pair(z) for z in row] for row in m]}
    rows, cols = np.nonzero(m)
    return {"sparse": [[int(i), int(j), *_pair(m[i, j])] for i, j in zip(rows, cols)]}


def _emit_node(n: EventNode) -> dict:
    out = {"label": n.label, "projector": _emit_operator(n.projector.matrix)}
    if n.branch is not None:
        out["branch"] = n.branch
    if n.choice is not None:
        out["choice"] = n.choice
    if n.children:
        out["children"] = [_emit_node(c) for c in n.children]
    return out


def to_dict(f: Framework, queries=()) -> dict:
    doc = {
        "version": VERSION,
        "name": f.name,
        "dim": f.dim,
        "initial_state": [_pair(z) for z in f.initial_state],
        "times": list(f.times),
        "unitaries": [_emit_operator(u) for u in f.step_unitaries],
        "event_tree": _emit_node(f.root),
    }
    if queries:
        doc["queries"] = [dict(q) for q in queries]
    return doc


def _flat(x) -> bool:
    """Scalars, or lists of scalars / lists of lists of scalars: printed on one line."""
    if isinstance(x, list):
        return all(not isinstance(y, (list, dict)) or (isinstance(y, list) and all(
            not isinstance(z, (list, dict)) for z in y)) for y in x)
    return not isinstance(x, dict)


def _render(x, indent: int) -> str:
    pad, inner = " " * indent, " " * (indent + 1)
    if isinstance(x, dict):
        if all(not isinstance(v, (list, dict)) for v in x.values()):
            return json.dumps(x)
        items = [f"{inner}{json.dumps(k)}: {_render(v, indent + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, list):
        if _flat(x):
            return json.dumps(x, separators=(",", ":"))
        if not x:
            return "[]"
        items = [f"{inner}{_render(v, indent + 1)}" for v in x]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(x)


def dumps(f: Framework, queries=()) -> str:
    """Canonical text: one matrix row or entry list per line, floats in full precision."""
    return _render(to_dict(f, queries), 0) + "\n"
