"""Frameworks of quantum histories and their decoherence functional.

A framework is a pure initial state, a time grid t0 < ... < tn, the step
unitaries U(t_k, t_{k-1}) and a rooted event tree. The root carries the
identity at t0; every depth-k node carries a projector at t_k, and the
children of any node form a projective decomposition of the identity, so
refinements may differ from branch to branch.

For a history (root-to-leaf path) the chain vector is

    C|psi0> = P_n U_n ... P_1 U_1 |psi0>

and the decoherence functional is D(a, b) = <C_b psi0 | C_a psi0>.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import hilbert as hb
from .errors import (
    InconsistentFramework,
    InvalidDecomposition,
    NonUnitaryStep,
    NormalizationAnomaly,
    RaggedTree,
    UnknownHistory,
    UnnormalizedInitialState,
)
from .hilbert import ProjectiveDecomposition, Projector
from .tree import Path, TreeNode, WeightedHistoryTree, is_prefix, make_node

History = Path

DEFAULT_TOL = 1e-10
MAX_OFFENDERS = 50


@dataclass(frozen=True, eq=False)
class EventNode:
    label: str
    projector: Projector
    children: tuple["EventNode", ...] = ()
    branch: str | None = None
    choice: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class FrameworkSpec:
    name: str
    initial_state: np.ndarray
    times: Sequence[str]
    step_unitaries: Sequence[np.ndarray]
    event_tree: EventNode


@dataclass(frozen=True, eq=False)
class Framework:
    id: str
    name: str
    dim: int
    initial_state: np.ndarray
    times: tuple[str, ...]
    step_unitaries: tuple[np.ndarray, ...]
    root: EventNode

    @property
    def depth(self) -> int:
        return len(self.times) - 1

    def walk(self) -> Iterator[tuple[Path, EventNode]]:
        stack = [((self.root.label,), self.root)]
        while stack:
            path, n = stack.pop()
            yield path, n
            for c in reversed(n.children):
                stack.append((path + (c.label,), c))

    def histories(self) -> list[History]:
        return [p for p, n in self.walk() if not n.children]

    def node(self, path: Path) -> EventNode:
        path = tuple(path)
        if not path or path[0] != self.root.label:
            raise UnknownHistory(f"path {'/'.join(path)!r} not in framework {self.id}")
        n = self.root
        for label in path[1:]:
            n = next((c for c in n.children if c.label == label), None)
            if n is None:
                raise UnknownHistory(f"path {'/'.join(path)!r} not in framework {self.id}")
        return n

    def nodes_at(self, depth: int) -> list[tuple[Path, EventNode]]:
        return [(p, n) for p, n in self.walk() if len(p) == depth + 1]


# Decompositions already checked, keyed by projector identity. Generated
# catalogs reuse the same projector objects across many frameworks.
_checked_sets: dict[tuple, tuple[Projector, ...]] = {}


def _check_children(path: Path, node: EventNode, tol: float) -> None:
    labels = [c.label for c in node.children]
    if len(set(labels)) != len(labels):
        raise InvalidDecomposition(f"duplicate child labels under {'/'.join(path)}: {labels}")
    key = (tol,) + tuple(id(c.projector) for c in node.children)
    if key in _checked_sets:
        return
    d = ProjectiveDecomposition(tuple(labels), tuple(c.projector for c in node.children))
    rep = hb.validate_decomposition(d, tol)
    if not rep.passed:
        raise InvalidDecomposition(
            f"children of {'/'.join(path)} are not a projective decomposition "
            f"(orthogonality defect {rep.orthogonality_defect:.3g}, completeness defect {rep.completeness_defect:.3g})"
        )
    if len(_checked_sets) > 100_000:
        _checked_sets.clear()
    _checked_sets[key] = d.projectors


def _canon(a) -> bytes:
    # adding +0 folds -0.0 into 0.0, so signed zeros do not change an id
    return np.ascontiguousarray(np.asarray(a, dtype=complex) + 0j).tobytes()


def _digest(name, psi, times, unitaries, root) -> str:
    h = hashlib.sha256()
    h.update(name.encode())
    h.update(_canon(psi))
    h.update("\x1f".join(times).encode())
    for u in unitaries:
        h.update(_canon(u))
    seen: dict[int, bytes] = {}
    stack = [root]
    while stack:
        n = stack.pop()
        h.update(f"<{n.label}|{n.branch}|{n.choice}|{len(n.children)}>".encode())
        pid = id(n.projector)
        if pid not in seen:
            seen[pid] = hashlib.sha256(_canon(n.projector.matrix)).digest()
        h.update(seen[pid])
        stack.extend(reversed(n.children))
    return h.hexdigest()[:12]


def build_framework(spec: FrameworkSpec, tol: float = DEFAULT_TOL) -> Framework:
    psi = hb.ket(spec.initial_state)
    dim = psi.shape[0]
    if not hb.is_normalized(psi, hb.ALG_TOL):
        raise UnnormalizedInitialState(f"initial state has squared norm {np.vdot(psi, psi).real!r}")
    times = tuple(str(t) for t in spec.times)
    if len(times) < 1:
        raise RaggedTree("time grid is empty")
    if len(spec.step_unitaries) != len(times) - 1:
        raise NonUnitaryStep(f"{len(times)} times need {len(times) - 1} step unitaries, got {len(spec.step_unitaries)}")
    unitaries = []
    for k, u in enumerate(spec.step_unitaries):
        u = hb.operator(u)
        if u.shape[0] != dim or not hb.is_unitary(u, tol):
            raise NonUnitaryStep(f"step {times[k]}->{times[k + 1]} is not a unitary on dimension {dim}")
        unitaries.append(u)
    root = spec.event_tree
    if root.projector.dim != dim or hb.maxabs(root.projector.matrix - np.eye(dim)) > tol:
        raise InvalidDecomposition("root event must be the identity")
    n = len(times) - 1
    stack: list[tuple[Path, EventNode]] = [((root.label,), root)]
    while stack:
        path, node = stack.pop()
        if "/" in node.label or not node.label:
            raise InvalidDecomposition(f"invalid label {node.label!r}")
        if node.projector.dim != dim:
            raise InvalidDecomposition(f"projector at {'/'.join(path)} has dimension {node.projector.dim}, expected {dim}")
        depth = len(path) - 1
        if not node.children:
            if depth != n:
                raise RaggedTree(f"leaf {'/'.join(path)} at depth {depth}, expected {n}")
            continue
        if depth >= n:
            raise RaggedTree(f"node {'/'.join(path)} has children beyond the last time {times[-1]}")
        _check_children(path, node, tol)
        stack.extend((path + (c.label,), c) for c in node.children)
    fid = f"{spec.name}-{_digest(spec.name, psi, times, unitaries, root)}"
    return Framework(fid, spec.name, dim, psi, times, tuple(unitaries), root)


# ---------------------------------------------------------------------------
# chain vectors and the decoherence functional


def chain_vectors(f: Framework) -> dict[Path, np.ndarray]:
    """Truncated chain vectors for every node, leaves included."""
    out: dict[Path, np.ndarray] = {(f.root.label,): f.initial_state}
    stack = [((f.root.label,), f.root, f.initial_state)]
    while stack:
        path, node, v = stack.pop()
        if not node.children:
            continue
        evolved = f.step_unitaries[len(path) - 1] @ v
        for c in node.children:
            cv = c.projector.matrix @ evolved
            cp = path + (c.label,)
            out[cp] = cv
            stack.append((cp, c, cv))
    return out


def chain_vector(f: Framework, h: History) -> np.ndarray:
    h = tuple(h)
    f.node(h)
    v = f.initial_state
    n = f.root
    for k, label in enumerate(h[1:]):
        n = next(c for c in n.children if c.label == label)
        v = n.projector.matrix @ (f.step_unitaries[k] @ v)
    return v


def decoherence(f: Framework, a: History, b: History) -> complex:
    for h in (a, b):
        if f.node(h).children:
            raise UnknownHistory(f"{'/'.join(h)} is not a complete history")
    return complex(np.vdot(chain_vector(f, b), chain_vector(f, a)))


@dataclass(frozen=True)
class ConsistencyReport:
    framework_id: str
    mode: str
    tol: float
    max_offdiag: float
    offenders: tuple[tuple[tuple[History, History], complex], ...]
    passed: bool
    probabilities: dict[History, float] = field(hash=False)
    total: float = 1.0

    def to_dict(self) -> dict:
        return {
            "framework_id": self.framework_id,
            "mode": self.mode,
            "tol": self.tol,
            "pass": self.passed,
            "max_offdiag": self.max_offdiag,
            "total_probability": self.total,
            "offenders": [
                {"a": "/".join(a), "b": "/".join(b), "D": [d.real, d.imag]} for (a, b), d in self.offenders
            ],
            "probabilities": {"/".join(h): p for h, p in self.probabilities.items()},
        }


def decoherence_matrix(f: Framework) -> tuple[list[History], np.ndarray]:
    """All histories and the matrix ``M[i, j] = D(h_i, h_j)``."""
    chains = chain_vectors(f)
    hs = f.histories()
    c = np.column_stack([chains[h] for h in hs])
    # (C^H C)[i, j] = <C_i|C_j> = D(h_j, h_i)
    return hs, (c.conj().T @ c).T


def check_consistency(f: Framework, mode: str = "medium", tol: float = DEFAULT_TOL) -> ConsistencyReport:
    if mode not in ("medium", "weak"):
        raise ValueError(f"unknown consistency mode {mode!r}")
    hs, d = decoherence_matrix(f)
    mags = np.abs(d) if mode == "medium" else np.abs(d.real)
    iu, ju = np.triu_indices(len(hs), k=1)
    off = mags[iu, ju]
    max_off = float(off.max()) if off.size else 0.0
    bad = np.nonzero(off > tol)[0]
    bad = bad[np.argsort(-off[bad], kind="stable")][:MAX_OFFENDERS]
    offenders = tuple(((hs[iu[k]], hs[ju[k]]), complex(d[iu[k], ju[k]])) for k in bad)
    diag = d.diagonal().real
    if diag.min(initial=0.0) < -1e-9:
        raise NormalizationAnomaly(f"negative history weight {diag.min()!r}")
    probs = {h: max(float(p), 0.0) for h, p in zip(hs, diag)}
    return ConsistencyReport(
        framework_id=f.id,
        mode=mode,
        tol=tol,
        max_offdiag=max_off,
        offenders=offenders,
        passed=max_off <= tol,
        probabilities=probs,
        total=math.fsum(probs.values()),
    )


def compile_tree(f: Framework, report: ConsistencyReport) -> WeightedHistoryTree:
    """Attach the report's history probabilities to the framework's tree."""
    if report.framework_id != f.id:
        raise ValueError(f"report for {report.framework_id} does not belong to {f.id}")
    if not report.passed:
        raise InconsistentFramework(
            f"framework {f.id} fails {report.mode} consistency (max off-diagonal {report.max_offdiag:.3g} > {report.tol:g})"
        )
    total = report.total
    if abs(total - 1.0) > 1e-9:
        raise NormalizationAnomaly(f"history probabilities sum to {total!r}")

    def go(path: Path, n: EventNode) -> TreeNode:
        if not n.children:
            return make_node(n.label, weight=report.probabilities[path] / total, branch=n.branch, choice=n.choice)
        return make_node(n.label, [go(path + (c.label,), c) for c in n.children], branch=n.branch, choice=n.choice)

    return WeightedHistoryTree(f.id, go((f.root.label,), f.root), f.times)


def additivity_defect(f: Framework, node: Path, report: ConsistencyReport | None = None) -> float:
    """|squared norm of the truncated chain vector - sum of descendant leaf weights|."""
    node = tuple(node)
    f.node(node)
    if report is None:
        report = check_consistency(f)
    v = chain_vectors(f)[node]
    below = math.fsum(p for h, p in report.probabilities.items() if is_prefix(node, h))
    return abs(float(np.vdot(v, v).real) - below)


# ---------------------------------------------------------------------------
# compatibility


@dataclass(frozen=True)
class CompatibilityReport:
    compatible: bool
    clause: str  # "ok" | "structure" | "commutation" | "consistency"
    reason: str
    witness: dict | None = None
    refinement: ConsistencyReport | None = None

    DEFINITION = (
        "compatible := same dimension, time grid and dynamics; every pair of projectors at a common time "
        "commutes; and the common refinement (all nonzero products, branch by branch) is consistent"
    )

    def to_dict(self) -> dict:
        d = {"compatible": self.compatible, "clause": self.clause, "reason": self.reason,
             "definition": self.DEFINITION}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.refinement is not None:
            d["refinement_max_offdiag"] = self.refinement.max_offdiag
        return d


def common_refinement(f: Framework, g: Framework, tol: float = DEFAULT_TOL) -> Framework:
    """Product tree of two frameworks whose projectors commute timewise."""

    def go(a: EventNode, b: EventNode, label: str) -> EventNode:
        if a is f.root:
            proj = a.projector
        else:
            proj = Projector.from_hermitian(a.projector.matrix @ b.projector.matrix)
        kids = []
        for ca in a.children:
            for cb in b.children:
                prod = ca.projector.matrix @ cb.projector.matrix
                if hb.maxabs(prod) > tol:
                    kids.append(go(ca, cb, f"{ca.label}&{cb.label}"))
        return EventNode(label, proj, tuple(kids), branch=a.branch or b.branch)

    root = go(f.root, g.root, f.root.label)
    spec = FrameworkSpec(f"{f.name}&{g.name}", f.initial_state, f.times, f.step_unitaries, root)
    return build_framework(spec, tol)


def compatible(f: Framework, g: Framework, tol: float = DEFAULT_TOL, mode: str = "medium") -> CompatibilityReport:
    if f.dim != g.dim:
        return CompatibilityReport(False, "structure", f"dimensions differ ({f.dim} vs {g.dim})")
    if f.times != g.times:
        return CompatibilityReport(False, "structure", f"time grids differ ({f.times} vs {g.times})")
    if hb.maxabs(f.initial_state - g.initial_state) > tol:
        return CompatibilityReport(False, "structure", "initial states differ")
    for k, (u, v) in enumerate(zip(f.step_unitaries, g.step_unitaries)):
        if hb.maxabs(u - v) > tol:
            return CompatibilityReport(False, "structure", f"step unitaries differ at {f.times[k]}->{f.times[k + 1]}")
    # Only node pairs that meet in the refinement (nonzero product all the way
    # down) need to commute; nodes on disjoint branches never combine.
    level = [((f.root.label,), f.root, (g.root.label,), g.root)]
    for depth in range(1, f.depth + 1):
        nxt = []
        for pf, nf, pg, ng in level:
            for cf in nf.children:
                for cg in ng.children:
                    c = hb.commutator_norm(cf.projector.matrix, cg.projector.matrix)
                    qf, qg = pf + (cf.label,), pg + (cg.label,)
                    if c > tol:
                        witness = {"time": f.times[depth], "depth": depth, "f_node": "/".join(qf),
                                   "g_node": "/".join(qg), "commutator_norm": c}
                        return CompatibilityReport(
                            False, "commutation", f"projectors at {f.times[depth]} do not commute", witness
                        )
                    if hb.maxabs(cf.projector.matrix @ cg.projector.matrix) > tol:
                        nxt.append((qf, cf, qg, cg))
        level = nxt
    refined = common_refinement(f, g, tol)
    rep = check_consistency(refined, mode, tol)
    if not rep.passed:
        (a, b), dval = rep.offenders[0]
        witness = {"a": "/".join(a), "b": "/".join(b), "D": [dval.real, dval.imag]}
        return CompatibilityReport(False, "consistency", "common refinement is inconsistent", witness, rep)
    return CompatibilityReport(True, "ok", "projectors commute and the common refinement is consistent", None, rep)


def coarse_grain(f: Framework, parent: Path, merge: Sequence[str], label: str | None = None) -> Framework:
    """Merge sibling events under ``parent`` by summing their projectors.

    The merged node keeps the subtree of the first merged sibling, so the
    result is meaningful when the merged siblings are leaves or share a
    refinement.
    """
    parent = tuple(parent)
    f.node(parent)
    merge = list(merge)
    label = label or "+".join(merge)

    def go(path: Path, n: EventNode) -> EventNode:
        if path == parent:
            kept = [c for c in n.children if c.label not in merge]
            merged = [c for c in n.children if c.label in merge]
            if len(merged) != len(merge):
                raise UnknownHistory(f"cannot merge {merge} under {'/'.join(parent)}")
            proj = Projector(sum(c.projector.matrix for c in merged))
            new = EventNode(label, proj, merged[0].children, merged[0].branch, None)
            return EventNode(n.label, n.projector, tuple(kept) + (new,), n.branch, n.choice)
        return EventNode(n.label, n.projector, tuple(go(path + (c.label,), c) for c in n.children), n.branch, n.choice)

    root = go((f.root.label,), f.root)
    return build_framework(FrameworkSpec(f"{f.name}~cg", f.initial_state, f.times, f.step_unitaries, root))
