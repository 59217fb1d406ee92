"""Pivot-based counterfactual queries on weighted history trees.

Procedure: walk back from the observed node to the pivot, then forward again.
Below the pivot every unconstrained node splits its probability mass among its
children in proportion to their weights; a node named in the antecedent sends
all of its mass to the required child instead. A constrained node that lies
off the forward path imposes nothing. The observed node matters only through
fixing the root-to-pivot prefix, which is why null counterfactuals (antecedent
equal to what happened) can still have spread-out answers.

All node refs in one query must come from one tree; mixing trees raises
:class:`SingleFrameworkViolation`.
"""

from __future__ import annotations

import fnmatch
import math
from dataclasses import dataclass, field
from typing import Callable, Collection, Mapping

from .errors import (
    AmbiguousNode,
    InconsistentFramework,
    MalformedAntecedent,
    OutcomesNotAntichain,
    PivotNotAncestor,
    SingleFrameworkViolation,
    UnknownNode,
    ZeroWeightAntecedent,
    ZeroWeightPivot,
)
from .framework import DEFAULT_TOL, check_consistency, compile_tree
from .tree import NodeRef, Path, TreeNode, WeightedHistoryTree, is_prefix

ZERO_TOL = 1e-12
ONE_TOL = 1e-9


@dataclass(frozen=True)
class Antecedent:
    constraints: Mapping[NodeRef, str] = field(default_factory=dict)

    def refs(self) -> list[NodeRef]:
        return list(self.constraints)


@dataclass(frozen=True)
class CounterfactualQuery:
    tree: WeightedHistoryTree
    observed: NodeRef
    pivot: NodeRef
    antecedent: Antecedent = field(default_factory=Antecedent)
    outcomes: tuple[NodeRef, ...] | None = None


class CheckedQuery:
    """A query that passed :func:`validate_query`; only that function makes these."""

    __slots__ = ("query", "constraints", "outcome_paths")

    def __init__(self, query: CounterfactualQuery, constraints: dict[Path, str], outcome_paths, _token=None):
        if _token is not _TOKEN:
            raise TypeError("CheckedQuery is created by validate_query")
        self.query = query
        self.constraints = constraints
        self.outcome_paths = outcome_paths


_TOKEN = object()


@dataclass(frozen=True)
class CounterfactualAnswer:
    distribution: dict[NodeRef, float]
    null_flag: bool
    pivot: NodeRef
    observed: NodeRef
    residual: float = 0.0  # mass that reached no listed outcome

    def by_label(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for ref, p in self.distribution.items():
            out[ref.path[-1]] = out.get(ref.path[-1], 0.0) + p
        return dict(sorted(out.items()))

    def probability(self, accept: Callable[[str], bool]) -> float:
        return math.fsum(p for ref, p in self.distribution.items() if accept(ref.path[-1]))


def validate_query(q: CounterfactualQuery) -> CheckedQuery:
    tid = q.tree.framework_id
    refs = [q.observed, q.pivot, *q.antecedent.refs(), *(q.outcomes or ())]
    foreign = sorted({r.tree_id for r in refs if r.tree_id != tid})
    if foreign:
        raise SingleFrameworkViolation(
            f"query on framework {tid} uses nodes from {', '.join(foreign)}; "
            "a counterfactual argument must stay within a single framework"
        )
    for r in refs:
        q.tree.node(r.path)
    if not is_prefix(q.pivot.path, q.observed.path):
        raise PivotNotAncestor(f"pivot {q.pivot} is not an ancestor of observed {q.observed}")
    constraints: dict[Path, str] = {}
    for ref, want in q.antecedent.constraints.items():
        if not is_prefix(q.pivot.path, ref.path):
            raise MalformedAntecedent(f"antecedent node {ref} does not lie at or after pivot {q.pivot}")
        node = q.tree.node(ref.path)
        child = node.child(want)
        if child is None:
            opts = [c.label for c in node.children]
            raise MalformedAntecedent(f"{want!r} is not a child of {ref} (children: {opts})")
        constraints[ref.path] = child.label
    outcome_paths = None
    if q.outcomes is not None:
        outcome_paths = [r.path for r in q.outcomes]
        for i, a in enumerate(outcome_paths):
            for b in outcome_paths[i + 1:]:
                if is_prefix(a, b) or is_prefix(b, a):
                    raise OutcomesNotAntichain(f"outcomes {'/'.join(a)} and {'/'.join(b)} are nested")
        outcome_paths = set(outcome_paths)
    return CheckedQuery(q, constraints, outcome_paths, _token=_TOKEN)


def evaluate(cq: CheckedQuery, zero_tol: float = ZERO_TOL) -> CounterfactualAnswer:
    if not isinstance(cq, CheckedQuery):
        raise TypeError("evaluate needs a CheckedQuery from validate_query")
    q = cq.query
    tree = q.tree
    floor = zero_tol * tree.total
    pivot = tree.node(q.pivot.path)
    if pivot.weight <= floor:
        raise ZeroWeightPivot(f"pivot {q.pivot} has probability {pivot.weight:.3g}")

    dist: dict[Path, float] = {}
    residual = 0.0
    stack: list[tuple[Path, TreeNode, float]] = [(q.pivot.path, pivot, 1.0)]
    while stack:
        path, node, mass = stack.pop()
        if cq.outcome_paths is None:
            hit = node.is_leaf
        else:
            hit = path in cq.outcome_paths
        if hit:
            dist[path] = dist.get(path, 0.0) + mass
            continue
        if node.is_leaf:
            residual += mass
            continue
        want = cq.constraints.get(path)
        if want is not None:
            child = next(c for c in node.children if c.label == want)
            if child.weight <= floor:
                raise ZeroWeightAntecedent(
                    f"branch {want!r} at {'/'.join(path)} has probability zero; the counterfactual is undefined"
                )
            stack.append((path + (want,), child, mass))
            continue
        for c in node.children:
            if c.weight > floor:
                stack.append((path + (c.label,), c, mass * c.weight / node.weight))

    null = all(
        not is_prefix(p, q.observed.path) or p == q.observed.path or q.observed.path[len(p)] == want
        for p, want in cq.constraints.items()
    )
    tid = tree.framework_id
    distribution = {NodeRef(tid, p): m for p, m in sorted(dist.items()) if m > 0}
    return CounterfactualAnswer(distribution, null, q.pivot, q.observed, residual)


# ---------------------------------------------------------------------------
# name-based entry points


def _matching(tree: WeightedHistoryTree, name: str, below: Path) -> list[Path]:
    if "/" in name:
        return [tree.ref(tuple(name.split("/"))).path]
    hits = sorted(set(tree.find_branch(name)) | set(tree.find(name)))
    return [p for p in hits if is_prefix(below, p)]


def resolve_antecedent(tree: WeightedHistoryTree, pivot: NodeRef, spec: Mapping[str, str]) -> Antecedent:
    """Expand ``{branch-or-label: choice}`` into constraints on every matching node below the pivot."""
    out: dict[NodeRef, str] = {}
    for key, want in spec.items():
        paths = [p for p in _matching(tree, key, pivot.path) if not tree.node(p).is_leaf]
        if not paths:
            raise MalformedAntecedent(f"no branching node named {key!r} at or after pivot {pivot}")
        for p in paths:
            out[NodeRef(tree.framework_id, p)] = want
    return Antecedent(out)


def build_query(tree: WeightedHistoryTree, observed: str | NodeRef, pivot: str | NodeRef,
                antecedent: Mapping[str, str] | Antecedent | None = None,
                outcomes: Collection[str | NodeRef] | None = None) -> CounterfactualQuery:
    if isinstance(pivot, NodeRef):
        piv = pivot
    else:
        try:
            piv = tree.resolve(pivot)
        except AmbiguousNode:
            piv = None
    if isinstance(observed, NodeRef):
        obs = observed
    else:
        obs = tree.resolve(observed, below=piv.path if piv else None, positive=True)
    if piv is None:
        piv = tree.resolve(pivot, above=obs.path)
    if isinstance(antecedent, Antecedent):
        ante = antecedent
    else:
        ante = resolve_antecedent(tree, piv, antecedent or {})
    outs = None
    if outcomes is not None:
        outs = []
        for o in outcomes:
            if isinstance(o, NodeRef):
                outs.append(o)
                continue
            paths = _matching(tree, o, piv.path)
            paths = [p for p in paths if tree.node(p).label == o or "/" in o]
            if not paths:
                raise UnknownNode(f"no outcome node {o!r} at or after pivot {piv}")
            outs.extend(NodeRef(tree.framework_id, p) for p in paths)
        outs = tuple(outs)
    return CounterfactualQuery(tree, obs, piv, ante, outs)


def counterfactual(tree: WeightedHistoryTree, observed, pivot, antecedent=None, outcomes=None) -> CounterfactualAnswer:
    return evaluate(validate_query(build_query(tree, observed, pivot, antecedent, outcomes)))


def label_predicate(consequent) -> Callable[[str], bool]:
    """Callables pass through; a string or collection of strings is read as glob patterns over labels."""
    if callable(consequent):
        return consequent
    pats = [consequent] if isinstance(consequent, str) else list(consequent)
    return lambda label: any(fnmatch.fnmatchcase(label, p) for p in pats)


def supports_inference(f, observed, pivot, antecedent, consequent, *, mode: str = "medium",
                       tol: float | None = None, outcomes=None) -> bool:
    """True iff, in framework ``f``, the query forces the consequent with probability one."""
    report = check_consistency(f, mode, DEFAULT_TOL if tol is None else tol)
    if not report.passed:
        raise InconsistentFramework(f"framework {f.id} is not consistent; no inference can be drawn from it")
    tree = compile_tree(f, report)
    answer = counterfactual(tree, observed, pivot, antecedent, outcomes)
    return abs(answer.probability(label_predicate(consequent)) - 1.0) <= ONE_TOL
