"""Weighted history trees.

A node is addressed by its label path from the root, e.g. ``("A", "B1", "D1")``.
Sibling labels are distinct, so paths are unique within a tree. A
:class:`NodeRef` pairs a path with the id of the tree's framework; the
counterfactual engine refuses to combine refs carrying different ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import AmbiguousNode, InvalidProbability, UnknownNode

Path = tuple[str, ...]


@dataclass(frozen=True)
class TreeNode:
    label: str
    weight: float
    children: tuple["TreeNode", ...] = ()
    branch: str | None = None  # name of the chance event that splits the children
    choice: str | None = None  # this node's outcome name under the parent's branch

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def child(self, name: str) -> "TreeNode | None":
        for c in self.children:
            if c.label == name:
                return c
        for c in self.children:
            if c.choice == name:
                return c
        return None


def make_node(label, children=(), weight=None, branch=None, choice=None) -> TreeNode:
    """Build a node; internal weights are the exact sum of the children's."""
    children = tuple(children)
    if children:
        weight = math.fsum(c.weight for c in children)
    elif weight is None:
        raise ValueError(f"leaf {label!r} needs a weight")
    return TreeNode(label, float(weight), children, branch, choice)


@dataclass(frozen=True)
class NodeRef:
    tree_id: str
    path: Path

    def __str__(self) -> str:
        return "/".join(self.path)

    @property
    def depth(self) -> int:
        return len(self.path) - 1


def is_prefix(a: Path, b: Path) -> bool:
    """True when ``a`` is an ancestor of ``b`` or equal to it."""
    return len(a) <= len(b) and b[: len(a)] == a


@dataclass(frozen=True)
class WeightedHistoryTree:
    framework_id: str
    root: TreeNode
    times: tuple[str, ...] = ()

    # -- navigation -----------------------------------------------------
    def node(self, path: Path) -> TreeNode:
        path = tuple(path)
        if not path or path[0] != self.root.label:
            raise UnknownNode(f"path {'/'.join(path)!r} does not start at root {self.root.label!r}")
        n = self.root
        for label in path[1:]:
            nxt = next((c for c in n.children if c.label == label), None)
            if nxt is None:
                raise UnknownNode(f"no node {'/'.join(path)!r} in tree {self.framework_id}")
            n = nxt
        return n

    def ref(self, path: Path) -> NodeRef:
        self.node(path)
        return NodeRef(self.framework_id, tuple(path))

    def walk(self) -> Iterator[tuple[Path, TreeNode]]:
        stack = [((self.root.label,), self.root)]
        while stack:
            path, n = stack.pop()
            yield path, n
            for c in reversed(n.children):
                stack.append((path + (c.label,), c))

    def leaves(self) -> list[tuple[Path, TreeNode]]:
        return [(p, n) for p, n in self.walk() if n.is_leaf]

    def leaf_weights(self) -> dict[Path, float]:
        return {p: n.weight for p, n in self.leaves()}

    @property
    def total(self) -> float:
        return self.root.weight

    def find(self, name: str) -> list[Path]:
        """Paths of all nodes labeled ``name``."""
        return [p for p, n in self.walk() if n.label == name]

    def find_branch(self, name: str) -> list[Path]:
        return [p for p, n in self.walk() if n.branch == name]

    def resolve(self, name: str, *, below: Path | None = None, above: Path | None = None,
                positive: bool = False) -> NodeRef:
        """Turn a user-facing node name into a ref.

        ``name`` is either a ``/``-separated path from the root or a bare label.
        Ambiguous labels are narrowed to descendants of ``below``, then to
        ancestors of ``above``, then (if ``positive``) to nodes of positive
        weight; anything still ambiguous is an error.
        """
        if "/" in name:
            return self.ref(tuple(name.split("/")))
        cands = self.find(name)
        if not cands:
            raise UnknownNode(f"no node labeled {name!r} in tree {self.framework_id}")
        for keep in (
            (lambda p: below is None or is_prefix(below, p)),
            (lambda p: above is None or is_prefix(p, above)),
            (lambda p: not positive or self.node(p).weight > 0),
        ):
            if len(cands) > 1:
                narrowed = [p for p in cands if keep(p)]
                cands = narrowed or cands
        if len(cands) > 1:
            opts = ", ".join("/".join(p) for p in cands)
            raise AmbiguousNode(f"label {name!r} is ambiguous: {opts}")
        return NodeRef(self.framework_id, cands[0])

    # -- construction helpers -------------------------------------------
    def rescaled(self, factor: float) -> "WeightedHistoryTree":
        def go(n: TreeNode) -> TreeNode:
            if n.is_leaf:
                return make_node(n.label, weight=n.weight * factor, branch=n.branch, choice=n.choice)
            return make_node(n.label, [go(c) for c in n.children], branch=n.branch, choice=n.choice)

        return WeightedHistoryTree(self.framework_id, go(self.root), self.times)

    def same_shape_and_weights(self, other: "WeightedHistoryTree", tol: float = 0.0) -> bool:
        a, b = self.leaf_weights(), other.leaf_weights()
        return a.keys() == b.keys() and all(abs(a[k] - b[k]) <= tol for k in a)

    def to_dict(self) -> dict:
        def go(n: TreeNode) -> dict:
            d = {"label": n.label, "weight": n.weight}
            if n.branch is not None:
                d["branch"] = n.branch
            if n.choice is not None:
                d["choice"] = n.choice
            if n.children:
                d["children"] = [go(c) for c in n.children]
            return d

        return {"framework_id": self.framework_id, "times": list(self.times), "root": go(self.root)}


def from_conditionals(framework_id: str, spec: dict, times=()) -> WeightedHistoryTree:
    """Build a classical tree from nested ``{label, p, branch, choice, children}`` dicts.

    ``p`` is the probability of a node given its parent (the root's is 1).
    Leaf weights are products of conditionals along the path.
    """

    def go(d: dict, mass: float) -> TreeNode:
        kids = d.get("children", [])
        if kids:
            ps = [float(k.get("p", 1.0)) for k in kids]
            if any(p < 0 or p > 1 for p in ps) or abs(math.fsum(ps) - 1.0) > 1e-12:
                raise InvalidProbability(f"branch probabilities under {d['label']!r} must lie in [0,1] and sum to 1: {ps}")
            return make_node(d["label"], [go(k, mass * p) for k, p in zip(kids, ps)],
                             branch=d.get("branch"), choice=d.get("choice"))
        return make_node(d["label"], weight=mass, branch=d.get("branch"), choice=d.get("choice"))

    return WeightedHistoryTree(framework_id, go(spec, 1.0), tuple(times))
