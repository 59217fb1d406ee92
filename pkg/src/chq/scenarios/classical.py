"""Embedding of a classical history tree as a diagonal framework."""

from __future__ import annotations

import numpy as np

from ..framework import EventNode, Framework, FrameworkSpec, build_framework
from ..hilbert import Projector
from ..tree import TreeNode, WeightedHistoryTree


def diagonal_framework(tree: WeightedHistoryTree, name: str | None = None) -> Framework:
    """Represent ``tree`` by one basis vector per leaf, identity dynamics and diagonal events.

    The initial amplitude of a leaf is the square root of its weight. A
    child's event is the set of leaves below it; the first child also absorbs
    everything outside its parent so that siblings always sum to the
    identity. Chain vectors then reduce to leaf indicators, and the compiled
    tree reproduces the original leaf weights.
    """
    leaves = tree.leaves()
    dim = len(leaves)
    index = {path: k for k, (path, _) in enumerate(leaves)}
    depths = {len(p) for p in index}
    if len(depths) != 1:
        raise ValueError("diagonal embedding needs all leaves at one depth")
    depth = depths.pop() - 1
    total = tree.total
    psi = np.sqrt(np.array([n.weight / total for _, n in leaves], dtype=complex))

    def below(path):
        return [k for p, k in index.items() if p[: len(path)] == path]

    def diag(ks) -> Projector:
        d = np.zeros(dim)
        d[ks] = 1.0
        return Projector(np.diag(d).astype(complex))

    def go(path, node: TreeNode, ks) -> EventNode:
        kids = []
        outside = sorted(set(range(dim)) - set(below(path)))
        for i, c in enumerate(node.children):
            cp = path + (c.label,)
            mine = below(cp)
            kids.append(go(cp, c, mine + outside if i == 0 else mine))
        return EventNode(node.label, diag(ks), tuple(kids), node.branch, node.choice)

    root = go((tree.root.label,), tree.root, list(range(dim)))
    eye = np.eye(dim, dtype=complex)
    spec = FrameworkSpec(name or f"diag[{tree.framework_id}]", psi, tree.times or tuple(f"t{k}" for k in range(depth + 1)),
                         [eye] * depth, root)
    return build_framework(spec)
