"""Random frameworks for property tests."""

import numpy as np

from chq.framework import EventNode, FrameworkSpec, build_framework
from chq.hilbert import Projector, make_projector
from chq.scenarios.classical import diagonal_framework
from chq.tree import from_conditionals


def haar_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_decomposition(rng, dim):
    """Split a random orthonormal basis into contiguous groups."""
    u = haar_unitary(rng, dim)
    cuts = sorted(rng.choice(np.arange(1, dim), size=rng.integers(0, dim), replace=False)) if dim > 1 else []
    bounds = [0, *cuts, dim]
    return [make_projector([u[:, k] for k in range(a, b)]) for a, b in zip(bounds, bounds[1:])]


def random_framework(rng, dim=None, depth=None, name="rand"):
    """Branch-dependent framework with random unitaries and random decompositions per node."""
    dim = dim or int(rng.integers(2, 5))
    depth = depth or int(rng.integers(1, 4))
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    us = [haar_unitary(rng, dim) for _ in range(depth)]
    counter = iter(range(100_000))

    def node(level, proj):
        label = f"e{next(counter)}"
        if level == depth:
            return EventNode(label, proj)
        kids = tuple(node(level + 1, p) for p in random_decomposition(rng, dim))
        return EventNode(label, proj, kids)

    root = node(0, Projector.identity(dim))
    return build_framework(FrameworkSpec(name, psi, [f"t{k}" for k in range(depth + 1)], us, root))


def diagonal_from_spec(spec, name="diag"):
    tree = from_conditionals(name, spec)
    return tree, diagonal_framework(tree, name)


def random_query(rnd, tree):
    """Observed positive leaf, an ancestor pivot, and random branch constraints at or below it."""
    # stay clear of the engine's 1e-12 zero-weight floor
    leaves = [p for p, n in tree.leaves() if n.weight > 1e-9 * tree.total]
    observed = rnd.choice(leaves)
    pivot = observed[: rnd.randint(1, len(observed))]
    internal = [(p, n) for p, n in tree.walk() if n.children and p[: len(pivot)] == pivot]
    constraints = {}
    for p, n in internal:
        if rnd.random() < 0.4:
            constraints[p] = rnd.choice(n.children).label
    return observed, pivot, constraints
