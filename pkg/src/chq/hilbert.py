"""Dense complex linear algebra for small Hilbert spaces.

Kets and operators are plain ``complex128`` numpy arrays (read-only once they
pass through the constructors here). Projectors and projective decompositions
are thin validated wrappers.

Index convention for tensor products: the left factor varies slowest, i.e.
``tensor(a, b)`` is ``np.kron(a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateSpan,
    DimensionCapExceeded,
    DimensionMismatch,
    NotAProjector,
)

DIM_CAP = 1024
ALG_TOL = 1e-12
DECOMP_TOL = 1e-10

Ket = np.ndarray
Operator = np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _check_dim(dim: int) -> None:
    if dim < 1:
        raise DimensionMismatch(f"dimension must be positive, got {dim}")
    if dim > DIM_CAP:
        raise DimensionCapExceeded(f"dimension {dim} exceeds cap {DIM_CAP}")


def maxabs(a: np.ndarray) -> float:
    """Max-entry norm; 0.0 for empty arrays."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def ket(amplitudes, normalize: bool = False) -> Ket:
    v = np.array(amplitudes, dtype=complex).reshape(-1)
    _check_dim(v.shape[0])
    if not np.all(np.isfinite(v)):
        raise ValueError("ket amplitudes must be finite")
    if normalize:
        n = np.linalg.norm(v)
        if n == 0:
            raise DegenerateSpan("cannot normalize the zero vector")
        v = v / n
    return _frozen(v)


def operator(entries) -> Operator:
    m = np.array(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"operator must be square, got shape {m.shape}")
    _check_dim(m.shape[0])
    if not np.all(np.isfinite(m)):
        raise ValueError("operator entries must be finite")
    return _frozen(m)


def basis(dim: int, index: int) -> Ket:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return ket(v)


def identity(dim: int) -> Operator:
    _check_dim(dim)
    return _frozen(np.eye(dim, dtype=complex))


def is_normalized(v: Ket, tol: float = ALG_TOL) -> bool:
    return abs(np.vdot(v, v).real - 1.0) <= tol


def spin_state(theta: float, phi: float = 0.0, sign: int = +1) -> Ket:
    """Spin-half state along the direction (theta, phi); ``sign=-1`` gives the antiparallel state."""
    if sign > 0:
        return ket([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return ket([-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)])


def direction_angles(w: Sequence[float]) -> tuple[float, float]:
    x, y, z = (float(c) for c in w)
    return float(np.arccos(np.clip(z, -1.0, 1.0))), float(np.arctan2(y, x))


SPIN_STATES = {
    "spin-z-plus": ket([1, 0]),
    "spin-z-minus": ket([0, 1]),
    "spin-x-plus": ket(np.array([1, 1]) / np.sqrt(2)),
    "spin-x-minus": ket(np.array([1, -1]) / np.sqrt(2)),
}


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of kets or operators, left factor slowest-varying."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    if len({f.ndim for f in factors}) != 1:
        raise DimensionMismatch("cannot mix kets and operators in a tensor product")
    out = reduce(np.kron, factors)
    _check_dim(out.shape[0])
    return _frozen(np.asarray(out, dtype=complex))


def dagger(m: Operator) -> Operator:
    return m.conj().T


def is_unitary(u: Operator, tol: float = DECOMP_TOL) -> bool:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return maxabs(dagger(u) @ u - np.eye(u.shape[0])) <= tol


def commutator_norm(a: Operator, b: Operator) -> float:
    return maxabs(a @ b - b @ a)


def outer(v: Ket, w: Ket | None = None) -> Operator:
    w = v if w is None else w
    return np.outer(v, np.conj(w))


class Projector:
    """Orthogonal projector, validated on construction and immutable afterwards."""

    __slots__ = ("matrix", "rank")

    def __init__(self, matrix, tol: float = ALG_TOL):
        m = operator(matrix)
        idem = maxabs(m @ m - m)
        herm = maxabs(m - dagger(m))
        if idem > tol or herm > tol:
            raise NotAProjector(f"not a projector: idempotency defect {idem:.3g}, hermiticity defect {herm:.3g}")
        tr = float(np.trace(m).real)
        rank = int(round(tr))
        if abs(tr - rank) > 1e-9:
            raise NotAProjector(f"trace {tr!r} is not an integer")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rank", rank)

    def __setattr__(self, name, value):
        raise AttributeError("Projector is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "Projector":
        return cls(identity(dim))

    @classmethod
    def zero(cls, dim: int) -> "Projector":
        return cls(np.zeros((dim, dim), dtype=complex))

    @classmethod
    def from_hermitian(cls, m: Operator, threshold: float = 0.5) -> "Projector":
        """Snap a nearly-idempotent Hermitian matrix onto the exact projector of its large eigenvalues."""
        h = (m + dagger(m)) / 2
        vals, vecs = np.linalg.eigh(h)
        keep = vecs[:, vals > threshold]
        return cls(keep @ dagger(keep))

    def complement(self) -> "Projector":
        return Projector(np.eye(self.dim) - self.matrix)

    def apply(self, v: Ket) -> Ket:
        return self.matrix @ v

    def __matmul__(self, other):
        if isinstance(other, Projector):
            return self.matrix @ other.matrix
        return self.matrix @ other

    def __repr__(self) -> str:
        return f"Projector(dim={self.dim}, rank={self.rank})"

    def close_to(self, other: "Projector", tol: float = DECOMP_TOL) -> bool:
        return self.dim == other.dim and maxabs(self.matrix - other.matrix) <= tol


def make_projector(vectors: Sequence[Ket]) -> Projector:
    """Orthogonal projector onto the span of linearly independent ``vectors``."""
    if len(vectors) == 0:
        raise DegenerateSpan("need at least one vector")
    vs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    dims = {v.shape[0] for v in vs}
    if len(dims) != 1:
        raise DimensionMismatch(f"vectors have differing dimensions {sorted(dims)}")
    _check_dim(dims.pop())
    norms = [np.linalg.norm(v) for v in vs]
    if min(norms) == 0:
        raise DegenerateSpan("zero vector in spanning set")
    a = np.column_stack([v / n for v, n in zip(vs, norms)])
    gram = np.linalg.det(dagger(a) @ a).real
    if gram <= 1e-12:
        raise DegenerateSpan(f"vectors are linearly dependent (Gram determinant {gram:.3g})")
    q, _ = np.linalg.qr(a)
    return Projector(q @ dagger(q))


def lift(op: np.ndarray, dims: Sequence[int], slots: Sequence[int]) -> np.ndarray:
    """Extend an operator on factors ``slots`` of a product space to the whole space.

    ``op`` acts on the factors listed in ``slots``, in that order; every other
    factor gets the identity.
    """
    dims = [int(d) for d in dims]
    slots = list(slots)
    rest = [i for i in range(len(dims)) if i not in slots]
    sub = [dims[i] for i in slots]
    if op.shape != (int(np.prod(sub)),) * 2:
        raise DimensionMismatch(f"operator shape {op.shape} does not fit factors {sub}")
    full = np.kron(op, np.eye(int(np.prod([dims[i] for i in rest])) if rest else 1))
    order = slots + rest
    n = len(dims)
    full = full.reshape([dims[i] for i in order] * 2)
    inverse = [order.index(i) for i in range(n)]
    full = full.transpose(inverse + [n + k for k in inverse])
    total = int(np.prod(dims))
    _check_dim(total)
    return _frozen(np.ascontiguousarray(full.reshape(total, total)))


def embed(p: Operator, dims: Sequence[int], slot: int) -> Operator:
    """Lift an operator on a single factor to the whole space."""
    return lift(p, dims, [slot])


@dataclass(frozen=True)
class ProjectiveDecomposition:
    labels: tuple[str, ...]
    projectors: tuple[Projector, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "projectors", tuple(self.projectors))
        if len(self.labels) != len(self.projectors):
            raise ValueError("labels and projectors differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"labels must be distinct: {self.labels}")

    @classmethod
    def from_basis(cls, labels: Sequence[str], columns: np.ndarray) -> "ProjectiveDecomposition":
        """One rank-1 projector per column of an orthonormal basis matrix."""
        return cls(tuple(labels), tuple(make_projector([columns[:, k]]) for k in range(columns.shape[1])))


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    orthogonality_defect: float
    completeness_defect: float
    worst_pair: tuple[int, int] | None = field(default=None)

    def __bool__(self) -> bool:
        return self.passed


def validate_decomposition(d: ProjectiveDecomposition, tol: float = DECOMP_TOL) -> ValidationReport:
    ps = [p.matrix for p in d.projectors]
    if not ps or len({p.shape for p in ps}) != 1:
        return ValidationReport(False, float("inf"), float("inf"))
    dim = ps[0].shape[0]
    ortho, worst = 0.0, None
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            defect = maxabs(ps[i] @ ps[j])
            if defect > ortho:
                ortho, worst = defect, (i, j)
    complete = maxabs(sum(ps) - np.eye(dim))
    return ValidationReport(ortho <= tol and complete <= tol, ortho, complete, worst)


def premeasurement_unitary(particle_bases: Sequence[np.ndarray]) -> Operator:
    """Measurement interaction on particle(2) ⊗ config(len(bases)) ⊗ pointer(3).

    Pointer states are (ready, +, -). In configuration ``c`` the particle is
    measured in the orthonormal basis whose columns are ``particle_bases[c]``
    (column 0 is the positive outcome): ready is swapped with the matching
    pointer state, which is a permutation and hence unitary.
    """
    n_conf = len(particle_bases)
    swap_plus = np.eye(3)[[1, 0, 2]]
    swap_minus = np.eye(3)[[2, 1, 0]]
    total = np.zeros((2 * n_conf * 3,) * 2, dtype=complex)
    for c, b in enumerate(particle_bases):
        b = np.asarray(b, dtype=complex)
        conf = np.zeros((n_conf, n_conf))
        conf[c, c] = 1.0
        for k, perm in enumerate((swap_plus, swap_minus)):
            total += tensor(outer(b[:, k]), conf, perm)
    return operator(total)


def coin_unitary(heads: complex, tails: complex) -> Operator:
    """Unitary sending |0> to heads|0> + tails|1> (a beamsplitter-like quantum coin)."""
    n = abs(heads) ** 2 + abs(tails) ** 2
    if abs(n - 1.0) > ALG_TOL:
        raise ValueError(f"coin amplitudes must be normalized, got squared norm {n!r}")
    return operator([[heads, -np.conj(tails)], [tails, np.conj(heads)]])
