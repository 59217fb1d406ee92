import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chq import hilbert as hb
from chq.errors import DegenerateSpan, DimensionCapExceeded, DimensionMismatch, NotAProjector
from chq.hilbert import ProjectiveDecomposition, Projector, make_projector, tensor, validate_decomposition


def test_make_projector_basis_vector():
    p = make_projector([hb.basis(2, 0)])
    assert np.array_equal(p.matrix, np.diag([1, 0]).astype(complex))
    assert p.rank == 1


def test_make_projector_normalizes():
    p = make_projector([np.array([1, 1])])
    assert hb.maxabs(p.matrix - 0.5 * np.ones((2, 2))) <= 1e-12


def test_make_projector_rank_two_product_space():
    up = hb.SPIN_STATES["spin-z-plus"]
    p = make_projector([tensor(up, hb.basis(2, 0)), tensor(up, hb.basis(2, 1))])
    assert abs(np.trace(p.matrix) - 2) <= 1e-12
    assert hb.maxabs(p.matrix - tensor(np.diag([1, 0]), np.eye(2))) <= 1e-12


def test_make_projector_errors():
    with pytest.raises(DegenerateSpan):
        make_projector([np.array([1, 0]), np.array([2, 0])])
    with pytest.raises(DimensionMismatch):
        make_projector([np.array([1, 0]), np.array([1, 0, 0])])
    with pytest.raises(DegenerateSpan):
        make_projector([])


def test_projector_rejects_non_projectors():
    with pytest.raises(NotAProjector):
        Projector(np.array([[1, 1], [0, 0]]))
    with pytest.raises(NotAProjector):
        Projector(2 * np.eye(2))


def test_projector_is_immutable():
    p = Projector.identity(2)
    with pytest.raises(AttributeError):
        p.rank = 3
    with pytest.raises(ValueError):
        p.matrix[0, 0] = 5


def test_dimension_cap():
    with pytest.raises(DimensionCapExceeded):
        hb.identity(hb.DIM_CAP + 1)


@pytest.mark.parametrize("ps, ok, ortho", [
    ([np.diag([1, 0]), np.diag([0, 1])], True, 0.0),
    ([np.diag([1, 0]), np.diag([1, 0])], False, 1.0),
])
def test_validate_decomposition_examples(ps, ok, ortho):
    d = ProjectiveDecomposition(("a", "b"), tuple(Projector(p) for p in ps))
    r = validate_decomposition(d)
    assert r.passed is ok
    assert r.orthogonality_defect == ortho


def test_validate_decomposition_spin_x():
    xp, xm = hb.SPIN_STATES["spin-x-plus"], hb.SPIN_STATES["spin-x-minus"]
    d = ProjectiveDecomposition(("x+", "x-"), (make_projector([xp]), make_projector([xm])))
    assert validate_decomposition(d)


def test_tensor_examples():
    assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(tensor(np.diag([1, 0]), np.eye(2)), np.diag([1, 1, 0, 0]))
    assert np.array_equal(tensor(hb.basis(2, 0), hb.basis(2, 1)), np.array([0, 1, 0, 0]))


def test_is_unitary_examples():
    t = 0.3
    assert hb.is_unitary(np.eye(3))
    assert not hb.is_unitary(np.diag([1, 0]))
    assert hb.is_unitary(np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]))


def test_lift_matches_kron_on_adjacent_slots():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 3))
    assert np.allclose(hb.lift(a, [2, 3, 2], [1]), np.kron(np.kron(np.eye(2), a), np.eye(2)))
    # reversed slot order swaps the factors the operator acts on
    b = np.kron(np.diag([1, 0]), np.diag([0, 1, 0]))
    lifted = hb.lift(b, [3, 2], [1, 0])
    assert np.array_equal(lifted, np.kron(np.diag([0, 1, 0]), np.diag([1, 0])))


def test_coin_and_premeasurement_are_unitary():
    assert hb.is_unitary(hb.coin_unitary(0.6, 0.8j))
    x = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    m = hb.premeasurement_unitary([np.eye(2), x])
    assert hb.is_unitary(m)
    # z+ in config 0 drives the pointer from ready to +
    v = m @ tensor(hb.basis(2, 0), hb.basis(2, 0), hb.basis(3, 0))
    assert np.allclose(v, tensor(hb.basis(2, 0), hb.basis(2, 0), hb.basis(3, 1)))


def test_spin_state_direction():
    theta, phi = hb.direction_angles((1.0, 0.0, 0.0))
    assert np.allclose(hb.spin_state(theta, phi), hb.SPIN_STATES["spin-x-plus"])
    assert abs(np.vdot(hb.spin_state(theta, phi, +1), hb.spin_state(theta, phi, -1))) < 1e-15


# ---------------------------------------------------------------------------
# properties


def _complex_vectors(dim, n):
    finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
    return st.lists(st.lists(st.tuples(finite, finite), min_size=dim, max_size=dim), min_size=n, max_size=n)


@st.composite
def independent_sets(draw):
    dim = draw(st.integers(1, 6))
    n = draw(st.integers(1, dim))
    raw = draw(_complex_vectors(dim, n))
    vs = [np.array([complex(a, b) for a, b in v]) for v in raw]
    return vs


@settings(max_examples=150, deadline=None)
@given(independent_sets())
def test_make_projector_invariants(vs):
    try:
        p = make_projector(vs)
    except DegenerateSpan:
        return
    m = p.matrix
    assert hb.maxabs(m @ m - m) <= 1e-12
    assert hb.maxabs(m - m.conj().T) <= 1e-12
    assert p.rank == len(vs)
    for v in vs:
        assert np.linalg.norm(m @ v - v) <= 1e-9 * max(1.0, np.linalg.norm(v))


small_ints = st.integers(-3, 3)


def _int_matrix(r, c):
    return st.lists(st.lists(small_ints, min_size=c, max_size=c), min_size=r, max_size=r).map(np.array)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3).flatmap(lambda a: st.integers(1, 3).flatmap(
    lambda b: st.integers(1, 3).flatmap(lambda c: st.tuples(_int_matrix(a, a), _int_matrix(b, b), _int_matrix(c, c))))))
def test_tensor_associative_exactly(mats):
    a, b, c = mats
    assert np.array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))
    assert np.array_equal(tensor(a, b, c), tensor(a, tensor(b, c)))


@st.composite
def random_unitary(draw, dim):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda d: st.tuples(st.just(d), random_unitary(d), st.integers(0, d - 1))))
def test_basis_decompositions_validate_and_duplicates_fail(args):
    d, u, k = args
    labels = [f"e{i}" for i in range(d)]
    dec = ProjectiveDecomposition.from_basis(labels, u)
    assert validate_decomposition(dec)
    dup = ProjectiveDecomposition(tuple(labels) + ("dup",), dec.projectors + (dec.projectors[k],))
    assert not validate_decomposition(dup)
