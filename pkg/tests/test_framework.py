import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chq import hilbert as hb
from chq.errors import (
    InconsistentFramework,
    InvalidDecomposition,
    NonUnitaryStep,
    RaggedTree,
    UnknownHistory,
    UnnormalizedInitialState,
)
from chq.framework import (
    EventNode,
    FrameworkSpec,
    additivity_defect,
    build_framework,
    chain_vector,
    check_consistency,
    coarse_grain,
    compatible,
    compile_tree,
    decoherence,
    decoherence_matrix,
)
from chq.hilbert import Projector, make_projector
from chq.scenarios.spin_coin import SpinCoinParams, polar_direction, spin_coin_scenario

from generators import diagonal_from_spec, random_framework
from oracles.classical_paths import leaf_table, random_spec

P0 = Projector(np.diag([1, 0]).astype(complex))
P1 = Projector(np.diag([0, 1]).astype(complex))
I2 = Projector.identity(2)


def one_step(psi, kids, u=None):
    root = EventNode("A", I2, tuple(EventNode(lbl, p) for lbl, p in kids))
    return build_framework(FrameworkSpec("one", psi, ("t0", "t1"), [np.eye(2) if u is None else u], root))


def test_build_two_leaf_framework():
    f = one_step([1, 0], [("0", P0), ("1", P1)])
    assert f.histories() == [("A", "0"), ("A", "1")]
    assert f.id.startswith("one-")


def test_build_errors():
    with pytest.raises(InvalidDecomposition):
        one_step([1, 0], [("0", P0), ("1", P0)])
    with pytest.raises(UnnormalizedInitialState):
        one_step([1, 1], [("0", P0), ("1", P1)])
    with pytest.raises(NonUnitaryStep):
        one_step([1, 0], [("0", P0), ("1", P1)], u=np.diag([1, 0]))
    with pytest.raises(InvalidDecomposition):
        root = EventNode("A", P0, (EventNode("0", P0), EventNode("1", P1)))
        build_framework(FrameworkSpec("x", [1, 0], ("t0", "t1"), [np.eye(2)], root))
    ragged = EventNode("A", I2, (EventNode("0", P0, (EventNode("00", I2),)), EventNode("1", P1)))
    with pytest.raises(RaggedTree):
        build_framework(FrameworkSpec("x", [1, 0], ("t0", "t1", "t2"), [np.eye(2)] * 2, ragged))


def test_spin_coin_b_is_branch_dependent():
    f = spin_coin_scenario(SpinCoinParams(variant="B"))
    assert [c.label for c in f.root.children] == ["z+", "z-"]
    assert [c.label for c in f.node(("A", "z+", "X")).children] == ["U+", "U-", "U0"]


def test_ids_are_content_hashes():
    a = one_step([1, 0], [("0", P0), ("1", P1)])
    b = one_step([1, 0], [("0", P0), ("1", P1)])
    c = one_step([0, 1], [("0", P0), ("1", P1)])
    assert a.id == b.id != c.id


def test_chain_vector_examples():
    f = one_step([1, 0], [("0", P0), ("1", P1)])
    assert np.array_equal(chain_vector(f, ("A", "0")), [1, 0])
    assert np.array_equal(chain_vector(f, ("A", "1")), [0, 0])
    with pytest.raises(UnknownHistory):
        chain_vector(f, ("A", "2"))


def test_chain_vector_born_rule_in_measurement_model():
    # spin ⊗ pointer(ready, +, -): x+ spin, z+ at t1, then the S_z pointer at t2
    dims = (2, 3)
    m = hb.premeasurement_unitary([np.eye(2)])  # spin ⊗ config(1) ⊗ pointer
    psi = hb.tensor(hb.SPIN_STATES["spin-x-plus"], hb.basis(3, 0))
    zp = Projector(hb.lift(np.diag([1, 0]).astype(complex), dims, [0]))
    ptr = Projector(hb.lift(np.diag([0, 1, 0]).astype(complex), dims, [1]))
    eye = Projector.identity(6)
    root = EventNode("A", eye, (
        EventNode("z+", zp, (EventNode("Z+", ptr), EventNode("~Z+", ptr.complement()))),
        EventNode("z-", zp.complement(), (EventNode("*", eye),)),
    ))
    f = build_framework(FrameworkSpec("sg", psi, ("t0", "t1", "t2"), [np.eye(6), m], root))
    v = chain_vector(f, ("A", "z+", "Z+"))
    assert abs(np.vdot(v, v).real - 0.5) <= 1e-12


def test_decoherence_examples():
    f = one_step(hb.SPIN_STATES["spin-x-plus"], [("0", P0), ("1", P1)])
    a, b = ("A", "0"), ("A", "1")
    v = chain_vector(f, a)
    assert decoherence(f, a, a) == pytest.approx(np.vdot(v, v).real, abs=1e-15)
    assert abs(decoherence(f, a, b)) <= 1e-12
    with pytest.raises(UnknownHistory):
        decoherence(f, ("A",), a)


def test_x_refinement_is_inconsistent_with_hand_value():
    f = spin_coin_scenario(SpinCoinParams(w=polar_direction(60), variant="B_with_X_refinement"))
    hs, d = decoherence_matrix(f)
    off = np.abs(d - np.diag(np.diag(d)))
    assert off.max() > 1e-3
    # D((z+,X,X+), (z-,X,X+)) = cos30 sin30 / 4
    assert off.max() == pytest.approx(math.sqrt(3) / 16, abs=1e-12)
    assert not check_consistency(f).passed


def test_variant_b_consistent():
    rep = check_consistency(spin_coin_scenario(SpinCoinParams(variant="B")))
    assert rep.passed and rep.max_offdiag <= 1e-10
    assert abs(rep.total - 1) <= 1e-9


def test_compile_tree_examples():
    f = one_step([1, 0], [("0", P0), ("1", P1)])
    assert compile_tree(f, check_consistency(f)).leaf_weights()[("A", "0")] == 1.0

    a = spin_coin_scenario(SpinCoinParams(w=(1.0, 0.0, 0.0), variant="A"))
    leaves = {p[-1]: w for p, w in compile_tree(a, check_consistency(a)).leaf_weights().items()}
    for label, want in {"Z+": 0.25, "Z-": 0.25, "X+": 0.5, "X-": 0.0}.items():
        assert leaves[label] == pytest.approx(want, abs=1e-12)

    bad = spin_coin_scenario(SpinCoinParams(variant="B_with_X_refinement"))
    with pytest.raises(InconsistentFramework):
        compile_tree(bad, check_consistency(bad))
    with pytest.raises(ValueError):
        compile_tree(f, check_consistency(a))


def test_additivity_examples():
    b = spin_coin_scenario(SpinCoinParams(variant="B"))
    rep = check_consistency(b)
    assert additivity_defect(b, ("A",), rep) <= 1e-9
    assert additivity_defect(b, ("A", "z+"), rep) <= 1e-10
    _, f = diagonal_from_spec(random_spec(random.Random(5)))
    for p, _ in f.walk():
        assert additivity_defect(f, p) <= 1e-12


def test_compatible_examples():
    a = spin_coin_scenario(SpinCoinParams(variant="A"))
    b = spin_coin_scenario(SpinCoinParams(variant="B"))
    assert compatible(b, b).compatible
    rep = compatible(a, b)
    assert not rep.compatible and rep.clause == "commutation"
    assert rep.witness["time"] == "t1"
    assert rep.witness["commutator_norm"] == pytest.approx(math.sqrt(3) / 4, abs=1e-12)
    assert "common refinement" in rep.to_dict()["definition"]


def test_compatible_structure_clause():
    f = one_step([1, 0], [("0", P0), ("1", P1)])
    g = one_step([0, 1], [("0", P0), ("1", P1)])
    assert compatible(f, g).clause == "structure"


def test_two_diagonal_families_same_basis_compatible():
    spec = {"label": "r", "children": [
        {"label": "a", "p": 0.3, "children": [{"label": "a1", "p": 0.5}, {"label": "a2", "p": 0.5}]},
        {"label": "b", "p": 0.7, "children": [{"label": "b1", "p": 1.0}, {"label": "b2", "p": 0.0}]},
    ]}
    _, f = diagonal_from_spec(spec, "f")
    g = coarse_grain(f, ("r", "a"), ["a1", "a2"], "a*")
    assert compatible(f, g).compatible


# ---------------------------------------------------------------------------
# oracle and properties


def class_operator(f, h):
    """P_n U_n ... P_1 U_1 as an explicit matrix product along history ``h``."""
    c = np.eye(f.dim, dtype=complex)
    n = f.root
    for k, label in enumerate(h[1:]):
        n = next(x for x in n.children if x.label == label)
        c = n.projector.matrix @ f.step_unitaries[k] @ c
    return c


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decoherence_matrix_matches_operator_products(seed):
    f = random_framework(np.random.default_rng(seed))
    hs, d = decoherence_matrix(f)
    psi = f.initial_state
    ops = [class_operator(f, h) for h in hs]
    want = np.array([[np.vdot(ob @ psi, oa @ psi) for ob in ops] for oa in ops])
    assert hb.maxabs(d - want) <= 1e-12
    # the class operators sum to U_n...U_1, so all entries of D sum to 1
    assert hb.maxabs(d - d.conj().T) <= 1e-12
    assert d.diagonal().real.min() >= -1e-12
    assert abs(d.sum() - 1) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi))
def test_global_phase_invariance(seed, phase):
    f = random_framework(np.random.default_rng(seed))
    g = build_framework(FrameworkSpec(f.name, f.initial_state * np.exp(1j * phase), f.times, f.step_unitaries, f.root))
    assert hb.maxabs(decoherence_matrix(f)[1] - decoherence_matrix(g)[1]) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_diagonal_families_consistent_and_match_markov_tree(rnd):
    spec = random_spec(rnd)
    tree, f = diagonal_from_spec(spec)
    rep = check_consistency(f)
    assert rep.passed and rep.max_offdiag <= 1e-12
    compiled = compile_tree(f, rep).leaf_weights()
    for path, p in leaf_table(spec):
        assert abs(compiled[path] - p) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_compatible_is_symmetric(s1, s2):
    r1, r2 = np.random.default_rng(s1), np.random.default_rng(s2)
    f = random_framework(r1, dim=2, depth=2, name="f")
    # same dynamics, fresh decompositions
    g0 = random_framework(r2, dim=2, depth=2, name="g")
    g = build_framework(FrameworkSpec("g", f.initial_state, f.times, f.step_unitaries, g0.root))
    assert compatible(f, g).compatible == compatible(g, f).compatible
    assert compatible(f, f).compatible == check_consistency(f).passed


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False))
def test_coarse_grainings_are_compatible(rnd):
    spec = random_spec(rnd)
    _, f = diagonal_from_spec(spec)
    leaves_parent = [(p, n) for p, n in f.walk() if len(n.children) >= 2 and not n.children[0].children]
    if not leaves_parent:
        return
    parent, node = rnd.choice(leaves_parent)
    merge = [c.label for c in node.children[:2]]
    g = coarse_grain(f, parent, merge)
    assert compatible(f, g).compatible and compatible(g, f).compatible
    assert check_consistency(g).passed


def test_coarse_graining_quantum_family_compatible():
    f = random_framework(np.random.default_rng(11), dim=4, depth=2)
    # merge two leaves under the first internal node with >= 2 children
    parent, node = next((p, n) for p, n in f.walk() if len(n.children) >= 2 and not n.children[0].children)
    g = coarse_grain(f, parent, [c.label for c in node.children[:2]])
    # commutation holds by construction, so the verdict is f's own consistency
    assert compatible(f, g).clause in ("ok", "consistency")
    assert compatible(f, g).compatible == check_consistency(f).passed
    assert compatible(f, g).compatible == compatible(g, f).compatible


def test_weak_mode_is_weaker():
    f = spin_coin_scenario(SpinCoinParams(variant="B_with_X_refinement"))
    med, weak = check_consistency(f, "medium"), check_consistency(f, "weak")
    assert weak.max_offdiag <= med.max_offdiag
    with pytest.raises(ValueError):
        check_consistency(f, "strong")


def test_make_projector_products_used_in_refinement():
    z = make_projector([hb.basis(2, 0)])
    assert z.close_to(P0)
