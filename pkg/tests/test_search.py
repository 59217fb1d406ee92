import random

import pytest

from chq import hilbert as hb
from chq.errors import CapExceeded
from chq.scenarios.hardy import ZERO_OUTCOMES, HardyModel
from chq.search import (
    DEFAULT_T1,
    HARDY_INFERENCE,
    RIGHT_SWITCH_ONLY,
    CatalogSpec,
    InferenceSpec,
    generate_catalog,
    same_events,
    verify_no_single_framework,
)

MODEL = HardyModel()


@pytest.fixture(scope="module")
def catalog():
    return generate_catalog(CatalogSpec(), MODEL)


@pytest.fixture(scope="module")
def report(catalog):
    return verify_no_single_framework(catalog, HARDY_INFERENCE)


def test_pointer_only_menu_has_one_framework():
    cat = generate_catalog(CatalogSpec(t1_generators=("trivial",), detector_options={}), MODEL)
    assert len(cat) == 1
    assert cat[0].consistent


def test_duplicate_generators_are_dropped():
    cat = generate_catalog(CatalogSpec(t1_generators=("left:1", "left:1"), detector_options={}), MODEL)
    assert len(cat) == 1
    # two different recipes that build the same events also collapse
    a = MODEL.framework("left:1")
    b = MODEL.framework("left:1", {("L", 1): "pointer"})
    assert same_events(a.root, b.root)


def test_cap(catalog):
    with pytest.raises(CapExceeded):
        generate_catalog(CatalogSpec(cap=100), MODEL)
    assert len(catalog) == 160


def test_catalog_decompositions_validate(catalog):
    for entry in catalog[::9]:
        for _, node in entry.framework.walk():
            if node.children:
                d = hb.ProjectiveDecomposition(tuple(c.label for c in node.children),
                                               tuple(c.projector for c in node.children))
                assert hb.validate_decomposition(d)


def test_catalog_keeps_inconsistent_frameworks(catalog):
    flags = [e.consistent for e in catalog]
    assert any(flags) and not all(flags)


def test_no_single_framework_supports_chain(report, catalog):
    assert len(catalog) >= 50
    assert report.none_support
    d = report.to_dict()
    assert d["none_support"] is True
    assert "catalog" in d["scope"]
    assert set(d["reasons"]) <= {"inconsistent family", "observed event absent", "required events absent",
                                  "consequent probability < 1", "observed event has zero probability",
                                  "no qualifying pivot"}


def test_forbidden_outcomes_have_probability_zero(report):
    seen = 0
    for v in report.verdicts:
        if v.consistent:
            for label, p in v.forbidden.items():
                assert label in ZERO_OUTCOMES
                assert p <= 1e-10
                seen += label == "1R.1R"
    assert seen > 0
    assert report.forbidden_event_max <= 1e-10


def test_single_step_is_supported(catalog):
    r = verify_no_single_framework(catalog, RIGHT_SWITCH_ONLY)
    assert not r.none_support
    recipes = [v.recipe for v in r.verdicts if v.supported]
    assert any(rc["t1"] == "left:2" and rc["detectors"]["L/1"] == "mqs:2" for rc in recipes)


def test_pointer_framework_fails_on_probability(report):
    plain = [v for v in report.verdicts if v.consistent and v.recipe["t1"] == "trivial"
             and set(v.recipe["detectors"].values()) == {"pointer"}]
    assert len(plain) == 1
    v = plain[0]
    assert v.reason == "consequent probability < 1"
    assert v.step_probabilities["both switches 2->1"] == 0.0


def test_order_and_partition_independence(catalog, report):
    shuffled = list(catalog)
    random.Random(4).shuffle(shuffled)
    again = verify_no_single_framework(shuffled, HARDY_INFERENCE, workers=3)
    assert again.to_dict() == report.to_dict()


def test_monotone_across_menu_sizes():
    verdicts = []
    for k in (1, 3, 6, len(DEFAULT_T1)):
        cat = generate_catalog(CatalogSpec(t1_generators=DEFAULT_T1[:k]), MODEL)
        verdicts.append(verify_no_single_framework(cat, HARDY_INFERENCE).none_support)
    assert all(verdicts)


def test_empty_catalog_is_rejected():
    with pytest.raises(ValueError):
        verify_no_single_framework([], HARDY_INFERENCE)


def test_branch_dependent_menu_respects_cap():
    with pytest.raises(CapExceeded):
        generate_catalog(CatalogSpec(branch_dependent=True), MODEL)
    small = CatalogSpec(t1_generators=("trivial", "left:2"), branch_dependent=True,
                        detector_options={"L": {1: ("pointer", "mqs:2")}}, cap=200)
    cat = generate_catalog(small, MODEL)
    assert len(cat) == 8
    assert verify_no_single_framework(cat, HARDY_INFERENCE).none_support


def test_inference_spec_is_data():
    spec = InferenceSpec("2G.2G", HARDY_INFERENCE.steps[:1])
    assert spec.coin_branches == ("coinL", "coinR")
