"""Canonical scenarios, each available by name for file export."""

from __future__ import annotations

from ..errors import InvalidParams
from ..framework import Framework
from .classical import diagonal_framework
from .epr_bohm import EprParams, epr_bohm_scenario
from .hardy import HardyModel, HardyParams, hardy_scenario, joint_probabilities
from .spin_coin import SpinCoinParams, polar_direction, spin_coin_scenario
from .wedges import WedgeParams, wedge_framework, wedge_scenario

SCENARIO_NAMES = ("wedges", "spin-coin", "hardy", "epr-bohm")


def _wedges(with_coin=False, coin_prob=0.5, **_):
    p = WedgeParams(coin_prob=coin_prob, with_coin=with_coin)
    if with_coin:
        queries = [
            {"observed": "D1", "pivot": "B1", "antecedent": {"coin": "removed"}},
            {"observed": "D1", "pivot": "A", "antecedent": {"coin": "removed"}},
        ]
    else:
        queries = [
            {"observed": "D1", "pivot": "B1", "antecedent": {"W2": "down"}},
            {"observed": "D1", "pivot": "A", "antecedent": {"W1": "down"}},
        ]
    return wedge_framework(p), queries


def _spin_coin(variant="B", polar=60.0, azimuth=0.0, **_):
    p = SpinCoinParams(w=polar_direction(polar, azimuth), variant=variant)
    if variant == "A":
        queries = [{"observed": "Z+", "pivot": "B", "antecedent": {"coin": "heads"}},
                   {"observed": "Z+", "pivot": "B", "antecedent": {"coin": "tails"}}]
    else:
        queries = [{"observed": "Z+", "pivot": "z+", "antecedent": {"coin": "heads"}},
                   {"observed": "Z+", "pivot": "z+", "antecedent": {"coin": "tails"}}]
    return spin_coin_scenario(p), queries


def _hardy(t1="trivial", detectors=None, **_):
    model = HardyModel()
    f = model.framework(t1, detectors or {}, name="hardy")
    queries = [{"observed": "2G.2G", "pivot": "A", "antecedent": {"coinL": "2", "coinR": "1"}}]
    return f, queries


def _epr(**_):
    queries = [{"observed": "A/Lx-@t1/Rx/X+/Lx-@t4", "pivot": "Lx-@t1", "antecedent": {"coinR": "z"}}]
    return epr_bohm_scenario(EprParams()), queries


_BUILDERS = {"wedges": _wedges, "spin-coin": _spin_coin, "hardy": _hardy, "epr-bohm": _epr}


def build_scenario(name: str, **options) -> tuple[Framework, list[dict]]:
    """Framework plus its canonical queries for a named scenario."""
    try:
        make = _BUILDERS[name]
    except KeyError:
        raise InvalidParams(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}") from None
    return make(**options)


__all__ = [
    "SCENARIO_NAMES",
    "EprParams",
    "HardyModel",
    "HardyParams",
    "SpinCoinParams",
    "WedgeParams",
    "build_scenario",
    "diagonal_framework",
    "epr_bohm_scenario",
    "hardy_scenario",
    "joint_probabilities",
    "polar_direction",
    "spin_coin_scenario",
    "wedge_framework",
    "wedge_scenario",
]
