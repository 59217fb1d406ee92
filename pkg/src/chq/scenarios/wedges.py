"""A particle scattering off wedges on its way to detectors D1..D5.

Without the coin: A -> {B1, B2} at wedge W1, then B1 -> {D1, D2} at W2 and
B2 -> {D3, D4} at W3. With the coin, a chance event just before W2 either
leaves the wedge in place (node ``W2``) or removes it (node ``~W2``), in
which case the particle goes straight to D5. ``B2`` passes through a
single-child node ``W3`` so every leaf sits at the same time.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ..errors import InvalidProbability
from ..framework import Framework
from ..tree import WeightedHistoryTree, from_conditionals
from .classical import diagonal_framework

WEDGES = ("W1", "W2", "W3")


def _default_scatter():
    return {w: (0.5, 0.5) for w in WEDGES}


@dataclass(frozen=True)
class WedgeParams:
    scatter_probs: dict = field(default_factory=_default_scatter)  # wedge -> (P(up), P(down))
    coin_prob: float = 0.5  # probability that W2 is removed
    with_coin: bool = False

    def __post_init__(self):
        probs = {w: tuple(float(x) for x in self.scatter_probs.get(w, (0.5, 0.5))) for w in WEDGES}
        object.__setattr__(self, "scatter_probs", probs)
        for w, (up, down) in probs.items():
            if not (0 <= up <= 1 and 0 <= down <= 1) or abs(up + down - 1) > 1e-12:
                raise InvalidProbability(f"scatter probabilities at {w} must be a distribution, got {(up, down)}")
        if not 0 <= self.coin_prob <= 1:
            raise InvalidProbability(f"coin_prob must be in [0, 1], got {self.coin_prob}")


def _split(wedge, probs, up, down):
    pu, pd = probs[wedge]
    return [dict(up, p=pu, choice="up"), dict(down, p=pd, choice="down")]


def wedge_spec(p: WedgeParams) -> dict:
    s = p.scatter_probs
    lower = {"label": "B2", "branch": "W3",
             "children": _split("W3", s, {"label": "D3"}, {"label": "D4"})}
    if not p.with_coin:
        upper = {"label": "B1", "branch": "W2",
                 "children": _split("W2", s, {"label": "D1"}, {"label": "D2"})}
    else:
        present = {"label": "W2", "branch": "W2", "p": 1 - p.coin_prob, "choice": "present",
                   "children": _split("W2", s, {"label": "D1"}, {"label": "D2"})}
        removed = {"label": "~W2", "p": p.coin_prob, "choice": "removed",
                   "children": [{"label": "D5", "p": 1.0}]}
        upper = {"label": "B1", "branch": "coin", "children": [present, removed]}
        lower = {"label": "B2", "children": [dict(lower, label="W3", p=1.0)]}
    return {"label": "A", "branch": "W1", "children": _split("W1", s, upper, lower)}


def _tree_id(p: WedgeParams) -> str:
    key = repr((sorted(p.scatter_probs.items()), p.coin_prob, p.with_coin)).encode()
    return f"wedges-{hashlib.sha256(key).hexdigest()[:12]}"


def wedge_scenario(p: WedgeParams | None = None) -> WeightedHistoryTree:
    p = p or WedgeParams()
    times = ("t0", "t1", "t2", "t3") if p.with_coin else ("t0", "t1", "t2")
    return from_conditionals(_tree_id(p), wedge_spec(p), times)


def wedge_framework(p: WedgeParams | None = None) -> Framework:
    """The same process as a diagonal quantum framework, for cross-checks and file export."""
    coin = p is not None and p.with_coin
    return diagonal_framework(wedge_scenario(p), name="wedges-coin" if coin else "wedges")
