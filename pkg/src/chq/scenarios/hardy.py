"""Two spin-half particles, two distant detectors, each with a built-in quantum coin.

A detector's coin picks switch setting 1 or 2; the detector then flashes red
(R, positive spin component along the setting's axis) or green (G,
negative). Joint outcomes are written left·right as ``"1G.2R"``.

The fixture state makes 1G.2G, 2G.1G and 1R.1R impossible while every other
joint outcome has positive probability. In the setting-1 basis it reads

    psi = a (|RG> + |GR>) + b |GG>,   a^2 = (3 - sqrt5)/2,   b^2 = sqrt5 - 2,

with the setting-2 basis |2R> ∝ a|1R> + b|1G>, |2G> ∝ b|1R> - a|1G> on both
sides. ``a`` maximizes P(2G.2G) = (5 sqrt5 - 11)/2 ≈ 0.0902 within this
family; ``tests/oracles/hardy_search.py`` re-derives these numbers by direct
optimization.

Hilbert space of :class:`HardyModel` (144 dimensions):

    particle_L(2) ⊗ config_L(2) ⊗ pointer_L(3) ⊗ particle_R(2) ⊗ config_R(2) ⊗ pointer_R(3)

    t0 -> t1  identity (the particles fly apart)
    t1 -> t2  left coin      (config_L: 1 -> a1|1> + a2|2>)
    t2 -> t3  right coin
    t3 -> t4  both premeasurements
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .. import hilbert as hb
from ..framework import EventNode, Framework, FrameworkSpec, build_framework
from ..hilbert import Projector

# frozen fixture, in the setting-1 basis |1R> = (1, 0), |1G> = (0, 1)
HARDY_A = 0.6180339887498949
HARDY_B = 0.48586827175664565
HARDY_STATE = (0.0, HARDY_A, HARDY_A, HARDY_B)  # |RR>, |RG>, |GR>, |GG>
_N = np.hypot(HARDY_A, HARDY_B)
SETTING_1 = ((1.0, 0.0), (0.0, 1.0))  # columns: R, G
SETTING_2 = ((HARDY_A / _N, HARDY_B / _N), (HARDY_B / _N, -HARDY_A / _N))
ZERO_OUTCOMES = ("1G.2G", "2G.1G", "1R.1R")

DIMS = (2, 2, 3, 2, 2, 3)
LP, LC, LQ, RP, RC, RQ = range(6)
READY, RED, GREEN = range(3)
FAIR = (1 / np.sqrt(2), 1 / np.sqrt(2))


def _fixture_bases():
    return {1: np.array(SETTING_1, dtype=complex), 2: np.array(SETTING_2, dtype=complex)}


@dataclass(frozen=True, eq=False)
class HardyParams:
    state: np.ndarray = field(default_factory=lambda: np.array(HARDY_STATE, dtype=complex))
    left_bases: dict = field(default_factory=_fixture_bases)
    right_bases: dict = field(default_factory=_fixture_bases)
    left_coin: tuple[complex, complex] = FAIR
    right_coin: tuple[complex, complex] = FAIR

    def basis(self, side: str, setting: int) -> np.ndarray:
        return (self.left_bases if side == "L" else self.right_bases)[setting]


def joint_probabilities(p: HardyParams) -> dict[str, float]:
    """Born-rule probability of each joint outcome for each pair of settings."""
    psi = np.asarray(p.state, dtype=complex)
    out = {}
    for sl, sr in itertools.product((1, 2), repeat=2):
        bl, br = p.basis("L", sl), p.basis("R", sr)
        for (kl, ln), (kr, rn) in itertools.product(enumerate("RG"), repeat=2):
            v = np.kron(bl[:, kl], br[:, kr])
            out[f"{sl}{ln}.{sr}{rn}"] = float(abs(np.vdot(v, psi)) ** 2)
    return out


def _other(setting: int) -> int:
    return 2 if setting == 1 else 1


class HardyModel:
    """Dynamics plus cached event projectors for the detector model above.

    Projectors are built once per model and shared by every framework the
    model assembles, which keeps catalog generation cheap.
    """

    def __init__(self, params: HardyParams | None = None):
        self.params = params or HardyParams()
        self._cache: dict = {}

    def _memo(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    @property
    def dim(self) -> int:
        return int(np.prod(DIMS))

    @cached_property
    def initial_state(self) -> np.ndarray:
        psi = np.asarray(self.params.state, dtype=complex).reshape(2, 2)
        full = np.zeros(DIMS, dtype=complex)
        full[:, 0, READY, :, 0, READY] = psi
        return hb.ket(full.reshape(-1))

    @cached_property
    def unitaries(self) -> tuple[np.ndarray, ...]:
        p = self.params
        u1 = np.eye(self.dim, dtype=complex)
        u2 = hb.lift(hb.coin_unitary(*p.left_coin), DIMS, [LC])
        u3 = hb.lift(hb.coin_unitary(*p.right_coin), DIMS, [RC])
        ml = hb.premeasurement_unitary([p.basis("L", 1), p.basis("L", 2)])
        mr = hb.premeasurement_unitary([p.basis("R", 1), p.basis("R", 2)])
        u4 = hb.lift(np.kron(ml, mr), DIMS, [LP, LC, LQ, RP, RC, RQ])
        return (u1, u2, u3, u4)

    @property
    def times(self) -> tuple[str, ...]:
        return ("t0", "t1", "t2", "t3", "t4")

    # -- particle states -------------------------------------------------
    def schmidt_bases(self) -> tuple[np.ndarray, np.ndarray]:
        u, _, vh = np.linalg.svd(np.asarray(self.params.state, dtype=complex).reshape(2, 2))
        return u, vh.T

    def particle_basis(self, side: str, name) -> np.ndarray:
        if name == "schmidt":
            left, right = self.schmidt_bases()
            return left if side == "L" else right
        return self.params.basis(side, int(name))

    def particle_events(self, side: str, name) -> list[tuple[str, Projector]]:
        """Rank-one particle events on one side; labels like ``L2g``, ``Rsa``."""

        def make():
            b = self.particle_basis(side, name)
            slot = LP if side == "L" else RP
            tags = ("a", "b") if name == "schmidt" else ("r", "g")
            prefix = f"{side}s" if name == "schmidt" else f"{side}{name}"
            return [(f"{prefix}{t}", Projector(hb.lift(hb.outer(b[:, k]), DIMS, [slot]))) for k, t in enumerate(tags)]

        return self._memo(("particle", side, name), make)

    def t1_decomposition(self, generator: str) -> list[tuple[str, Projector]]:
        """Events at t1 for a named generator.

        ``trivial`` | ``evolved`` | ``left:<basis>`` | ``right:<basis>`` |
        ``left:<basis>*right:<basis>``, where ``<basis>`` is 1, 2 or ``schmidt``.
        """

        def make():
            if generator == "trivial":
                return [("I", Projector.identity(self.dim))]
            if generator == "evolved":
                p = hb.make_projector([self.unitaries[0] @ self.initial_state])
                return [("psi", p), ("~psi", p.complement())]
            parts = generator.split("*")
            decomps = []
            for part in parts:
                side, _, name = part.partition(":")
                if side not in ("left", "right") or name not in ("1", "2", "schmidt"):
                    raise ValueError(f"unknown t1 generator {generator!r}")
                decomps.append(self.particle_events("L" if side == "left" else "R", name))
            if len(decomps) == 1:
                return decomps[0]
            return [(f"{la}.{lb}", Projector(pa.matrix @ pb.matrix))
                    for (la, pa), (lb, pb) in itertools.product(*decomps)]

        return self._memo(("t1", generator), make)

    # -- detector events -------------------------------------------------
    def config(self, side: str, setting: int) -> Projector:
        slot = LC if side == "L" else RC
        e = np.zeros(2)
        e[setting - 1] = 1.0
        return self._memo(("config", side, setting), lambda: Projector(hb.lift(np.diag(e).astype(complex), DIMS, [slot])))

    def detector_events(self, side: str, setting: int, option: str) -> list[tuple[str, np.ndarray]]:
        """One side's final events (as local operators) under a switch setting.

        ``pointer``        the lights: ``1R``, ``1G`` ...
        ``mqs:<basis>``    superpositions M|b_k>|setting, ready> of the detector
                           fed a particle state from ``<basis>``; labels
                           ``U2r``, ``U2g``, ``Usa`` ...
        Operators act on particle ⊗ config ⊗ pointer of that side.
        """

        def make():
            conf = np.zeros(2)
            conf[setting - 1] = 1.0
            if option == "pointer":
                return [
                    (f"{setting}{name}", np.kron(np.eye(2), np.kron(np.diag(conf), np.diag(np.eye(3)[k]))))
                    for name, k in (("R", RED), ("G", GREEN))
                ]
            kind, _, name = option.partition(":")
            if kind != "mqs":
                raise ValueError(f"unknown detector option {option!r}")
            b = self.particle_basis(side, name)
            bases = [self.params.basis(side, 1), self.params.basis(side, 2)]
            m = hb.premeasurement_unitary(bases)
            tags = ("a", "b") if name == "schmidt" else ("r", "g")
            prefix = "Us" if name == "schmidt" else f"U{name}"
            events = []
            for k, t in enumerate(tags):
                v = m @ np.kron(b[:, k], np.kron(conf, np.eye(3)[READY]))
                events.append((f"{prefix}{t}", hb.outer(v)))
            return events

        return self._memo(("detector", side, setting, option), make)

    def outcome_decomposition(self, sl: int, sr: int, left_opt: str, right_opt: str) -> list[tuple[str, Projector]]:
        def make():
            left = self.detector_events("L", sl, left_opt)
            right = self.detector_events("R", sr, right_opt)
            events = [
                (f"{a}.{b}", Projector(hb.lift(np.kron(pa, pb), DIMS, [LP, LC, LQ, RP, RC, RQ])))
                for (a, pa), (b, pb) in itertools.product(left, right)
            ]
            rest = Projector(np.eye(self.dim) - sum(p.matrix for _, p in events))
            return events + [("rest", rest)]

        return self._memo(("outcome", sl, sr, left_opt, right_opt), make)

    # -- frameworks ------------------------------------------------------
    def framework(self, t1: str = "trivial", options=None, name: str | None = None) -> Framework:
        """Assemble a framework from a t1 generator and detector options.

        ``options`` maps ``(side, setting)`` to a detector option. Branch-dependent
        choices use ``(side, setting, other_setting)`` keys instead. Missing
        entries default to ``pointer``.
        """
        options = dict(options or {})

        def opt(side, s, other):
            return options.get((side, s, other), options.get((side, s), "pointer"))

        def right_node(sl, sr):
            lo, ro = opt("L", sl, sr), opt("R", sr, sl)
            leaves = tuple(EventNode(lbl, p) for lbl, p in self.outcome_decomposition(sl, sr, lo, ro))
            return EventNode(f"R{sr}", self.config("R", sr), leaves, choice=str(sr))

        def left_node(sl):
            kids = tuple(right_node(sl, sr) for sr in (1, 2))
            return EventNode(f"L{sl}", self.config("L", sl), kids, branch="coinR", choice=str(sl))

        t1_nodes = tuple(
            EventNode(lbl, p, tuple(left_node(sl) for sl in (1, 2)), branch="coinL")
            for lbl, p in self.t1_decomposition(t1)
        )
        root = EventNode("A", Projector.identity(self.dim), t1_nodes)
        name = name or "hardy"
        spec = FrameworkSpec(name, self.initial_state, self.times, self.unitaries, root)
        return build_framework(spec)


def hardy_scenario(params: HardyParams | None = None) -> tuple[HardyParams, Framework]:
    """Fixture parameters and the plain pointer framework (no refinement at t1)."""
    model = HardyModel(params)
    return model.params, model.framework("trivial", name="hardy")
