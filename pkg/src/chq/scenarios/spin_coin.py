"""Spin-half particle, quantum coin, and a Stern-Gerlach apparatus set by the coin.

Hilbert space: spin(2) ⊗ coin(2) ⊗ config(2: Z, X) ⊗ pointer(3: ready, +, -).

    t0 -> t1   free evolution (identity)
    t1 -> t2   coin flip, then the coin sets the apparatus configuration
               (heads keeps Z, tails switches to X)
    t2 -> t3   premeasurement: the pointer records S_z (config Z) or S_x (config X)

Variant ``A``: node B at t1 is the unitarily evolved state.
Variant ``B``: B is replaced by spin states z+ / z- at t1; on the X branch the
final events are the superposition states U± = U3 |z±, tails, X, ready>.
Variant ``B_with_X_refinement``: as B, with pointer events X± instead of U±
(the inconsistent family).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import hilbert as hb
from ..errors import InvalidParams
from ..framework import EventNode, Framework, FrameworkSpec, build_framework
from ..hilbert import Projector

DIMS = (2, 2, 2, 3)
SPIN, COIN, CONFIG, POINTER = range(4)
READY, PLUS, MINUS = range(3)
Z_CONF, X_CONF = 0, 1
VARIANTS = ("A", "B", "B_with_X_refinement")

Z_BASIS = np.eye(2, dtype=complex)
X_BASIS = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def polar_direction(polar_deg: float, azimuth_deg: float = 0.0) -> tuple[float, float, float]:
    t, p = np.radians(polar_deg), np.radians(azimuth_deg)
    return (float(np.sin(t) * np.cos(p)), float(np.sin(t) * np.sin(p)), float(np.cos(t)))


@dataclass(frozen=True)
class SpinCoinParams:
    w: tuple[float, float, float] = polar_direction(60.0)
    coin_amplitudes: tuple[complex, complex] = (1 / np.sqrt(2), 1 / np.sqrt(2))
    variant: str = "B"

    def __post_init__(self):
        w = tuple(float(c) for c in self.w)
        if len(w) != 3 or abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise InvalidParams(f"w must be a unit 3-vector, got {w}")
        object.__setattr__(self, "w", w)
        a, b = (complex(c) for c in self.coin_amplitudes)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-12:
            raise InvalidParams("coin amplitudes must be normalized")
        object.__setattr__(self, "coin_amplitudes", (a, b))
        if self.variant not in VARIANTS:
            raise InvalidParams(f"variant must be one of {VARIANTS}, got {self.variant!r}")


def _unit(k: int, n: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def _product_ket(spin, coin, config, pointer) -> np.ndarray:
    return hb.tensor(spin, _unit(coin, 2), _unit(config, 2), _unit(pointer, 3))


def dynamics(p: SpinCoinParams):
    """Initial state and the three step unitaries."""
    theta, phi = hb.direction_angles(p.w)
    psi0 = _product_ket(hb.spin_state(theta, phi), 0, Z_CONF, READY)
    u1 = np.eye(24, dtype=complex)
    flip = hb.lift(hb.coin_unitary(*p.coin_amplitudes), DIMS, [COIN])
    cnot = np.kron(np.diag([1, 0]), np.eye(2)) + np.kron(np.diag([0, 1]), np.array([[0, 1], [1, 0]]))
    u2 = hb.lift(cnot.astype(complex), DIMS, [COIN, CONFIG]) @ flip
    # premeasurement_unitary orders factors (spin, config, pointer)
    u3 = hb.lift(hb.premeasurement_unitary([Z_BASIS, X_BASIS]), DIMS, [SPIN, CONFIG, POINTER])
    return psi0, (u1, u2, u3)


def _config(c: int) -> Projector:
    return Projector(hb.lift(np.diag(_unit(c, 2)), DIMS, [CONFIG]))


def _pointer(c: int, k: int) -> Projector:
    return Projector(hb.lift(np.kron(np.diag(_unit(c, 2)), np.diag(_unit(k, 3))), DIMS, [CONFIG, POINTER]))


def _finish(events: list[tuple[str, Projector]], rest_label: str) -> tuple[EventNode, ...]:
    rest = Projector(np.eye(24) - sum(p.matrix for _, p in events))
    return tuple(EventNode(lbl, p) for lbl, p in events) + (EventNode(rest_label, rest),)


def _pointer_events(c: int) -> tuple[EventNode, ...]:
    name = "Z" if c == Z_CONF else "X"
    return _finish([(f"{name}+", _pointer(c, PLUS)), (f"{name}-", _pointer(c, MINUS))], f"{name}0")


def mqs_states(p: SpinCoinParams) -> dict[str, np.ndarray]:
    """U± : unitary images of z± entering the X-configured apparatus."""
    _, (_, _, u3) = dynamics(p)
    return {
        "U+": u3 @ _product_ket(Z_BASIS[:, 0], 1, X_CONF, READY),
        "U-": u3 @ _product_ket(Z_BASIS[:, 1], 1, X_CONF, READY),
    }


def _coin_split(z_kids, x_kids) -> tuple[EventNode, ...]:
    return (
        EventNode("Z", _config(Z_CONF), z_kids, choice="heads"),
        EventNode("X", _config(X_CONF), x_kids, choice="tails"),
    )


def spin_coin_scenario(p: SpinCoinParams | None = None) -> Framework:
    p = p or SpinCoinParams()
    psi0, (u1, u2, u3) = dynamics(p)
    eye = Projector.identity(24)
    if p.variant == "A":
        psi1 = u1 @ psi0
        b = hb.make_projector([psi1])
        tail = EventNode("~B", b.complement(), (EventNode("~B:t2", eye, (EventNode("~B:t3", eye),)),))
        kids = (
            EventNode("B", b, _coin_split(_pointer_events(Z_CONF), _pointer_events(X_CONF)), branch="coin"),
            tail,
        )
    else:
        u = mqs_states(p)
        if p.variant == "B":
            mqs = hb.make_projector([u["U+"]]), hb.make_projector([u["U-"]])
            x_kids = _finish([("U+", mqs[0]), ("U-", mqs[1])], "U0")
        else:
            x_kids = _pointer_events(X_CONF)
        kids = tuple(
            EventNode(lbl, Projector(hb.lift(hb.outer(Z_BASIS[:, k]), DIMS, [SPIN])),
                      _coin_split(_pointer_events(Z_CONF), x_kids), branch="coin")
            for k, lbl in enumerate(("z+", "z-"))
        )
    root = EventNode("A", eye, kids)
    name = {"A": "spin-coin-a", "B": "spin-coin-b", "B_with_X_refinement": "spin-coin-b-xrefine"}[p.variant]
    return build_framework(FrameworkSpec(name, psi0, ("t0", "t1", "t2", "t3"), (u1, u2, u3), root))
