"""EPR-Bohm pair: singlet state, S_x or S_z measured on the right, left particle free.

Hilbert space: particle_L(2) ⊗ particle_R(2) ⊗ config_R(2: x, z) ⊗ pointer_R(3).

    t0 -> t1  identity
    t1 -> t2  right coin picks the configuration (initially x)
    t2 -> t3  right premeasurement
    t3 -> t4  identity

Events: left S_x at t1 (before the right measurement) and at t4 (after it);
right configuration at t2; right pointer at t3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import hilbert as hb
from ..errors import InvalidParams
from ..framework import EventNode, Framework, FrameworkSpec, build_framework
from ..hilbert import Projector

DIMS = (2, 2, 2, 3)
LP, RP, RC, RQ = range(4)
READY, PLUS, MINUS = range(3)
X_CONF, Z_CONF = 0, 1
X_BASIS = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
Z_BASIS = np.eye(2, dtype=complex)
SINGLET = hb.ket(np.array([0, 1, -1, 0]) / np.sqrt(2))


@dataclass(frozen=True)
class EprParams:
    coin_amplitudes: tuple[complex, complex] = (1 / np.sqrt(2), 1 / np.sqrt(2))  # (x, z)
    left_sx_times: tuple[str, ...] = ("t1", "t4")

    def __post_init__(self):
        bad = set(self.left_sx_times) - {"t1", "t4"}
        if bad:
            raise InvalidParams(f"left S_x events can sit at t1 and/or t4, not {sorted(bad)}")


def _lift(op, slots):
    return hb.lift(np.asarray(op, dtype=complex), DIMS, slots)


def epr_bohm_scenario(p: EprParams | None = None) -> Framework:
    p = p or EprParams()
    dim = int(np.prod(DIMS))
    ready = np.zeros((2, 3))
    ready[X_CONF, READY] = 1.0
    psi0 = hb.ket(np.kron(SINGLET, ready.reshape(-1)))
    u1 = np.eye(dim, dtype=complex)
    u2 = _lift(hb.coin_unitary(*p.coin_amplitudes), [RC])
    u3 = _lift(hb.premeasurement_unitary([X_BASIS, Z_BASIS]), [RP, RC, RQ])
    u4 = np.eye(dim, dtype=complex)
    eye = Projector.identity(dim)

    def left_sx(suffix):
        return [(f"Lx{s}@{suffix}", Projector(_lift(hb.outer(X_BASIS[:, k]), [LP]))) for k, s in enumerate("+-")]

    def pointer(conf, k):
        m = np.zeros((2, 3))
        m[conf, k] = 1.0
        return Projector(_lift(np.diag(m.reshape(-1)), [RC, RQ]))

    def config(conf):
        return Projector(_lift(np.diag(np.eye(2)[conf]), [RC]))

    if "t4" in p.left_sx_times:
        late = tuple(EventNode(lbl, pr) for lbl, pr in left_sx("t4"))
    else:
        late = (EventNode("I@t4", eye),)

    def outcomes(conf):
        name = "X" if conf == X_CONF else "Z"
        evs = [(f"{name}+", pointer(conf, PLUS)), (f"{name}-", pointer(conf, MINUS))]
        rest = Projector(np.eye(dim) - sum(e.matrix for _, e in evs))
        return tuple(EventNode(lbl, pr, late) for lbl, pr in evs + [(f"{name}0", rest)])

    configs = (
        EventNode("Rx", config(X_CONF), outcomes(X_CONF), choice="x"),
        EventNode("Rz", config(Z_CONF), outcomes(Z_CONF), choice="z"),
    )
    early = left_sx("t1") if "t1" in p.left_sx_times else [("I@t1", eye)]
    root = EventNode("A", eye, tuple(EventNode(lbl, pr, configs, branch="coinR") for lbl, pr in early))
    spec = FrameworkSpec("epr-bohm", psi0, ("t0", "t1", "t2", "t3", "t4"), (u1, u2, u3, u4), root)
    return build_framework(spec)
