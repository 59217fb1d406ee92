"""Catalog search over Hardy frameworks.

The catalog is generated from an explicit menu: a list of t1 generators
(particle decompositions before either coin flip) and, for each detector and
switch setting, a list of final-event options (lights, or superposition states
of the detector). Every combination is assembled into a framework, duplicates
are dropped, and each framework is checked for consistency.

:func:`verify_no_single_framework` then asks, framework by framework, whether
one pivot preceding both coin flips carries every step of a chained
counterfactual inference with probability one. The verdict is relative to
the menu; the probability of the forbidden outcomes in every consistent
framework that contains them is reported as well.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .counterfactual import counterfactual, label_predicate
from .errors import CapExceeded, ZeroWeightAntecedent, ZeroWeightPivot
from .framework import ConsistencyReport, EventNode, Framework, check_consistency, compile_tree
from .hilbert import maxabs
from .scenarios.hardy import ZERO_OUTCOMES, HardyModel, HardyParams
from .tree import WeightedHistoryTree

DEFAULT_T1 = (
    "trivial",
    "evolved",
    "left:1",
    "left:2",
    "right:1",
    "right:2",
    "left:1*right:1",
    "left:2*right:2",
    "left:schmidt",
    "right:schmidt",
)


def _default_options():
    per_side = {1: ("pointer", "mqs:2"), 2: ("pointer", "mqs:1")}
    return {"L": dict(per_side), "R": dict(per_side)}


@dataclass(frozen=True)
class CatalogSpec:
    t1_generators: tuple[str, ...] = DEFAULT_T1
    detector_options: dict = field(default_factory=_default_options)  # side -> setting -> options
    branch_dependent: bool = False  # options may also depend on the other side's setting
    cap: int = 200
    params: HardyParams | None = None


@dataclass(frozen=True)
class CatalogEntry:
    framework: Framework
    recipe: dict
    consistency: ConsistencyReport

    @property
    def consistent(self) -> bool:
        return self.consistency.passed


def _unique(seq):
    return list(dict.fromkeys(seq))


def _option_assignments(spec: CatalogSpec) -> list[dict]:
    keys, choices = [], []
    for side in ("L", "R"):
        for setting in (1, 2):
            opts = _unique(spec.detector_options.get(side, {}).get(setting, ("pointer",)))
            if spec.branch_dependent:
                for other in (1, 2):
                    keys.append((side, setting, other))
                    choices.append(opts)
            else:
                keys.append((side, setting))
                choices.append(opts)
    return [dict(zip(keys, combo)) for combo in itertools.product(*choices)]


def _signature(f: Framework) -> tuple:
    return tuple(sorted((len(p), n.projector.rank) for p, n in f.walk()))


def same_events(a: EventNode, b: EventNode, tol: float = 1e-10) -> bool:
    """Tree equality up to sibling order and labels, comparing projectors at ``tol``."""
    if len(a.children) != len(b.children):
        return False
    if a.projector is not b.projector and maxabs(a.projector.matrix - b.projector.matrix) > tol:
        return False
    unmatched = list(b.children)
    for ca in a.children:
        hit = next((cb for cb in unmatched if same_events(ca, cb, tol)), None)
        if hit is None:
            return False
        unmatched.remove(hit)
    return True


def generate_catalog(spec: CatalogSpec | None = None, model: HardyModel | None = None) -> list[CatalogEntry]:
    spec = spec or CatalogSpec()
    model = model or HardyModel(spec.params)
    gens = _unique(spec.t1_generators)
    assignments = _option_assignments(spec)
    size = len(gens) * len(assignments)
    if size > spec.cap:
        raise CapExceeded(f"menu yields {size} frameworks, cap is {spec.cap}")
    out: list[CatalogEntry] = []
    buckets: dict[tuple, list[Framework]] = {}
    for gen in gens:
        for k, opts in enumerate(assignments):
            f = model.framework(gen, opts, name=f"hardy[{gen}|{k}]")
            sig = _signature(f)
            if any(same_events(f.root, g.root) for g in buckets.get(sig, ())):
                continue
            buckets.setdefault(sig, []).append(f)
            recipe = {"t1": gen, "detectors": {"/".join(map(str, key)): v for key, v in opts.items()}}
            out.append(CatalogEntry(f, recipe, check_consistency(f)))
    return out


# ---------------------------------------------------------------------------
# inference


@dataclass(frozen=True)
class InferenceStep:
    name: str
    antecedent: dict  # branch name -> choice
    consequent: tuple[str, ...]  # glob patterns over outcome labels


@dataclass(frozen=True)
class InferenceSpec:
    """A chained counterfactual argument from one observed outcome.

    A framework supports it when, for every positive-weight history ending in
    ``observed``, some node on that history preceding all ``coin_branches``
    serves as a pivot under which every step's consequent has probability one.
    """

    observed: str
    steps: tuple[InferenceStep, ...]
    coin_branches: tuple[str, ...] = ("coinL", "coinR")


RIGHT_SWITCH = InferenceStep("right switch 2->1", {"coinL": "2", "coinR": "1"}, ("*.1R",))
LEFT_SWITCH = InferenceStep("left switch 2->1", {"coinL": "1", "coinR": "2"}, ("1R.*",))
BOTH_SWITCHES = InferenceStep("both switches 2->1", {"coinL": "1", "coinR": "1"}, ("1R.1R",))

HARDY_INFERENCE = InferenceSpec("2G.2G", (RIGHT_SWITCH, LEFT_SWITCH, BOTH_SWITCHES))
RIGHT_SWITCH_ONLY = InferenceSpec("2G.2G", (RIGHT_SWITCH,))


@dataclass(frozen=True)
class FrameworkVerdict:
    framework_id: str
    recipe: dict
    consistent: bool
    supported: bool
    reason: str
    step_probabilities: dict = field(default_factory=dict)  # best probability found per step
    forbidden: dict = field(default_factory=dict)  # probability of each zero outcome present as an event

    def to_dict(self) -> dict:
        return {
            "framework_id": self.framework_id,
            "recipe": self.recipe,
            "consistent": self.consistent,
            "supported": self.supported,
            "reason": self.reason,
            "step_probabilities": self.step_probabilities,
            "forbidden_event_probabilities": self.forbidden,
        }


@dataclass(frozen=True)
class SearchReport:
    inference: InferenceSpec
    verdicts: tuple[FrameworkVerdict, ...]

    SCOPE = ("verdict is relative to the generated catalog, not to every conceivable framework; "
             "forbidden_event_max bounds the forbidden outcomes in every consistent framework "
             "that contains them")

    @property
    def supported_by(self) -> list[str]:
        return [v.framework_id for v in self.verdicts if v.supported]

    @property
    def none_support(self) -> bool:
        return not self.supported_by

    @property
    def forbidden_event_max(self) -> float:
        return max((p for v in self.verdicts for p in v.forbidden.values()), default=0.0)

    def to_dict(self) -> dict:
        reasons: dict[str, int] = {}
        for v in self.verdicts:
            reasons[v.reason] = reasons.get(v.reason, 0) + 1
        return {
            "observed": self.inference.observed,
            "steps": [{"name": s.name, "antecedent": s.antecedent, "consequent": list(s.consequent)}
                      for s in self.inference.steps],
            "catalog_size": len(self.verdicts),
            "consistent_frameworks": sum(v.consistent for v in self.verdicts),
            "none_support": self.none_support,
            "supported_by": self.supported_by,
            "forbidden_event_max": self.forbidden_event_max,
            "reasons": dict(sorted(reasons.items())),
            "scope": self.SCOPE,
            "frameworks": [v.to_dict() for v in self.verdicts],
        }


def _forbidden(tree: WeightedHistoryTree) -> dict[str, float]:
    out: dict[str, float] = {}
    for path, node in tree.leaves():
        if node.label in ZERO_OUTCOMES:
            out[node.label] = out.get(node.label, 0.0) + node.weight
    return {k: float(v) for k, v in sorted(out.items())}


def _step_probability(tree, obs_ref, pivot_path, step) -> float | None:
    try:
        ans = counterfactual(tree, obs_ref, tree.ref(pivot_path), step.antecedent)
    except (ZeroWeightAntecedent, ZeroWeightPivot):
        return None
    return ans.probability(label_predicate(step.consequent))


def judge(entry: CatalogEntry, inf: InferenceSpec) -> FrameworkVerdict:
    f = entry.framework
    base = dict(framework_id=f.id, recipe=entry.recipe, consistent=entry.consistent)
    if not entry.consistent:
        return FrameworkVerdict(**base, supported=False, reason="inconsistent family")
    tree = compile_tree(f, entry.consistency)
    forbidden = _forbidden(tree)
    base["forbidden"] = forbidden
    leaves = tree.leaves()
    labels = {n.label for _, n in leaves}
    if inf.observed not in labels:
        return FrameworkVerdict(**base, supported=False, reason="observed event absent")
    for step in inf.steps:
        accept = label_predicate(step.consequent)
        if not any(accept(lbl) for lbl in labels):
            return FrameworkVerdict(**base, supported=False, reason="required events absent")
    floor = 1e-12 * tree.total
    observed = [p for p, n in leaves if n.label == inf.observed and n.weight > floor]
    if not observed:
        return FrameworkVerdict(**base, supported=False, reason="observed event has zero probability")

    best: dict[str, float] = {s.name: 0.0 for s in inf.steps}
    all_supported = True
    for obs in observed:
        obs_ref = tree.ref(obs)
        coin_depths = [k for k in range(len(obs)) if tree.node(obs[: k + 1]).branch in inf.coin_branches]
        limit = min(coin_depths) if coin_depths else len(obs) - 1
        pivots = [obs[: k + 1] for k in range(limit + 1) if tree.node(obs[: k + 1]).weight > floor]
        found = False
        if not pivots:
            return FrameworkVerdict(**base, supported=False, reason="no qualifying pivot")
        for piv in pivots:
            probs = {s.name: _step_probability(tree, obs_ref, piv, s) for s in inf.steps}
            for name, pr in probs.items():
                if pr is not None:
                    best[name] = max(best[name], pr)
            if all(pr is not None and abs(pr - 1.0) <= 1e-9 for pr in probs.values()):
                found = True
                break
        all_supported = all_supported and found
    steps = {k: float(v) for k, v in best.items()}
    if all_supported:
        return FrameworkVerdict(**base, supported=True, reason="supported", step_probabilities=steps)
    return FrameworkVerdict(**base, supported=False, reason="consequent probability < 1", step_probabilities=steps)


def verify_no_single_framework(catalog: list[CatalogEntry], inf: InferenceSpec = HARDY_INFERENCE,
                               workers: int | None = None) -> SearchReport:
    if not catalog:
        raise ValueError("catalog is empty")
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            verdicts = list(pool.map(lambda e: judge(e, inf), catalog))
    else:
        verdicts = [judge(e, inf) for e in catalog]
    verdicts.sort(key=lambda v: v.framework_id)
    return SearchReport(inf, tuple(verdicts))


def search_hardy(cap: int = 200, branch_dependent: bool = False, workers: int | None = None,
                 inference: InferenceSpec = HARDY_INFERENCE) -> SearchReport:
    catalog = generate_catalog(CatalogSpec(branch_dependent=branch_dependent, cap=cap))
    return verify_no_single_framework(catalog, inference, workers)

