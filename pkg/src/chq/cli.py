"""``chq``: scenario files, consistency checks, counterfactual queries, Hardy search.

stdout carries one JSON document per invocation; human diagnostics go to
stderr. Exit codes: 0 success / pass, 1 failed check or query error,
2 invalid input. ``CHQ_TOL`` overrides the default consistency tolerance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import scenario_file
from .counterfactual import counterfactual
from .errors import ChqError, InvalidParams, ScenarioFileError
from .framework import DEFAULT_TOL, check_consistency, compatible, compile_tree
from .scenarios import SCENARIO_NAMES, build_scenario
from .search import HARDY_INFERENCE, RIGHT_SWITCH_ONLY, CatalogSpec, generate_catalog, verify_no_single_framework

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SIG_DIGITS = 12


def _round(x):
    if isinstance(x, float):
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def _emit(doc, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps(_round(doc), indent=2) + "\n")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _tol(args) -> float:
    if getattr(args, "tol", None) is not None:
        return args.tol
    env = os.environ.get("CHQ_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise InvalidParams(f"CHQ_TOL={env!r} is not a number") from None
    return DEFAULT_TOL


def _error(e: ChqError) -> dict:
    return {"error": e.code, "message": str(e)}


def _kv(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key or not val:
            raise InvalidParams(f"expected node=label, got {item!r}")
        out[key] = val
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    sf = scenario_file.load(args.file)
    report = check_consistency(sf.framework, args.mode, _tol(args))
    _emit(report.to_dict())
    _say(f"{sf.framework.id}: {'consistent' if report.passed else 'inconsistent'} "
         f"(max off-diagonal {report.max_offdiag:.3g}, tol {report.tol:g})")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_probs(args) -> int:
    sf = scenario_file.load(args.file)
    report = check_consistency(sf.framework, args.mode, _tol(args))
    tree = compile_tree(sf.framework, report)
    nodes = tree.walk() if args.all_nodes else tree.leaves()
    _emit({"framework_id": tree.framework_id, "probabilities": {"/".join(p): n.weight for p, n in nodes}})
    return EXIT_OK


def _answer(tree, q: dict) -> dict:
    ans = counterfactual(tree, q["observed"], q["pivot"], q.get("antecedent", {}), q.get("outcomes"))
    return {
        "distribution": ans.by_label(),
        "observed": str(ans.observed),
        "pivot": str(ans.pivot),
        "antecedent": q.get("antecedent", {}),
        "null_flag": ans.null_flag,
        "residual": ans.residual,
    }


def cmd_query(args) -> int:
    sf = scenario_file.load(args.file)
    report = check_consistency(sf.framework, args.mode, _tol(args))
    tree = compile_tree(sf.framework, report)
    if args.observed or args.pivot:
        if not (args.observed and args.pivot):
            raise InvalidParams("--observed and --pivot go together")
        q = {"observed": args.observed, "pivot": args.pivot, "antecedent": _kv(args.antecedent)}
        if args.outcomes:
            q["outcomes"] = args.outcomes
        _emit(_answer(tree, q))
        return EXIT_OK
    if not sf.queries:
        raise InvalidParams("no query given and the file has none")
    _emit([_answer(tree, q) for q in sf.queries])
    return EXIT_OK


def _scenario_options(args) -> dict:
    if args.name == "wedges":
        return {"with_coin": args.with_coin, "coin_prob": args.coin_prob}
    if args.name == "spin-coin":
        return {"variant": args.variant, "polar": args.polar, "azimuth": args.azimuth}
    if args.name == "hardy":
        detectors = {}
        for key, opt in _kv(args.detector).items():
            parts = key.split("/")
            if len(parts) not in (2, 3) or parts[0] not in ("L", "R"):
                raise InvalidParams(f"detector key must look like L/1 or R/2/1, got {key!r}")
            detectors[(parts[0], *map(int, parts[1:]))] = opt
        return {"t1": args.t1, "detectors": detectors}
    return {}


def cmd_scenario(args) -> int:
    f, queries = build_scenario(args.name, **_scenario_options(args))
    text = scenario_file.dumps(f, queries)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(text)
        _say(f"wrote {args.emit} ({f.id}, dim {f.dim})")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_search(args) -> int:
    if args.scenario != "hardy":
        raise InvalidParams(f"search is defined for the hardy scenario only, not {args.scenario!r}")
    spec = CatalogSpec(branch_dependent=args.branch_dependent, cap=args.cap)
    catalog = generate_catalog(spec)
    inference = RIGHT_SWITCH_ONLY if args.steps == "right" else HARDY_INFERENCE
    report = verify_no_single_framework(catalog, inference, workers=args.workers)
    doc = report.to_dict()
    if not args.details:
        doc.pop("frameworks")
    _emit(doc)
    _say(f"{len(catalog)} frameworks, {doc['consistent_frameworks']} consistent; "
         f"none_support={str(report.none_support).lower()}")
    return EXIT_OK


def cmd_compat(args) -> int:
    f = scenario_file.load(args.first).framework
    g = scenario_file.load(args.second).framework
    report = compatible(f, g, _tol(args), args.mode)
    _emit(report.to_dict())
    return EXIT_OK if report.compatible else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chq", description="Consistent-histories counterfactual toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_mode(p):
        p.add_argument("--mode", choices=("medium", "weak"), default="medium")
        p.add_argument("--tol", type=float, default=None, help="consistency tolerance (default: CHQ_TOL or 1e-10)")
        return p

    p = with_mode(sub.add_parser("check", help="decoherence check of a scenario file"))
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = with_mode(sub.add_parser("probs", help="history probabilities of a consistent scenario"))
    p.add_argument("file")
    p.add_argument("--all-nodes", action="store_true", help="include interior nodes")
    p.set_defaults(func=cmd_probs)

    p = with_mode(sub.add_parser("query", help="pivot-based counterfactual query"))
    p.add_argument("file")
    p.add_argument("--observed")
    p.add_argument("--pivot")
    p.add_argument("--antecedent", nargs="*", metavar="NODE=LABEL")
    p.add_argument("--outcomes", nargs="*")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("scenario", help="emit a canonical scenario file")
    p.add_argument("name", choices=SCENARIO_NAMES)
    p.add_argument("--emit", metavar="FILE")
    p.add_argument("--with-coin", action="store_true", help="wedges: add the wedge-removing coin")
    p.add_argument("--coin-prob", type=float, default=0.5)
    p.add_argument("--variant", choices=("A", "B", "B_with_X_refinement"), default="B")
    p.add_argument("--polar", type=float, default=60.0, help="spin-coin: polar angle of w in degrees")
    p.add_argument("--azimuth", type=float, default=0.0)
    p.add_argument("--t1", default="trivial", help="hardy: t1 generator")
    p.add_argument("--detector", nargs="*", metavar="SIDE/SETTING=OPTION")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("search", help="no-single-framework search")
    p.add_argument("--scenario", default="hardy")
    p.add_argument("--cap", type=int, default=200)
    p.add_argument("--branch-dependent", action="store_true")
    p.add_argument("--steps", choices=("all", "right"), default="all")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--details", action="store_true", help="include per-framework verdicts")
    p.set_defaults(func=cmd_search)

    p = with_mode(sub.add_parser("compat", help="compatibility of two scenario files"))
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_compat)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioFileError, InvalidParams) as e:
        _say(f"chq: {e}")
        _emit(_error(e))
        return EXIT_INPUT
    except ChqError as e:
        _say(f"chq: {e}")
        _emit(_error(e))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
