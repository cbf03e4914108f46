"""Command-line front end.

Exit codes: 0 success, 1 a checked identity failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import MicroformalError
from .problem import HJ_MODES, Settings, load_file, load_problem, render, run_problem
from .suites import SUITE_NAMES, verify

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--order", type=int, default=None, help="expansion order N in the formal parameter")
    p.add_argument("--fiber-cap", type=int, default=None, help="fiber-degree cap D for relations")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--quiet", action="store_true", help="print nothing; rely on the exit code")
    p.add_argument("--timing", action="store_true", help="include wall-clock timings in reports")
    return p


def _relation_args(p: argparse.ArgumentParser):
    p.add_argument("--source", default="x", help="source chart as 'even,...|odd,...' (default: x)")
    p.add_argument("--target", default="y", help="target chart (default: y)")
    p.add_argument("--kind", choices=["even", "odd"], default="even")
    p.add_argument("--fibers", default=None, help="comma-separated target fiber names")


def _phase_args(p: argparse.ArgumentParser):
    p.add_argument("--base", default="x", help="base chart as 'even,...|odd,...' (default: x)")
    p.add_argument("--kind", choices=["cotangent", "anticotangent"], default="cotangent")
    p.add_argument("--fibers", default=None, help="comma-separated fiber names")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="microformal", description="Exact computations with formal canonical relations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pullback", parents=[common], help="nonlinear pullback of a function along a relation")
    _relation_args(p)
    p.add_argument("relation", help="generating function S(x, q)")
    p.add_argument("function", help="function g on the target")

    p = sub.add_parser("compose", parents=[common], help="compose two relations")
    p.add_argument("--source", default="x")
    p.add_argument("--middle", default="y")
    p.add_argument("--target", default="z")
    p.add_argument("--kind", choices=["even", "odd"], default="even")
    p.add_argument("--middle-fibers", default=None)
    p.add_argument("--target-fibers", default=None)
    p.add_argument("first", help="relation from the middle chart to the target chart")
    p.add_argument("second", help="relation from the source chart to the middle chart")

    p = sub.add_parser("coords", parents=[common], help="change target coordinates of a relation")
    _relation_args(p)
    p.add_argument("--new", default="u", help="new target chart (default: u)")
    p.add_argument("--map", action="append", default=[], metavar="Y=EXPR",
                   help="old coordinate in terms of the new ones; repeat per coordinate")
    p.add_argument("--crosscheck", action="store_true", help="also run the Legendre-transform route")
    p.add_argument("relation")

    p = sub.add_parser("bracket", parents=[common], help="canonical Poisson or Schouten bracket")
    _phase_args(p)
    p.add_argument("left")
    p.add_argument("right")

    p = sub.add_parser("derived", parents=[common], help="higher derived brackets")
    _phase_args(p)
    p.add_argument("--method", choices=["nested", "direct", "both"], default="nested")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--jacobiator", action="store_true", help="evaluate the Jacobiator on the arguments")
    mode.add_argument("--master", action="store_true", help="evaluate the master-equation defect")
    p.add_argument("hamiltonian")
    p.add_argument("args", nargs="*")

    p = sub.add_parser("hj", parents=[common], help="Hamilton-Jacobi shifts and relatedness")
    p.add_argument("mode", choices=HJ_MODES)
    p.add_argument("--base", default="x")
    p.add_argument("--phase", choices=["cotangent", "anticotangent"], default="cotangent")
    p.add_argument("--source", default="x")
    p.add_argument("--target", default="y")
    p.add_argument("--kind", choices=["even", "odd"], default="even")
    p.add_argument("--fibers", default=None)
    p.add_argument("operands", nargs="+", help=(
        "apply: H f; commutator: H F f0; odd_shift: Q f0; related: S H1 H2; morphism: S H1 H2 g"))

    p = sub.add_parser("verify", parents=[common], help="run randomized property suites")
    p.add_argument("suite", choices=SUITE_NAMES + ("all",))
    p.add_argument("--scale", type=float, default=1.0, help="multiply instance counts")

    p = sub.add_parser("run", parents=[common], help="execute a JSON problem file")
    p.add_argument("file")
    return parser


# --------------------------------------------------------------------------
# subcommands as one-task problems


def _names(s):
    return [t.strip() for t in s.split(",") if t.strip()] if s else None


def _relation(args, source="M1", target="M2") -> dict:
    d = {"source": source, "target": target, "kind": args.kind}
    if getattr(args, "fibers", None):
        d["fibers"] = _names(args.fibers)
    if args.fiber_cap:
        d["fiber_cap"] = args.fiber_cap
    return d


def _hamiltonian(args, body: str, chart="M", kind=None) -> dict:
    d = {"chart": chart, "kind": kind or args.kind, "body": body}
    if args.fibers:
        d["fibers"] = _names(args.fibers)
    return d


def _problem(args) -> dict:
    c = args.command
    if c == "pullback":
        rel = _relation(args)
        rel["body"] = args.relation
        return {
            "charts": {"M1": args.source, "M2": args.target},
            "relations": {"R": rel},
            "functions": {"g": {"chart": "M2", "body": args.function}},
            "tasks": [{"op": "pullback", "relation": "R", "function": "g"}],
        }
    if c == "compose":
        A = {"source": "M2", "target": "M3", "kind": args.kind, "body": args.first}
        B = {"source": "M1", "target": "M2", "kind": args.kind, "body": args.second}
        if args.target_fibers:
            A["fibers"] = _names(args.target_fibers)
        if args.middle_fibers:
            B["fibers"] = A["source_fibers"] = _names(args.middle_fibers)
        return {
            "charts": {"M1": args.source, "M2": args.middle, "M3": args.target},
            "relations": {"A": A, "B": B},
            "tasks": [{"op": "compose", "first": "A", "second": "B"}],
        }
    if c == "coords":
        rel = _relation(args)
        rel["body"] = args.relation
        mapping = {}
        for item in args.map:
            k, sep, v = item.partition("=")
            if not sep:
                raise MicroformalError(f"--map expects Y=EXPR, got {item!r}")
            mapping[k.strip()] = v.strip()
        return {
            "charts": {"M1": args.source, "M2": args.target, "N": args.new},
            "relations": {"R": rel},
            "coordinate_changes": {"C": {"old": "M2", "new": "N", "map": mapping}},
            "tasks": [{"op": "coords", "relation": "R", "change": "C", "crosscheck": args.crosscheck}],
        }
    if c == "bracket":
        return {
            "charts": {"M": args.base},
            "hamiltonians": {"H": _hamiltonian(args, args.left), "F": _hamiltonian(args, args.right)},
            "tasks": [{"op": "bracket", "left": "H", "right": "F"}],
        }
    if c == "derived":
        pb = {"charts": {"M": args.base}, "hamiltonians": {"H": _hamiltonian(args, args.hamiltonian)}}
        if args.master:
            task = {"op": "master", "hamiltonian": "H", "assert": "zero"}
        elif args.jacobiator:
            task = {"op": "jacobiator", "hamiltonian": "H", "args": args.args, "assert": "zero"}
        else:
            task = {"op": "derived", "hamiltonian": "H", "args": args.args, "method": args.method}
            if args.method == "both":
                task["assert"] = "zero"
        pb["tasks"] = [task]
        return pb
    if c == "hj":
        ops = args.operands
        need = {"apply": 2, "commutator": 3, "odd_shift": 2, "related": 3, "morphism": 4}[args.mode]
        if len(ops) != need:
            raise MicroformalError(f"hj {args.mode} takes {need} operands, got {len(ops)}")
        if args.mode in ("apply", "commutator", "odd_shift"):
            pb = {"charts": {"M": args.base},
                  "hamiltonians": {"H": _hamiltonian(args, ops[0], kind=args.phase)}}
            task = {"op": "hj", "mode": args.mode, "hamiltonian": "H", "function": ops[-1]}
            if args.mode == "commutator":
                pb["hamiltonians"]["F"] = _hamiltonian(args, ops[1], kind=args.phase)
                task["other"] = "F"
            if args.mode != "apply":
                task["assert"] = "zero"
            pb["tasks"] = [task]
            return pb
        rel = _relation(args)
        rel["body"] = ops[0]
        task = {"op": "hj", "mode": args.mode, "relation": "R", "source_hamiltonian": ops[1],
                "target_hamiltonian": ops[2], "assert": "zero"}
        if args.mode == "morphism":
            task["function"] = ops[3]
        return {"charts": {"M1": args.source, "M2": args.target}, "relations": {"R": rel}, "tasks": [task]}
    raise AssertionError(c)  # pragma: no cover


# --------------------------------------------------------------------------


def _emit(args, payload: dict, lines: list[str]):
    if args.quiet:
        return
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        for line in lines:
            print(line)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = Settings(order=args.order, fiber_cap=args.fiber_cap, timing=args.timing)
    try:
        if args.command == "verify":
            report = verify(args.suite, args.seed, args.scale, args.timing)
            _emit(args, report.as_dict(), report.lines())
            return EXIT_OK if report.ok else EXIT_FAIL
        pb = load_file(args.file) if args.command == "run" else load_problem(_problem(args))
        report = run_problem(pb, settings)
    except (MicroformalError, ValueError, KeyError, TypeError, ArithmeticError, OSError) as exc:
        if not args.quiet:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(args, report, render(report))
    return EXIT_OK if report["ok"] else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
