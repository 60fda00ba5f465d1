"""Command-line interface: oag <verb> <spec> ..."""
from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .core import GroupSpec, SpecError
from .oracle import OracleRefusal, parse_box
from .rewrite import RewriteError
from .syntax import ParseError, ScopeError, load_group_spec, parse, parse_system, print_formula

ELEMENT_VERBS = {"qe", "solve", "check-pattern", "make-pattern", "vc-estimate", "oracle-check"}


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")
    with open(path) as fh:
        return fh.read()


def _levels(levels: Sequence[int]) -> str:
    return "{" + ", ".join(f"CS({l})" for l in levels) + "}"


def cmd_invariants(G: GroupSpec, args, out) -> int:
    from .invariants import classify

    c = classify(G)
    if c.kind == "trivial" or not c.witnesses:
        print(f"kind={c.kind} note={c.reason}" if args.machine else f"{c.kind}: {c.reason}", file=out)
        return 0
    for w in c.witnesses:
        label = str(w.prime) if w.prime is not None else "other"
        if args.machine:
            rj = ",".join(map(str, w.jumps))
            inf = ",".join(map(str, w.infinite))
            print(f"prime={label} dim={w.dim} rj={rj} rj_inf={inf}", file=out)
        else:
            print(f"p={label}: dim_p={w.dim} RJ_p={_levels(w.jumps)} RJ_p^inf={_levels(w.infinite)}", file=out)
    return 0


def cmd_classify(G: GroupSpec, args, out) -> int:
    from .invariants import classify

    c = classify(G)
    if not args.machine:
        print(f"kind: {c.kind}", file=out)
        print(f"dp_rank: {c.dp_rank}", file=out)
        if c.reason:
            print(f"note: {c.reason}", file=out)
        for w in c.witnesses:
            label = str(w.prime) if w.prime is not None else "other"
            print(f"  p={label}: dim_p={w.dim} infinite jumps={_levels(w.infinite)}", file=out)
    print(c.machine(), file=out)
    return 0


def cmd_qe(G: GroupSpec, args, out) -> int:
    from .qe import EliminationTrace, eliminate_all

    f = parse(args.formula)
    trace = EliminationTrace() if args.trace else None
    res = eliminate_all(f, G, trace)
    if trace is not None:
        with open(args.trace, "w") as fh:
            fh.write("\n".join(trace.lines()) + "\n")
    text = print_formula(res)
    print(f"formula={text}" if args.machine else text, file=out)
    return 0


def cmd_solve(G: GroupSpec, args, out) -> int:
    from .solver import SolutionCoset, solve

    res = solve(parse_system(G, _read(args.system)))
    if isinstance(res, SolutionCoset):
        print(f"SOLVABLE base={res.base} modulus={res.modulus}", file=out)
    else:
        print(f"UNSOLVABLE pair=({res.pair[0]},{res.pair[1]})", file=out)
    return 0


def cmd_check_pattern(G: GroupSpec, args, out) -> int:
    from .patterns import check, parse_pattern

    p = parse_pattern(_read(args.pattern))
    rep = check(p, G)
    print(rep.summary(), file=out)
    if not args.machine:
        for f in rep.failures:
            print(f"  {f}", file=out)
    return 0


def cmd_make_pattern(G: GroupSpec, args, out) -> int:
    from .patterns import construct_dp_witness, format_pattern

    p = construct_dp_witness(G, args.depth, args.cols)
    if args.kind != p.kind:
        from .patterns import Pattern

        p = Pattern(args.kind, p.rows, p.var)
    print(format_pattern(p), end="", file=out)
    return 0


def cmd_vc_estimate(G: GroupSpec, args, out) -> int:
    from .vcd import estimate_dual_vc

    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --sizes {args.sizes!r}")
    if len(sizes) < 2 or min(sizes) < 1:
        raise UsageError("--sizes needs at least two positive sizes")
    est = estimate_dual_vc(parse(args.formula), G, sizes, args.trials, args.seed, args.var)
    if args.machine:
        for n, m, b in est.table:
            print(f"size={n} max_atoms={m} bound={b}", file=out)
    else:
        print(f"{'|A|':>6} {'max atoms':>10} {'bound':>12}", file=out)
        for n, m, b in est.table:
            print(f"{n:>6} {m:>10} {b:>12}", file=out)
    print(f"slope={est.slope:.4f} bound_ok={est.bound_ok}", file=out)
    return 0


def cmd_oracle_check(G: GroupSpec, args, out) -> int:
    from .suites import run_suite

    box = parse_box(G, args.box) if args.box else None
    res = run_suite(args.suite, G, seed=args.seed, box=box)
    print(res.summary(), file=out)
    for c in res.counterexamples:
        print(f"counterexample: {c}", file=out)
    return 0 if res.passed else 1


COMMANDS = {
    "invariants": cmd_invariants,
    "classify": cmd_classify,
    "qe": cmd_qe,
    "solve": cmd_solve,
    "check-pattern": cmd_check_pattern,
    "make-pattern": cmd_make_pattern,
    "vc-estimate": cmd_vc_estimate,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    def flags(defaults: bool) -> argparse.ArgumentParser:
        # subcommand copies must not overwrite values given before the verb
        d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--seed", type=int, default=d(0), help="seed for every random choice")
        p.add_argument("--box", default=d(None), help="oracle box: R or R/D (radius, dense denominator)")
        p.add_argument("--machine", action="store_true", default=d(False), help="key=value output")
        return p

    common = flags(False)
    ap = argparse.ArgumentParser(prog="oag", description="Ordered abelian group toolkit", parents=[flags(True)])
    sub = ap.add_subparsers(dest="verb", required=True)

    def verb(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, parents=[common])
        p.add_argument("spec", help="group spec file")
        return p

    verb("invariants", "p-dimensions and regular jumps")
    verb("classify", "strongness kind and dp-rank")
    p = verb("qe", "eliminate quantifiers")
    p.add_argument("formula")
    p.add_argument("--trace", default=None, help="write the elimination trace to this file")
    p = verb("solve", "solve a congruence system")
    p.add_argument("system", help="one `x == a mod H` per line")
    p = verb("check-pattern", "check a pattern file")
    p.add_argument("pattern")
    p = verb("make-pattern", "build a congruence/order witness pattern")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--kind", choices=("inp", "ict"), default="inp")
    p = verb("vc-estimate", "atom counts and log-log slope")
    p.add_argument("formula")
    p.add_argument("--sizes", default="4,8,16,32,64")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--var", default="x")
    p = verb("oracle-check", "fuzz a module against the oracle")
    p.add_argument("--suite", choices=("crt", "staircase", "qe", "patterns"), required=True)
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        G = load_group_spec(args.spec) if os.path.isfile(args.spec) else None
        if G is None:
            raise UsageError(f"no such file: {args.spec}")
        if args.verb in ELEMENT_VERBS and not G.computable:
            raise UsageError(f"{args.verb} needs elements; this spec has an omega tower or unrealized components")
        return COMMANDS[args.verb](G, args, out)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"oag: error: {e}", file=sys.stderr)
        return 2
    except (SpecError, ParseError, ScopeError, RewriteError, OracleRefusal) as e:
        print(f"oag: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
