"""``rmwb`` command line: generation, reductions, solvers, families, forcing, constructions, verification.

Exit codes: 0 success or property holds, 1 property violated, 2 malformed
input, 3 budget exhausted. A JSON run manifest is written to stderr, or to
the file named by ``--manifest``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

from . import __version__
from . import diagonalization as dg
from .families import (FamilyError, ShallowFamilyError, family_split, parse_family, parse_set, pointwise_refine,
                       serialize_family, validate_family, verify_refine, verify_split)
from .forcing import (BadSetPredicate, DensityViolation, EmCondition, SettleBounds,
                      ground_decide, ground_diagonalize, parse_functional, parse_ground, parse_table,
                      partition_path_tree, serialize_ground, settle_extend, settles_check, verify_diagonalize,
                      verify_tree)
from .instances import (Coloring, InstanceFormatError, LinearOrder, Poset, Tournament, parse_instance,
                        random_instance, serialize_instance)
from .reductions import (SolutionError, check_solution, coloring_to_tournament, homogeneous_to_chain_antichain,
                         linear_to_poset, parse_solution, poset_to_coloring, serialize_solution,
                         solution_to_monotone, tournament_to_coloring, transitive_to_homogeneous)
from .solvers import IntervalSpec, longest_monotone, max_homogeneous, max_transitive, poset_extremes

OK, VIOLATED, MALFORMED, BUDGET = 0, 1, 2, 3


class Malformed(Exception):
    pass


class _Run:
    def __init__(self, args):
        self.args = args
        self.inputs = {}

    def read(self, path: str, parse: Callable, serialize: Optional[Callable] = None):
        if path == "-":
            raw = sys.stdin.buffer.read()
        else:
            try:
                with open(path, "rb") as fh:
                    raw = fh.read()
            except OSError as exc:
                raise Malformed(f"cannot read {path}: {exc.strerror}") from exc
        obj = parse(raw)
        canon = serialize(obj) if serialize else raw
        self.inputs[path] = hashlib.sha256(canon).hexdigest()
        return obj

    def write(self, data: bytes, path: Optional[str] = None):
        path = path if path is not None else getattr(self.args, "output", None)
        if path in (None, "-"):
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            with open(path, "wb") as fh:
                fh.write(data)


def _say(text: str):
    print(text, flush=True)


def _info(text: str):
    # commands that write data to stdout keep their chatter on stderr
    print(text, file=sys.stderr, flush=True)


def _parse_set_arg(text: str) -> frozenset:
    try:
        return parse_set(text if text.startswith("{") else "{" + text + "}", 0)
    except InstanceFormatError as exc:
        raise Malformed(str(exc)) from exc


# ---------------------------------------------------------------- commands


def cmd_gen(run: _Run) -> int:
    a = run.args
    run.write(serialize_instance(random_instance(a.kind, a.n, a.seed)))
    return OK


RULES = {
    "col2tour": (Coloring, coloring_to_tournament),
    "tour2col": (Tournament, tournament_to_coloring),
    "poset2col": (Poset, poset_to_coloring),
    "lin2poset": (LinearOrder, linear_to_poset),
}


def cmd_reduce(run: _Run) -> int:
    kind, rule = RULES[run.args.rule]
    x = run.read(run.args.input, parse_instance, serialize_instance)
    if not isinstance(x, kind):
        raise Malformed(f"rule {run.args.rule} needs a {kind.__name__.lower()}")
    run.write(serialize_instance(rule(x)))
    return OK


def cmd_solve(run: _Run) -> int:
    x = run.read(run.args.input, parse_instance, serialize_instance)
    problem = run.args.problem
    need = {"transitive": Tournament, "homogeneous": Coloring, "chain": Poset, "antichain": Poset,
            "ascending": LinearOrder, "descending": LinearOrder}[problem]
    if not isinstance(x, need):
        raise Malformed(f"problem {problem} needs a {need.__name__.lower()}")
    if problem == "transitive":
        sol = max_transitive(x)
    elif problem == "homogeneous":
        sol = max_homogeneous(x)
    elif problem in ("chain", "antichain"):
        sol = poset_extremes(x)[problem == "antichain"]
    else:
        sol = longest_monotone(x)[problem == "descending"]
    run.write(serialize_solution(sol))
    return OK


def cmd_pullback(run: _Run) -> int:
    x = run.read(run.args.input, parse_instance, serialize_instance)
    sol = run.read(run.args.solution, parse_solution, serialize_solution)
    rule = run.args.rule
    try:
        if rule == "trans2hom":
            if not isinstance(x, Coloring):
                raise Malformed("trans2hom needs the original coloring as input")
            check_solution(coloring_to_tournament(x), sol)
            out = transitive_to_homogeneous(x, sol)
        elif rule == "hom2ca":
            if not isinstance(x, Poset):
                raise Malformed("hom2ca needs the original poset as input")
            check_solution(poset_to_coloring(x), sol)
            out = homogeneous_to_chain_antichain(x, sol)
        else:
            if not isinstance(x, LinearOrder):
                raise Malformed("ca2mono needs the original linear order as input")
            check_solution(linear_to_poset(x), sol)
            out = solution_to_monotone(x, sol)
    except SolutionError as exc:
        _info(f"FAIL: {exc}")
        return VIOLATED
    run.write(serialize_solution(out))
    return OK


def _read_family(run: _Run, path: str):
    base = os.path.dirname(os.path.abspath(path)) if path != "-" else "."
    return run.read(path, lambda raw: parse_family(raw, base), serialize_family)


def cmd_family_validate(run: _Run) -> int:
    s = _read_family(run, run.args.input)
    report = validate_family(s, run.args.depth)
    if report.ok:
        _say(f"family valid to depth {report.depth}")
        return OK
    _say(f"FAIL: {report.first()}")
    return VIOLATED


def cmd_family_split(run: _Run) -> int:
    s = _read_family(run, run.args.input)
    e = _parse_set_arg(run.args.set)
    result = family_split(s, run.args.level, e, run.args.depth)
    _info(f"E0 {sorted(result.e0)}")
    _info(f"E1 {sorted(result.e1)}")
    run.write(serialize_family(result.family))
    return OK


def _named_map(name: str, s) -> dict:
    universe = sorted(s.union())
    if name == "parity":
        return {v: v % 2 for v in universe}
    if name.startswith("mod:") and name[4:].isdigit() and int(name[4:]) > 0:
        k = int(name[4:])
        return {v: v % k for v in universe}
    if name.startswith("beats:") and name[6:].isdigit():
        pivot = int(name[6:])
        return {v: int(s.ambient.beats(pivot, v)) for v in universe}
    raise Malformed(f"unknown map {name!r}; use parity, mod:K or beats:V")


def cmd_family_refine(run: _Run) -> int:
    s = _read_family(run, run.args.input)
    g = _named_map(run.args.map, s)
    result = pointwise_refine(s, g, run.args.depth)
    problems = verify_refine(s, g, result)
    for step in result.steps:
        _info(f"step label={step.label} case={step.case} start={step.start_level}")
    if problems:
        _info(f"FAIL: {problems[0]}")
        return VIOLATED
    _info(f"label {result.label}")
    run.write(serialize_family(result.family))
    return OK


def _em_condition(run: _Run):
    a = run.args
    s = _read_family(run, a.family)
    f = _parse_set_arg(a.f) if a.f else frozenset()
    low = None if a.low in (None, "-inf") else int(a.low)
    high = None if a.high in (None, "+inf", "inf") else int(a.high)
    table = run.read(a.table, parse_table)
    return EmCondition(f, IntervalSpec(low, high), s), table


def _settle_bounds(a) -> SettleBounds:
    star = lambda v: None if v is None else frozenset(int(x) for x in v.split(",") if x)
    return SettleBounds(a.x_range, a.set_bound, a.level_bound, a.depth, star(a.a_star), star(a.b_star))


def _print_settle(q, cert, say=_info):
    say(f"branch {cert.branch}" + (f" case {cert.case}" if cert.case else "")
         + (f" x {cert.x}" if cert.x is not None else ""))
    say(f"F {sorted(q.f)} I {q.interval.describe()}")


def cmd_forcing_settle(run: _Run) -> int:
    q, table = _em_condition(run)
    try:
        out, cert = settle_extend(q, table, _settle_bounds(run.args))
    except DensityViolation as exc:
        _info(f"FAIL: {exc}")
        return VIOLATED
    _print_settle(out, cert)
    run.write(serialize_family(out.family))
    return OK


def cmd_forcing_decide(run: _Run) -> int:
    cond = run.read(run.args.input, parse_ground, serialize_ground)
    try:
        out = ground_decide(cond, run.args.vertex)
    except ValueError as exc:
        raise Malformed(str(exc)) from exc
    run.write(serialize_ground(out))
    return OK


def cmd_forcing_diag(run: _Run) -> int:
    cond = run.read(run.args.input, parse_ground, serialize_ground)
    table = run.read(run.args.table, parse_functional)
    try:
        result = ground_diagonalize(cond, table, run.args.budget)
    except ValueError as exc:
        raise Malformed(str(exc)) from exc
    if not result.success:
        _info(f"budget {run.args.budget} exhausted in round {result.exhausted_round}")
        return BUDGET
    problems = verify_diagonalize(cond, table, result)
    if problems:
        _info(f"FAIL: {problems[0]}")
        return VIOLATED
    _info(f"a {result.a} b {result.b} points {result.points_used}")
    run.write(serialize_ground(result.condition))
    return OK


def cmd_forcing_tree(run: _Run) -> int:
    chain = [_parse_set_arg(tok) for tok in run.args.chain]
    r = BadSetPredicate(frozenset(_parse_set_arg(tok) for tok in run.args.bad))
    result = partition_path_tree(chain, r)
    problems = verify_tree(chain, r, result)
    _say(f"case {result.case} extracted {sorted(result.extracted)}")
    if problems:
        _say(f"FAIL: {problems[0]}")
        return VIOLATED
    return OK


def _read_adversaries(run: _Run):
    a = run.args
    items = []
    if a.adversaries:
        items += run.read(a.adversaries, dg.parse_adversaries)
    for spec in a.builtin or ():
        try:
            items += dg.builtin_adversaries(spec)
        except ValueError as exc:
            raise Malformed(str(exc)) from exc
    return items


def cmd_construct(run: _Run) -> int:
    a = run.args
    items = _read_adversaries(run)
    if a.which == "klsw":
        if not all(isinstance(i, dg.LimitGuesser) for i in items):
            raise Malformed("klsw takes limit guessers")
        t, trace = dg.construct_klsw(items, a.horizon)
    else:
        if not all(isinstance(i, dg.StrongArrayApprox) for i in items):
            raise Malformed("dkls takes strong arrays")
        t, trace = dg.construct_dkls(items, a.horizon)
    if a.trace:
        run.write(dg.serialize_trace(trace), a.trace)
    run.write(serialize_instance(t))
    return OK


def _parallel(run: _Run, fn, items) -> list:
    jobs = max(1, run.args.jobs)
    if jobs == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(jobs) as pool:
        return list(pool.map(fn, items))


def cmd_verify_construction(run: _Run) -> int:
    a = run.args
    trace = run.read(a.trace, dg.parse_trace, dg.serialize_trace)
    t = run.read(a.input, parse_instance, serialize_instance) if a.input else dg.replay(trace)
    try:
        if a.which == "klsw":
            reports = _parallel(run, lambda e: dg.verify_klsw(t, trace, e, a.window), a.e)
        else:
            reports = _parallel(run, lambda e: dg.verify_dkls(t, trace, e), a.e)
    except dg.TraceMismatchError as exc:
        raise Malformed(str(exc)) from exc
    code = OK
    for r in reports:
        _say(f"requirement {r.e}: {r.status}" + (f" ({r.failures[0]})" if r.failures else ""))
        if r.status == "failed":
            code = VIOLATED
    if a.which == "dkls":
        prio = dg.priority_problems(trace)
        if prio:
            _say(f"FAIL: {prio[0]}")
            code = VIOLATED
    return code


def _check_reduction(seed_kind) -> Optional[str]:
    from .instances import random_instance as gen
    seed, kind, n = seed_kind
    x = gen(kind, n, seed)
    try:
        if kind == "coloring":
            t = coloring_to_tournament(x)
            trans = max_transitive(t)
            hom = transitive_to_homogeneous(x, trans)
            need = 1
            while need * need < len(trans):
                need += 1
            if len(hom) < need:
                return f"seed {seed}: homogeneous set of size {len(hom)} below {need}"
            if tournament_to_coloring(t).bits != tuple(1 - b for b in x.bits):
                return f"seed {seed}: complement law fails"
        elif kind == "poset":
            for sol in poset_extremes(x):
                check_solution(x, sol)
            hom = max_homogeneous(poset_to_coloring(x))
            homogeneous_to_chain_antichain(x, hom)
        else:
            m = linear_to_poset(x)
            for sol in poset_extremes(m):
                solution_to_monotone(x, sol)
    except SolutionError as exc:
        return f"seed {seed}: {exc}"
    return None


def cmd_verify_reductions(run: _Run) -> int:
    a = run.args
    items = [(a.seed + i, a.kind, a.n) for i in range(a.count)]
    failures = [f for f in _parallel(run, _check_reduction, items) if f]
    if failures:
        _say(f"FAIL: {failures[0]}")
        return VIOLATED
    _say(f"{a.count} {a.kind} instances verified")
    return OK


def cmd_verify_family_split(run: _Run) -> int:
    s = _read_family(run, run.args.input)
    e = _parse_set_arg(run.args.set)
    result = family_split(s, run.args.level, e, run.args.depth, audit=False)
    problems = verify_split(s, run.args.level, e, result)
    if problems:
        _say(f"FAIL: {problems[0]}")
        return VIOLATED
    _say("split verified")
    return OK


def cmd_verify_settle(run: _Run) -> int:
    q, table = _em_condition(run)
    try:
        out, cert = settle_extend(q, table, _settle_bounds(run.args), audit=False)
    except DensityViolation as exc:
        _say(f"FAIL: {exc}")
        return VIOLATED
    from .forcing import em_extension_problems
    problems = em_extension_problems(out, q)
    report = settles_check(out, table, cert.x if cert.x is not None else 0)
    _print_settle(out, cert, _say)
    if problems or not report.settles:
        _say("FAIL: " + (problems[0] if problems else f"does not settle: {report.counterexample}"))
        return VIOLATED
    _say("settle verified")
    return OK


def _any_parser(raw: bytes):
    text = raw.decode("ascii")
    head = next((l.strip() for l in text.split("\n") if l.strip() and not l.strip().startswith("#")), "")
    table = {
        "rmwb v1": (parse_instance, serialize_instance),
        "rmwb-sol v1": (parse_solution, serialize_solution),
        "rmwb-ground v1": (parse_ground, serialize_ground),
        "rmwb-trace v1": (dg.parse_trace, dg.serialize_trace),
    }
    from .forcing import serialize_functional, serialize_table
    table["rmwb-req v1"] = (parse_table, serialize_table)
    table["rmwb-fun v1"] = (parse_functional, serialize_functional)
    table["rmwb-adv v1"] = (dg.parse_adversaries, None)
    if head not in table:
        raise InstanceFormatError(f"unknown header {head!r}", 1)
    return table[head]


def cmd_verify_format(run: _Run) -> int:
    path = run.args.input
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        parse, serialize = _any_parser(raw)
    except UnicodeDecodeError as exc:
        raise Malformed("file is not ASCII") from exc
    obj = parse(raw)
    run.inputs[path] = hashlib.sha256(raw).hexdigest()
    if serialize is None:
        _say("parsed")
        return OK
    again = serialize(parse(serialize(obj)))
    if again != serialize(obj):
        _say("FAIL: serialization is not a fixed point")
        return VIOLATED
    _say("canonical" if serialize(obj) == raw else "parsed; not in canonical form")
    return OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="write the run manifest here instead of stderr")
    common.add_argument("--jobs", type=int, default=1, help="parallel verification items")
    common.add_argument("-o", "--output", help="output file (default stdout)")

    p = argparse.ArgumentParser(prog="rmwb", description="Workbench for finite Ramsey-type combinatorics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a seeded instance")
    g.add_argument("--kind", required=True, choices=["coloring", "tournament", "poset", "linorder"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", parents=[common], help="translate an instance")
    r.add_argument("--rule", required=True, choices=sorted(RULES))
    r.add_argument("-i", "--input", default="-")
    r.set_defaults(func=cmd_reduce)

    s = sub.add_parser("solve", parents=[common], help="exact lexicographically least optimum")
    s.add_argument("--problem", required=True,
                   choices=["transitive", "homogeneous", "chain", "antichain", "ascending", "descending"])
    s.add_argument("-i", "--input", default="-")
    s.set_defaults(func=cmd_solve)

    pb = sub.add_parser("pullback", parents=[common], help="pull a solution back along a translation")
    pb.add_argument("--rule", required=True, choices=["trans2hom", "hom2ca", "ca2mono"])
    pb.add_argument("-i", "--input", required=True, help="the original instance")
    pb.add_argument("--solution", required=True)
    pb.set_defaults(func=cmd_pullback)

    fam = sub.add_parser("family", help="families of subtournaments").add_subparsers(dest="action", required=True)
    fv = fam.add_parser("validate", parents=[common])
    fv.add_argument("-i", "--input", required=True)
    fv.add_argument("--depth", type=int)
    fv.set_defaults(func=cmd_family_validate)
    for name, func in (("split", cmd_family_split),):
        fs = fam.add_parser(name, parents=[common])
        fs.add_argument("-i", "--input", required=True)
        fs.add_argument("--level", type=int, required=True)
        fs.add_argument("--set", required=True, help="a set at that level, e.g. {0,1}")
        fs.add_argument("--depth", type=int)
        fs.set_defaults(func=func)
    fr = fam.add_parser("refine", parents=[common])
    fr.add_argument("-i", "--input", required=True)
    fr.add_argument("--map", required=True, help="parity, mod:K or beats:V")
    fr.add_argument("--depth", type=int)
    fr.set_defaults(func=cmd_family_refine)

    forcing = sub.add_parser("forcing", help="forcing-condition operations").add_subparsers(dest="action",
                                                                                          required=True)

    def settle_args(q):
        q.add_argument("--family", required=True)
        q.add_argument("--table", required=True)
        q.add_argument("--f", help="the transitive set F (default empty)")
        q.add_argument("--low")
        q.add_argument("--high")
        q.add_argument("--x-range", type=int, default=4)
        q.add_argument("--set-bound", type=int, default=40)
        q.add_argument("--level-bound", type=int, default=8)
        q.add_argument("--depth", type=int)
        q.add_argument("--a-star", help="comma list of a-values density may use (default: all)")
        q.add_argument("--b-star", help="comma list of b-values density may use (default: all)")

    fs = forcing.add_parser("settle", parents=[common])
    settle_args(fs)
    fs.set_defaults(func=cmd_forcing_settle)
    fd = forcing.add_parser("decide", parents=[common])
    fd.add_argument("-i", "--input", required=True)
    fd.add_argument("--vertex", type=int, required=True)
    fd.set_defaults(func=cmd_forcing_decide)
    fg = forcing.add_parser("diag", parents=[common])
    fg.add_argument("-i", "--input", required=True)
    fg.add_argument("--table", required=True)
    fg.add_argument("--budget", type=int, default=64)
    fg.set_defaults(func=cmd_forcing_diag)
    ft = forcing.add_parser("tree", parents=[common])
    ft.add_argument("--chain", nargs="+", required=True, help="increasing sets, e.g. {1} {1,2}")
    ft.add_argument("--bad", nargs="*", default=[], help="bad sets no half may contain")
    ft.set_defaults(func=cmd_forcing_tree)

    con = sub.add_parser("construct", help="run a priority construction").add_subparsers(dest="which",
                                                                                       required=True)
    for which in ("klsw", "dkls"):
        c = con.add_parser(which, parents=[common])
        c.add_argument("--adversaries")
        c.add_argument("--builtin", action="append", help="builtin adversary spec; repeatable")
        c.add_argument("--horizon", type=int, required=True)
        c.add_argument("--trace")
        c.set_defaults(func=cmd_construct, which=which)

    ver = sub.add_parser("verify", help="check properties").add_subparsers(dest="which", required=True)
    for which in ("klsw", "dkls"):
        v = ver.add_parser(which, parents=[common])
        v.add_argument("--trace", required=True)
        v.add_argument("-i", "--input", help="tournament to check against (default: replay the trace)")
        v.add_argument("--e", type=int, nargs="+", default=[0])
        if which == "klsw":
            v.add_argument("--window", type=int, default=1)
        v.set_defaults(func=cmd_verify_construction, which=which)
    vr = ver.add_parser("reductions", parents=[common])
    vr.add_argument("--kind", choices=["coloring", "poset", "linorder"], default="coloring")
    vr.add_argument("--n", type=int, default=8)
    vr.add_argument("--count", type=int, default=100)
    vr.add_argument("--seed", type=int, default=0)
    vr.set_defaults(func=cmd_verify_reductions)
    vf = ver.add_parser("family-split", parents=[common])
    vf.add_argument("-i", "--input", required=True)
    vf.add_argument("--level", type=int, required=True)
    vf.add_argument("--set", required=True)
    vf.add_argument("--depth", type=int)
    vf.set_defaults(func=cmd_verify_family_split)
    vs = ver.add_parser("settle", parents=[common])
    settle_args(vs)
    vs.set_defaults(func=cmd_verify_settle)
    vfm = ver.add_parser("format", parents=[common])
    vfm.add_argument("-i", "--input", required=True)
    vfm.set_defaults(func=cmd_verify_format)
    return p


def _emit_manifest(argv, run: Optional[_Run], code: int, seed):
    manifest = {"argv": list(argv), "inputs": run.inputs if run else {}, "seed": seed,
                "version": __version__, "outcome": code}
    text = json.dumps(manifest, sort_keys=True)
    path = getattr(run.args, "manifest", None) if run else None
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=sys.stderr)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = OK if exc.code in (0, None) else MALFORMED
        if code != OK:
            _emit_manifest(argv, None, code, None)
        return code
    run = _Run(args)
    try:
        code = args.func(run)
    except (Malformed, InstanceFormatError) as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        code = MALFORMED
    except ShallowFamilyError as exc:
        print(f"bound exhausted: {exc}", file=sys.stderr)
        code = BUDGET
    except (FamilyError, ValueError) as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        code = MALFORMED
    _emit_manifest(argv, run, code, getattr(args, "seed", None))
    return code


if __name__ == "__main__":
    sys.exit(main())
