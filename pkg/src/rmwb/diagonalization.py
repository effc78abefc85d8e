"""Stagewise finite-injury tournament constructions run to a finite horizon.

Two constructions are provided. ``construct_klsw`` defeats limit guessers by
closing a 3-cycle through every new vertex and a pair from each guessed group.
``construct_dkls`` defeats strong arrays by making a pair of canonical finite
sets non-extendible. Both record a line-per-event trace from which the
tournament can be replayed exactly, and both have independent verifiers.

Trace tags:

    STAGE s                      a new stage starts
    CLAIM s e x...               the group requirement e reads at stage s
    SKIP s e                     requirement e had too few candidates
    PICK s e u v                 KLSW pair, with T(u, v) already holding
    WITNESS s e k x y...         DKLS witness number k is x, with its set
    CANCEL s i e                 requirement i lost its witnesses to e
    EDGE s e w l                 requirement e declared T(w, l)
    DEFAULT s x                  T(x, s) by default
    COLLISION s e w l            a conflicting write lost to an earlier one
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .instances import InstanceFormatError, Tournament, mask_is_transitive, to_mask
from .prng import mix
from .solvers import one_point_extensions


class TraceMismatchError(ValueError):
    pass


# ---------------------------------------------------------------- adversaries


@dataclass(frozen=True)
class LimitGuesser:
    """A 0/1 guess ``g(x, s)`` for membership of ``x`` at stage ``s``.

    ``kind`` is ``table`` (rows default to 0 inside the declared rectangle),
    ``stable-target`` or ``injurious``. Builtins are total.
    """

    e: int
    kind: str = "table"
    rows: frozenset = frozenset()        # table: the (x, s) pairs guessed 1
    width: Optional[int] = None          # table rectangle: x < width, s < height
    height: Optional[int] = None
    targets: tuple = ()                  # ((from_stage, target), ...) in stage order
    seed: int = 0

    def covers(self, horizon: int) -> bool:
        if self.kind != "table":
            return True
        return (self.width or 0) >= horizon and (self.height or 0) >= horizon

    def claims(self, x: int, s: int) -> bool:
        if self.kind == "table":
            return (x, s) in self.rows
        current = None
        for start, target in self.targets:
            if s >= start:
                current = target
        if current is None:
            return bool(mix(self.seed, self.e, x, s) & 1)
        return _in_target(current, x)


def _in_target(target, x: int) -> bool:
    if isinstance(target, tuple) and target and target[0] == "mod":
        return x % target[1] == target[2]
    return x in target


@dataclass(frozen=True)
class StrongArrayApprox:
    """Entries ``x -> (stage, D)``; canonical-interval arrays are generated on demand."""

    e: int
    entries: tuple = ()                  # ((x, stage, frozenset), ...)
    k: Optional[int] = None              # canonical-interval width
    delay: int = 0

    def __post_init__(self):
        seen = set()
        norm = []
        for x, stage, d in self.entries:
            if x in seen:
                raise ValueError(f"array {self.e} has two entries for x={x}")
            if not d:
                raise ValueError(f"array {self.e} has an empty set at x={x}")
            seen.add(x)
            norm.append((int(x), int(stage), frozenset(d)))
        object.__setattr__(self, "entries", tuple(sorted(norm)))
        object.__setattr__(self, "_index", {x: (st, d) for x, st, d in norm})
        if self.k is not None and self.k < 1:
            raise ValueError("canonical-interval width must be positive")

    def lookup(self, x: int):
        """``(stage, D)`` once defined, else None."""
        if self.k is not None:
            return (x + self.delay, frozenset(range(self.k * x, self.k * x + self.k)))
        return self._index.get(x)


def _parse_set_param(value: str):
    m = re.fullmatch(r"mod(\d+)r(\d+)", value)
    if m:
        return ("mod", int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"(\d+)-(\d+)", value)
    if m:
        return frozenset(range(int(m.group(1)), int(m.group(2)) + 1))
    return frozenset(int(v) for v in value.split(",") if v != "")


def _spec_params(spec: str) -> tuple:
    parts = spec.split()
    if not parts:
        raise ValueError("empty adversary spec")
    params = {}
    for p in parts[1:]:
        if "=" not in p:
            raise ValueError(f"expected key=value, got {p!r}")
        key, value = p.split("=", 1)
        params[key] = value
    return parts[0], params


def builtin_adversaries(spec: str) -> list:
    """Deterministic adversaries from a one-line spec such as ``stable-target e=0 D=0-3 s0=0``.

    Families: ``stable-target`` (``e D s0 seed``), ``injurious`` (``e D D2
    switch seed``), ``canonical-interval`` (``e k delay``), and the suites
    ``klsw-suite`` and ``dkls-suite`` used by the acceptance runs.
    """
    name, p = _spec_params(spec)
    try:
        if name == "stable-target":
            return [LimitGuesser(int(p.get("e", 0)), "stable-target",
                                 targets=((int(p.get("s0", 0)), _parse_set_param(p["D"])),),
                                 seed=int(p.get("seed", 0)))]
        if name == "injurious":
            switch = int(p.get("switch", 50))
            return [LimitGuesser(int(p.get("e", 0)), "injurious",
                                 targets=((0, _parse_set_param(p["D"])), (switch, _parse_set_param(p["D2"]))),
                                 seed=int(p.get("seed", 0)))]
        if name == "canonical-interval":
            return [StrongArrayApprox(int(p.get("e", 0)), k=int(p["k"]), delay=int(p.get("delay", 0)))]
        if name == "klsw-suite":
            count, seed = int(p.get("count", 4)), int(p.get("seed", 0))
            return [LimitGuesser(e, "stable-target", targets=((20 * (e + 1), ("mod", count, e)),), seed=seed)
                    for e in range(count)]
        if name == "dkls-suite":
            count = int(p.get("count", 4))
            return [StrongArrayApprox(e, k=e + 2, delay=20 * (count - 1 - e)) for e in range(count)]
    except KeyError as exc:
        raise ValueError(f"{name} needs parameter {exc.args[0]}") from exc
    raise ValueError(f"unknown adversary family {name!r}")


# ---------------------------------------------------------------- traces


@dataclass
class ConstructionTrace:
    construction: str
    horizon: int
    events: list = field(default_factory=list)

    def log(self, *event):
        self.events.append(tuple(event))

    def tagged(self, tag: str, e: Optional[int] = None) -> list:
        return [ev for ev in self.events if ev[0] == tag and (e is None or ev[2] == e)]


def serialize_trace(trace: ConstructionTrace) -> bytes:
    lines = ["rmwb-trace v1", f"construction {trace.construction}", f"horizon {trace.horizon}"]
    lines += [" ".join(str(v) for v in ev) for ev in trace.events]
    return ("\n".join(lines) + "\n").encode("ascii")


TAGS = ("STAGE", "CLAIM", "SKIP", "PICK", "WITNESS", "CANCEL", "EDGE", "DEFAULT", "COLLISION")


def parse_trace(text) -> ConstructionTrace:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    lines = [(i, l.strip()) for i, l in enumerate(text.split("\n"), start=1) if l.strip()]
    if len(lines) < 3 or lines[0][1] != "rmwb-trace v1":
        raise InstanceFormatError("expected 'rmwb-trace v1' header", 1)
    head = [l.split() for _, l in lines[1:3]]
    if head[0][:1] != ["construction"] or head[1][:1] != ["horizon"] or not head[1][1].isdigit():
        raise InstanceFormatError("expected construction and horizon lines", 2)
    trace = ConstructionTrace(head[0][1], int(head[1][1]))
    for number, line in lines[3:]:
        parts = line.split()
        if parts[0] not in TAGS or not all(p.isdigit() for p in parts[1:]):
            raise InstanceFormatError(f"bad trace event {line!r}", number)
        trace.events.append((parts[0],) + tuple(int(p) for p in parts[1:]))
    return trace


class _Board:
    """Edges decided so far; ``win[s][x]`` is True iff ``T(x, s)`` for ``x < s``."""

    def __init__(self, horizon: int):
        self.win = [dict() for _ in range(horizon)]

    def beats(self, a: int, b: int) -> bool:
        if a == b:
            return False
        if a < b:
            return self.win[b][a]
        return not self.win[a][b]

    def declare(self, trace, s: int, e: int, w: int, l: int) -> bool:
        x = l if w == s else w
        value = x == w
        row = self.win[s]
        if x in row:
            if row[x] != value:
                trace.log("COLLISION", s, e, w, l)
                return False
            return True
        row[x] = value
        trace.log("EDGE", s, e, w, l)
        return True

    def finish_stage(self, trace, s: int):
        row = self.win[s]
        for x in range(s):
            if x not in row:
                row[x] = True
                trace.log("DEFAULT", s, x)

    def tournament(self) -> Tournament:
        n = len(self.win)
        return Tournament(n, tuple(1 if self.win[j][i] else 0 for i in range(n) for j in range(i + 1, n)))


def replay(trace: ConstructionTrace) -> Tournament:
    """Rebuild the tournament from EDGE and DEFAULT events alone."""
    n = trace.horizon
    win = [dict() for _ in range(n)]
    for ev in trace.events:
        if ev[0] == "EDGE":
            s, w, l = ev[1], ev[3], ev[4]
            x, value = (l, False) if w == s else (w, True)
        elif ev[0] == "DEFAULT":
            s, x, value = ev[1], ev[2], True
        else:
            continue
        if x in win[s]:
            raise TraceMismatchError(f"edge {{{x},{s}}} decided twice")
        win[s][x] = value
    for s in range(n):
        if len(win[s]) != s:
            raise TraceMismatchError(f"stage {s} leaves edges undecided")
    return Tournament(n, tuple(1 if win[j][i] else 0 for i in range(n) for j in range(i + 1, n)))


def _check_trace(t: Tournament, trace: ConstructionTrace, construction: str):
    if trace.construction != construction:
        raise TraceMismatchError(f"trace is for {trace.construction}, not {construction}")
    if replay(trace) != t:
        raise TraceMismatchError("trace does not reproduce the tournament")


# ---------------------------------------------------------------- KLSW


def construct_klsw(guessers: Sequence[LimitGuesser], horizon: int) -> tuple:
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    for g in guessers:
        if not g.covers(horizon):
            raise ValueError(f"guesser {g.e} is defined on a rectangle smaller than the horizon {horizon}")
    ids = [g.e for g in guessers]
    if len(set(ids)) != len(ids):
        raise ValueError("two guessers share an id")
    by_id = sorted(guessers, key=lambda g: g.e)
    board = _Board(horizon)
    trace = ConstructionTrace("klsw", horizon)
    for s in range(horizon):
        trace.log("STAGE", s)
        taken = set()
        for g in by_id:
            e = g.e
            if e >= s:
                break
            need = 2 * e + 2
            group = []
            for x in range(s):
                if g.claims(x, s):
                    group.append(x)
                    if len(group) == need:
                        break
            if len(group) < need:
                trace.log("SKIP", s, e)
                continue
            trace.log("CLAIM", s, e, *group)
            free = [x for x in group if x not in taken][:2]
            u, v = free
            if not board.beats(u, v):
                u, v = v, u
            taken.update(free)
            trace.log("PICK", s, e, u, v)
            board.declare(trace, s, e, s, u)
            board.declare(trace, s, e, v, s)
        board.finish_stage(trace, s)
    return board.tournament(), trace


@dataclass
class KlswReport:
    e: int
    status: str                     # verified | never acted | unstabilized | failed
    s_star: Optional[int] = None
    pair: Optional[tuple] = None
    group: tuple = ()
    extensions: frozenset = frozenset()
    failures: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.status == "verified"


def verify_klsw(t: Tournament, trace: ConstructionTrace, e: int, window: int = 1) -> KlswReport:
    _check_trace(t, trace, "klsw")
    picks = {ev[1]: (ev[3], ev[4]) for ev in trace.tagged("PICK", e)}
    claims = {ev[1]: tuple(ev[3:]) for ev in trace.tagged("CLAIM", e)}
    if not picks:
        return KlswReport(e, "never acted")
    last = t.n - 1
    if last not in picks:
        return KlswReport(e, "unstabilized")
    pair = picks[last]
    s_star = last
    while s_star - 1 in picks and picks[s_star - 1] == pair:
        s_star -= 1
    if t.n - s_star < window:
        return KlswReport(e, "unstabilized", s_star, pair)
    group = claims[last]
    report = KlswReport(e, "verified", s_star, pair, group)
    out = t.out_masks
    for s in range(s_star, t.n):
        if mask_is_transitive(out, to_mask((pair[0], pair[1], s))):
            report.failures.append(f"{{{pair[0]},{pair[1]},{s}}} is transitive")
            break
    if t.is_transitive(group):
        report.extensions = one_point_extensions(t, group)
        if any(a >= s_star for a in report.extensions):
            report.failures.append("the group has a one-point extension after stabilisation")
    if len(report.extensions) > s_star:
        report.failures.append(f"{len(report.extensions)} one-point extensions exceed s*={s_star}")
    if any(ev[1] >= s_star for ev in trace.tagged("COLLISION", e)):
        report.failures.append("a write collision touched the requirement")
    if report.failures:
        report.status = "failed"
    return report


# ---------------------------------------------------------------- DKLS


def construct_dkls(arrays: Sequence[StrongArrayApprox], horizon: int) -> tuple:
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    ids = [a.e for a in arrays]
    if len(set(ids)) != len(ids):
        raise ValueError("two arrays share an id")
    by_id = sorted(arrays, key=lambda a: a.e)
    board = _Board(horizon)
    trace = ConstructionTrace("dkls", horizon)
    witnesses = {a.e: [] for a in by_id}      # list of (x, D)

    def eligible(arr, x, s):
        got = arr.lookup(x)
        if got is None:
            return None
        stage, d = got
        if stage > s or not d or max(d) >= s:
            return None
        for other in by_id:
            if other.e >= arr.e:
                break
            for y, dy in witnesses[other.e]:
                if x <= y or d & dy:
                    return None
        return d

    def cancel_below(e, s):
        for other in by_id:
            if other.e > e and witnesses[other.e]:
                witnesses[other.e] = []
                trace.log("CANCEL", s, other.e, e)

    for s in range(horizon):
        trace.log("STAGE", s)
        for arr in by_id:
            e = arr.e
            if e > s:
                break
            wit = witnesses[e]
            if not wit:
                found = next(((x, d) for x in range(s) for d in [eligible(arr, x, s)] if d is not None), None)
                if found is None:
                    trace.log("SKIP", s, e)
                    continue
                x0, d0 = found
                wit.append(found)
                trace.log("WITNESS", s, e, 0, x0, *sorted(d0))
                for y in sorted(d0):
                    board.declare(trace, s, e, y, s)
                cancel_below(e, s)
            elif len(wit) == 1:
                x0, d0 = wit[0]
                found = None
                for x in range(s):
                    d = eligible(arr, x, s)
                    if d is not None and all(board.beats(y0, y1) for y0 in d0 for y1 in d):
                        found = (x, d)
                        break
                if found is None:
                    for y in sorted(d0):
                        board.declare(trace, s, e, y, s)
                    continue
                x1, d1 = found
                wit.append(found)
                trace.log("WITNESS", s, e, 1, x1, *sorted(d1))
                for y in sorted(d0):
                    board.declare(trace, s, e, s, y)
                for y in sorted(d1):
                    board.declare(trace, s, e, y, s)
                cancel_below(e, s)
            else:
                (_, d0), (_, d1) = wit
                for y in sorted(d0):
                    board.declare(trace, s, e, s, y)
                for y in sorted(d1):
                    board.declare(trace, s, e, y, s)
        board.finish_stage(trace, s)
    return board.tournament(), trace


def _final_witnesses(trace: ConstructionTrace, e: int) -> list:
    """Witness events of ``e`` surviving the last cancellation."""
    current = []
    for ev in trace.events:
        if ev[0] == "WITNESS" and ev[2] == e:
            current.append(ev)
        elif ev[0] == "CANCEL" and ev[2] == e:
            current = []
    return current


@dataclass
class DklsReport:
    e: int
    status: str                     # verified | no witnesses | second witness pending | failed
    x0: Optional[int] = None
    x1: Optional[int] = None
    stage: Optional[int] = None     # stage the second witness was assigned
    d0: frozenset = frozenset()
    d1: frozenset = frozenset()
    extensions_above: int = 0
    failures: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.status == "verified"


def verify_dkls(t: Tournament, trace: ConstructionTrace, e: int) -> DklsReport:
    _check_trace(t, trace, "dkls")
    wit = _final_witnesses(trace, e)
    if not wit:
        return DklsReport(e, "no witnesses")
    first = wit[0]
    if len(wit) == 1:
        return DklsReport(e, "second witness pending", x0=first[4], d0=frozenset(first[5:]))
    second = wit[1]
    d0, d1 = frozenset(first[5:]), frozenset(second[5:])
    report = DklsReport(e, "verified", first[4], second[4], second[1], d0, d1)
    s1 = second[1]
    for y0 in sorted(d0):
        for y1 in sorted(d1):
            if not t.beats(y0, y1):
                report.failures.append(f"T({y0},{y1}) fails")
                continue
            bad = next((s for s in range(s1 + 1, t.n) if not (t.beats(s, y0) and t.beats(y1, s))), None)
            if bad is not None:
                report.failures.append(f"stage {bad} does not close a cycle with ({y0},{y1})")
            above = [a for a in one_point_extensions(t, (y0, y1)) if a > s1]
            report.extensions_above += len(above)
    if report.extensions_above:
        report.failures.append(f"{report.extensions_above} one-point extensions above stage {s1}")
    if trace.tagged("COLLISION", e):
        report.failures.append("a write collision touched the requirement")
    if report.failures:
        report.status = "failed"
    return report


def priority_problems(trace: ConstructionTrace) -> list:
    """Every cancellation must be caused by a stronger requirement gaining a witness that stage."""
    gained = {(ev[1], ev[2]) for ev in trace.events if ev[0] == "WITNESS"}
    out = []
    for ev in trace.events:
        if ev[0] == "CANCEL":
            s, i, by = ev[1], ev[2], ev[3]
            if not (by < i and (s, by) in gained):
                out.append(f"stage {s}: requirement {i} cancelled without a stronger witness")
    return out


# ---------------------------------------------------------------- adversary files


def serialize_adversaries(items: Iterable) -> bytes:
    lines = ["rmwb-adv v1"]
    for item in items:
        if isinstance(item, LimitGuesser):
            if item.kind != "table":
                raise ValueError("only table guessers have a file form; use a builtin line instead")
            lines.append(f"guesser {item.e} {item.width} {item.height}")
            lines += [f"{x} {s} 1" for x, s in sorted(item.rows)]
        else:
            if item.k is not None:
                raise ValueError("generated arrays have no file form; use a builtin line instead")
            lines.append(f"array {item.e}")
            lines += [f"{x} {st} {{{','.join(map(str, sorted(d)))}}}" for x, st, d in item.entries]
        lines.append("end")
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_adversaries(text) -> list:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    lines = [(i, l.split("#")[0].strip()) for i, l in enumerate(text.split("\n"), start=1)
             if l.split("#")[0].strip()]
    if not lines or lines[0][1] != "rmwb-adv v1":
        raise InstanceFormatError("expected 'rmwb-adv v1' header", 1)
    out, section, rows = [], None, []
    for number, line in lines[1:]:
        parts = line.split()
        if section is None:
            if parts[0] == "builtin":
                try:
                    out.extend(builtin_adversaries(" ".join(parts[1:])))
                except ValueError as exc:
                    raise InstanceFormatError(str(exc), number) from exc
            elif parts[0] == "guesser" and len(parts) == 4 and all(p.isdigit() for p in parts[1:]):
                section, rows = ("guesser", number, *map(int, parts[1:])), []
            elif parts[0] == "array" and len(parts) == 2 and parts[1].isdigit():
                section, rows = ("array", number, int(parts[1])), []
            else:
                raise InstanceFormatError(f"expected a section header, got {line!r}", number)
        elif parts == ["end"]:
            try:
                if section[0] == "guesser":
                    _, _, e, w, h = section
                    out.append(LimitGuesser(e, "table", frozenset((x, s) for x, s, v in rows if v), w, h))
                else:
                    out.append(StrongArrayApprox(section[2], tuple(rows)))
            except ValueError as exc:
                raise InstanceFormatError(str(exc), section[1]) from exc
            section = None
        elif section[0] == "guesser":
            if len(parts) != 3 or not all(p.isdigit() for p in parts) or parts[2] not in ("0", "1"):
                raise InstanceFormatError(f"bad guesser row {line!r}", number)
            rows.append(tuple(int(p) for p in parts))
        else:
            m = re.fullmatch(r"(\d+)\s+(\d+)\s+\{([\d,]*)\}", line)
            if not m:
                raise InstanceFormatError(f"bad array row {line!r}", number)
            d = frozenset(int(v) for v in m.group(3).split(",") if v)
            rows.append((int(m.group(1)), int(m.group(2)), d))
    if section is not None:
        raise InstanceFormatError("section not closed with 'end'", section[1])
    return out
