"""Leveled families of finite subtournaments and their split and refine operations.

A family is a finite list of levels; level ``n`` is a set of finite vertex
sets. Growth condition: every set at level ``n+1`` properly extends a unique
set at level ``n`` by vertices above everything used at level ``n``.

The infinite dichotomies are read at the available depth: a set "persists"
if it is present at every level up to the last one, and a node "survives"
if it has a descendant at the last level.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional

from .instances import InstanceFormatError, Tournament, parse_instance, parse_instance_lines, random_instance, serialize_instance


class FamilyError(ValueError):
    pass


class ShallowFamilyError(FamilyError):
    """The available depth cannot certify either case of a dichotomy."""


def set_key(s) -> tuple:
    return tuple(sorted(s))


def canonical_level(sets: Iterable) -> tuple:
    return tuple(sorted({frozenset(s) for s in sets}, key=lambda s: (set_key(s))))


@dataclass(frozen=True)
class Family:
    ambient: Tournament
    levels: tuple

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(canonical_level(lv) for lv in self.levels))

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level_max(self, n: int) -> int:
        return max((max(s) for s in self.levels[n] if s), default=-1)

    def union(self, upto: Optional[int] = None) -> frozenset:
        out = set()
        for lv in self.levels[:upto]:
            for s in lv:
                out |= s
        return frozenset(out)

    def truncate(self, depth: int) -> "Family":
        return Family(self.ambient, self.levels[:depth])


def trivial_family(t: Tournament, depth: int) -> Family:
    if depth > t.n:
        raise FamilyError(f"ambient has {t.n} vertices, depth {depth} needs {depth}")
    return Family(t, tuple((frozenset(range(k + 1)),) for k in range(depth)))


# ---------------------------------------------------------------- validation


@dataclass
class FamilyReport:
    ok: bool
    depth: int
    violations: list = field(default_factory=list)
    predecessors: dict = field(default_factory=dict)

    def first(self) -> Optional[str]:
        if not self.violations:
            return None
        level, s, message = self.violations[0]
        return f"level {level} set {set_key(s)}: {message}"


def predecessor(s: Family, n: int, e: frozenset) -> frozenset:
    """The only possible parent of ``e`` (a set at level ``n+1``) at level ``n``."""
    top = s.level_max(n)
    return frozenset(x for x in e if x <= top)


def validate_family(s: Family, depth: Optional[int] = None) -> FamilyReport:
    d = s.depth if depth is None else depth
    report = FamilyReport(True, d)
    bad = report.violations.append
    if d > s.depth:
        bad((s.depth, frozenset(), f"only {s.depth} levels populated, {d} requested"))
        d = s.depth
    for n in range(d):
        if not s.levels[n]:
            bad((n, frozenset(), "empty level"))
        for e in s.levels[n]:
            if any(not 0 <= x < s.ambient.n for x in e):
                bad((n, e, "set leaves the ambient tournament"))
        if n == 0:
            continue
        parents = set(s.levels[n - 1])
        top = s.level_max(n - 1)
        for e in s.levels[n]:
            parent = predecessor(s, n - 1, e)
            if parent not in parents:
                bad((n, e, f"no predecessor at level {n - 1} (new elements must exceed {top})"))
            elif parent == e:
                bad((n, e, "does not properly extend its predecessor"))
            else:
                report.predecessors[(n, e)] = parent
    report.ok = not report.violations
    return report


def check_family(s: Family, depth: Optional[int] = None) -> Family:
    report = validate_family(s, depth)
    if not report.ok:
        raise FamilyError(report.first())
    return s


def surviving(s: Family, depth: Optional[int] = None) -> list:
    """Per level, the sets with a descendant at level ``depth-1``."""
    d = s.depth if depth is None else min(depth, s.depth)
    alive = [set() for _ in range(d)]
    if d == 0:
        return []
    alive[d - 1] = set(s.levels[d - 1])
    for n in range(d - 2, -1, -1):
        for e in alive[n + 1]:
            alive[n].add(predecessor(s, n, e))
        alive[n] &= set(s.levels[n])
    return [frozenset(a) for a in alive]


# ---------------------------------------------------------------- algebra


def prepend(e, s: Family) -> Family:
    e = frozenset(e)
    if e and s.union():
        if max(e) >= min(s.union()):
            raise FamilyError("prefix must lie below every set of the family")
    return Family(s.ambient, tuple(tuple(e | x for x in lv) for lv in s.levels))


def restrict(s: Family, n: int, e) -> Family:
    e = frozenset(e)
    if not 0 <= n < s.depth or e not in s.levels[n]:
        raise FamilyError(f"{set_key(e)} is not at level {n}")
    top = s.level_max(n)
    levels = []
    for m in range(n + 1, s.depth):
        lv = [x - e for x in s.levels[m]
              if e <= x and all(v > top for v in x - e)]
        if not lv:
            break
        levels.append(lv)
    return Family(s.ambient, tuple(levels))


@dataclass(frozen=True)
class LeqResult:
    holds: bool
    witness: dict
    failing_level: Optional[int] = None

    def __bool__(self):
        return self.holds


def family_leq(sub: Family, sup: Family, depth: Optional[int] = None) -> LeqResult:
    """Whether every level of ``sub`` fits inside some single level of ``sup``."""
    d = sub.depth if depth is None else min(depth, sub.depth)
    witness = {}
    for n in range(d):
        for m in range(sup.depth):
            if all(any(x <= y for y in sup.levels[m]) for x in sub.levels[n]):
                witness[n] = m
                break
        else:
            return LeqResult(False, witness, n)
    return LeqResult(True, witness)


def pieces(s: Family, g: Mapping, labels: Iterable[Hashable]) -> Family:
    """Levels of ``{E ∩ g⁻¹(labels) : E ∈ S(n)}``."""
    keep = set(labels)
    return Family(s.ambient, tuple(tuple(frozenset(x for x in e if g[x] in keep) for e in lv)
                                   for lv in s.levels))


# ---------------------------------------------------------------- refinement


@dataclass(frozen=True)
class RefineStep:
    label: Hashable
    case: int
    start_level: Optional[int] = None
    persistent: Optional[frozenset] = None
    levels: tuple = ()


@dataclass(frozen=True)
class RefineResult:
    label: Hashable
    family: Family
    steps: tuple
    depth: int

    @property
    def case(self) -> int:
        return self.steps[-1].case


def _persists_long_enough(start: int, depth: int) -> bool:
    # bounded reading of "for all later levels": present over the upper half
    return depth - start >= max(2, (depth + 1) // 2)


def _peel(s: Family, g: Mapping, label, order_key) -> tuple:
    """One binary step: label versus everything else."""
    own = pieces(s, g, [label])
    d = s.depth
    for n in range(d):
        if not _persists_long_enough(n, d):
            break
        for e0 in sorted(own.levels[n], key=order_key):
            if all(e0 in own.levels[m] for m in range(n, d)):
                levels = tuple(tuple(e - e0 for e in s.levels[n + k]
                                     if frozenset(x for x in e if g[x] == label) == e0)
                               for k in range(d - n))
                return RefineStep(label, 1, n, e0), Family(s.ambient, levels)
    chosen = [0]
    while True:
        previous = set(own.levels[chosen[-1]])
        nxt = next((m for m in range(chosen[-1] + 1, d)
                    if not previous & set(own.levels[m])), None)
        if nxt is None:
            break
        chosen.append(nxt)
    if len(chosen) < 2:
        raise ShallowFamilyError(f"depth {d} certifies neither case for label {label!r}")
    return (RefineStep(label, 2, levels=tuple(chosen)),
            Family(s.ambient, tuple(own.levels[m] for m in chosen)))


def pointwise_refine(s: Family, g: Mapping, depth: Optional[int] = None,
                     labels: Optional[list] = None) -> RefineResult:
    """Find a label ``i`` and a family below the ``i``-pieces of ``s``.

    Labels are handled one at a time: a label whose pieces keep a fixed set
    from some level on is set aside and the search continues on the remaining
    part; otherwise the level-skipping family of that label is returned.
    """
    d = s.depth if depth is None else min(depth, s.depth)
    s = s.truncate(d)
    points = s.union()
    missing = [x for x in points if x not in g]
    if missing:
        raise FamilyError(f"partition undefined on {sorted(missing)[:5]}")
    if d < 2:
        raise ShallowFamilyError(f"depth {d} is too shallow to refine")
    if labels is None:
        image = {g[x] for x in points}
        labels = [0, 1] if image <= {0, 1} else sorted(image, key=repr)
    key = lambda e: set_key(e)
    steps = []
    current = s
    for i, label in enumerate(labels):
        if i == len(labels) - 1:
            steps.append(RefineStep(label, 0))
            return RefineResult(label, current, tuple(steps), d)
        step, fam = _peel(current, g, label, key)
        steps.append(step)
        if step.case == 2:
            return RefineResult(label, fam, tuple(steps), d)
        current = fam
        if current.depth < 2:
            raise ShallowFamilyError("depth exhausted while setting labels aside")
    raise ShallowFamilyError("no labels to refine")


def verify_refine(s: Family, g: Mapping, result: RefineResult) -> list:
    problems = []
    report = validate_family(result.family)
    if not report.ok:
        problems.append(f"output is not a family: {report.first()}")
    target = pieces(s, g, [result.label])
    if not family_leq(result.family, target):
        problems.append("output is not below the chosen label's pieces")
    if result.family.depth < 2:
        problems.append("output too shallow")
    return problems


# ---------------------------------------------------------------- split


@dataclass(frozen=True)
class SplitResult:
    e0: frozenset
    e1: frozenset
    family: Family
    refine: RefineResult


def split_partition(s: Family, e) -> dict:
    """Each later point ``x`` labelled by ``(vertices of E beating x, vertices beaten by x)``."""
    t = s.ambient
    e = frozenset(e)
    labels = {}
    for x in s.union():
        beaten_by = frozenset(a for a in e if t.beats(a, x))
        labels[x] = (beaten_by, e - beaten_by)
    return labels


def family_split(s: Family, n: int, e, depth: Optional[int] = None, audit: bool = True) -> SplitResult:
    e = frozenset(e)
    d = s.depth if depth is None else min(depth, s.depth)
    if not 0 <= n < d or e not in s.levels[n]:
        raise FamilyError(f"{set_key(e)} is not at level {n}")
    if e not in surviving(s, d)[n]:
        raise FamilyError(f"{set_key(e)} at level {n} does not survive to depth {d}")
    above = restrict(s.truncate(d), n, e)
    g = split_partition(above, e)
    order = lambda lab: (set_key(lab[0]), set_key(lab[1]))
    labels = sorted({g[x] for x in above.union()}, key=order)
    result = pointwise_refine(above, g, labels=labels)
    e0, e1 = result.label
    out = SplitResult(e0, e1, result.family, result)
    if audit:
        problems = verify_split(s, n, e, out)
        if problems:
            raise AssertionError("split audit failed: " + problems[0])
    return out


def verify_split(s: Family, n: int, e, result: SplitResult) -> list:
    """Brute-force check of the four split postconditions."""
    e = frozenset(e)
    t = s.ambient
    problems = []
    if result.e0 | result.e1 != e or result.e0 & result.e1:
        problems.append("halves do not partition E")
    for half in (result.e0, result.e1):
        try:
            ok = family_leq(prepend(half, result.family), s)
        except FamilyError as exc:
            problems.append(f"prepend failed: {exc}")
            continue
        if not ok:
            problems.append(f"{set_key(half)}+S' is not below S")
    for lv in result.family.levels:
        for x in lv:
            for y in x:
                if not all(t.beats(a, y) for a in result.e0):
                    problems.append(f"edge from E0 to {y} missing")
                if not all(t.beats(y, b) for b in result.e1):
                    problems.append(f"edge from {y} to E1 missing")
    if not validate_family(result.family).ok:
        problems.append("output is not a family")
    return problems


# ---------------------------------------------------------------- file format


def _format_set(e) -> str:
    return "{" + ",".join(map(str, set_key(e))) + "}"


def serialize_family(s: Family, ambient_ref: Optional[str] = None) -> bytes:
    lines = ["rmwb-fam v1"]
    if ambient_ref is None:
        lines.append("ambient inline")
        lines.extend(serialize_instance(s.ambient).decode("ascii").splitlines())
        lines.append("end ambient")
    else:
        lines.append(f"ambient {ambient_ref}")
    for k, lv in enumerate(s.levels):
        lines.append(f"level {k}: " + " ".join(_format_set(x) for x in lv))
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_set(token: str, line: int) -> frozenset:
    if not (token.startswith("{") and token.endswith("}")):
        raise InstanceFormatError(f"bad set {token!r}", line)
    inner = token[1:-1].strip()
    if not inner:
        return frozenset()
    try:
        return frozenset(int(v) for v in inner.split(","))
    except ValueError as exc:
        raise InstanceFormatError(f"bad set {token!r}", line) from exc


def parse_family(text, base_dir: str = ".") -> Family:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    lines = [(i, l.strip()) for i, l in enumerate(text.split("\n"), start=1)
             if l.strip() and not l.strip().startswith("#")]
    if not lines or lines[0][1] != "rmwb-fam v1":
        raise InstanceFormatError("expected 'rmwb-fam v1' header", 1)
    if len(lines) < 2 or not lines[1][1].startswith("ambient "):
        raise InstanceFormatError("expected an ambient line", lines[0][0])
    number, head = lines[1]
    ref = head.split()[1:]
    rest = lines[2:]
    if ref == ["inline"]:
        end = next((k for k, (_, l) in enumerate(rest) if l == "end ambient"), None)
        if end is None:
            raise InstanceFormatError("inline ambient lacks 'end ambient'", number)
        ambient = parse_instance_lines(rest[:end])
        rest = rest[end + 1:]
    elif len(ref) == 4 and ref[0] == "random":
        ambient = random_instance(ref[1], int(ref[2]), int(ref[3]))
    elif len(ref) == 2 and ref[0] == "file":
        with open(os.path.join(base_dir, ref[1]), "rb") as fh:
            ambient = parse_instance(fh.read())
    else:
        raise InstanceFormatError(f"unknown ambient reference {head!r}", number)
    if not isinstance(ambient, Tournament):
        raise InstanceFormatError("ambient must be a tournament", number)
    levels = []
    for number, line in rest:
        head, _, body = line.partition(":")
        parts = head.split()
        if len(parts) != 2 or parts[0] != "level" or not parts[1].isdigit():
            raise InstanceFormatError(f"bad level line {line!r}", number)
        if int(parts[1]) != len(levels):
            raise InstanceFormatError(f"expected level {len(levels)}", number)
        levels.append(tuple(parse_set(tok, number) for tok in body.split()))
    return Family(ambient, tuple(levels))
