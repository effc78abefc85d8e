"""Finite requirement tables and monotone functional tables.

A requirement table accepts triples ``(object, a, b)``. Membership of an
object with bound sets ``A`` and ``B`` asks for an accepted triple with
``a ∈ A`` and ``b ∈ B`` whose object the query object extends, so every
query is positive in ``A`` and ``B``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from ..instances import InstanceFormatError

FLAVORS = ("ads-A-side", "ads-D-side", "ads-full", "em")
BUILTINS = ("total", "size-at-least")


class TableError(ValueError):
    pass


def extends_code(flavor: str, obj, base) -> bool:
    """Whether ``obj`` extends the recorded object ``base``."""
    if flavor == "em":
        if not base <= obj:
            return False
        top = max(base, default=-1)
        return all(x > top for x in obj - base)
    if flavor in ("ads-A-side", "ads-D-side"):
        return obj[:len(base)] == base
    (s, t), (s0, t0) = obj, base
    return s[:len(s0)] == s0 and t[:len(t0)] == t0


def object_size(flavor: str, obj) -> int:
    if flavor == "ads-full":
        return len(obj[0]) + len(obj[1])
    return len(obj)


def normalize_code(flavor: str, obj):
    if flavor == "em":
        return frozenset(obj)
    if flavor == "ads-full":
        s, t = obj
        return (tuple(s), tuple(t))
    return tuple(obj)


@dataclass(frozen=True)
class RequirementTable:
    flavor: str
    entries: frozenset = frozenset()
    a_map: tuple = ()
    builtin: Optional[tuple] = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise TableError(f"unknown flavor {self.flavor!r}")
        object.__setattr__(self, "entries", frozenset(
            (normalize_code(self.flavor, o), int(a), int(b)) for o, a, b in self.entries))
        amap = dict(self.a_map) if not isinstance(self.a_map, dict) else self.a_map
        amap = {normalize_code(self.flavor, k): int(v) for k, v in amap.items()}
        object.__setattr__(self, "a_map", tuple(sorted(amap.items(), key=lambda kv: format_code(self.flavor, kv[0]))))
        if self.builtin is not None:
            name = self.builtin[0]
            if name not in BUILTINS:
                raise TableError(f"unknown builtin {name!r}")
        # a value must persist along extensions, so extensions may not disagree
        for g, va in amap.items():
            for h, vb in amap.items():
                if va != vb and extends_code(self.flavor, h, g):
                    raise TableError(f"a-values {va} and {vb} conflict along an extension")

    def a_value(self, obj) -> Optional[int]:
        obj = normalize_code(self.flavor, obj)
        for base, value in self.a_map:
            if extends_code(self.flavor, obj, base):
                return value
        return None

    def witnesses(self, obj, a_ok: Callable[[int], bool], b_ok: Callable[[int], bool]) -> list:
        """Accepted ``(base, a, b)`` triples usable for ``obj``, least first."""
        obj = normalize_code(self.flavor, obj)
        out = [(base, a, b) for base, a, b in self.entries
               if a_ok(a) and b_ok(b) and extends_code(self.flavor, obj, base)]
        return sorted(out, key=lambda w: (w[1], w[2], repr(w[0])))

    def builtin_accepts(self, obj) -> bool:
        if self.builtin is None:
            return False
        name = self.builtin[0]
        if name == "total":
            return True
        return object_size(self.flavor, obj) >= int(self.builtin[1])

    def accepts(self, obj, a_ok: Callable[[int], bool] = lambda a: True,
                b_ok: Callable[[int], bool] = lambda b: True) -> bool:
        """Predicate form of membership; builtins accept under any bounds."""
        return self.builtin_accepts(normalize_code(self.flavor, obj)) or bool(self.witnesses(obj, a_ok, b_ok))

    def b_values(self) -> list:
        return sorted({b for _, _, b in self.entries})


def requirement_member(table: RequirementTable, obj, a_set: Iterable[int], b_set: Iterable[int]) -> bool:
    a_set, b_set = set(a_set), set(b_set)
    if table.builtin_accepts(normalize_code(table.flavor, obj)):
        return bool(a_set) and bool(b_set)
    return bool(table.witnesses(obj, a_set.__contains__, b_set.__contains__))


# ---------------------------------------------------------------- file format


def format_code(flavor: str, obj) -> str:
    if flavor == "em":
        return "{" + ",".join(map(str, sorted(obj))) + "}"
    if flavor == "ads-full":
        return format_code("ads-A-side", obj[0]) + "|" + format_code("ads-A-side", obj[1])
    return "(" + ",".join(map(str, obj)) + ")"


def parse_code(flavor: str, token: str, line: int):
    try:
        if flavor == "em":
            if not (token.startswith("{") and token.endswith("}")):
                raise ValueError
            inner = token[1:-1]
            return frozenset(int(v) for v in inner.split(",")) if inner else frozenset()
        if flavor == "ads-full":
            left, right = token.split("|")
            return (parse_code("ads-A-side", left, line), parse_code("ads-A-side", right, line))
        if not (token.startswith("(") and token.endswith(")")):
            raise ValueError
        inner = token[1:-1]
        return tuple(int(v) for v in inner.split(",")) if inner else ()
    except ValueError as exc:
        raise InstanceFormatError(f"bad object code {token!r}", line) from exc


def serialize_table(table: RequirementTable) -> bytes:
    lines = ["rmwb-req v1", f"flavor {table.flavor}"]
    if table.builtin:
        lines.append("builtin " + " ".join(map(str, table.builtin)))
    for code, value in table.a_map:
        lines.append(f"a {format_code(table.flavor, code)} {value}")
    for code, a, b in sorted(table.entries, key=lambda e: (e[1], e[2], format_code(table.flavor, e[0]))):
        lines.append(f"{format_code(table.flavor, code)} {a} {b}")
    return ("\n".join(lines) + "\n").encode("ascii")


def _lines(text) -> list:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    return [(i, l.split("#")[0].strip()) for i, l in enumerate(text.split("\n"), start=1)
            if l.split("#")[0].strip()]


def parse_table(text) -> RequirementTable:
    lines = _lines(text)
    if not lines or lines[0][1] != "rmwb-req v1":
        raise InstanceFormatError("expected 'rmwb-req v1' header", 1)
    if len(lines) < 2 or lines[1][1].split()[:1] != ["flavor"]:
        raise InstanceFormatError("expected a flavor line", lines[0][0])
    flavor = lines[1][1].split()[1] if len(lines[1][1].split()) == 2 else None
    if flavor not in FLAVORS:
        raise InstanceFormatError(f"unknown flavor in {lines[1][1]!r}", lines[1][0])
    entries, amap, builtin = [], {}, None
    for number, line in lines[2:]:
        parts = line.split()
        if parts[0] == "builtin":
            builtin = tuple(parts[1:])
            if not builtin or builtin[0] not in BUILTINS or (builtin[0] == "size-at-least" and
                                                              (len(builtin) != 2 or not builtin[1].isdigit())):
                raise InstanceFormatError(f"bad builtin {line!r}", number)
        elif parts[0] == "a":
            if len(parts) != 3 or not parts[2].isdigit():
                raise InstanceFormatError(f"bad a-value line {line!r}", number)
            amap[parse_code(flavor, parts[1], number)] = int(parts[2])
        else:
            if len(parts) != 3 or not (parts[1].isdigit() and parts[2].isdigit()):
                raise InstanceFormatError(f"bad entry {line!r}", number)
            entries.append((parse_code(flavor, parts[0], number), int(parts[1]), int(parts[2])))
    try:
        return RequirementTable(flavor, frozenset(entries), amap, builtin)
    except TableError as exc:
        raise InstanceFormatError(str(exc), lines[1][0]) from exc


# ---------------------------------------------------------------- functionals


@dataclass(frozen=True)
class FunctionalTable:
    """Entries ``(clauses, x)``: output ``x`` once every clause ``(i, j, v)`` is decided as ``v``.

    For posets a clause reads ``(i ⪯ j) == v``; for colorings ``c(i, j) == v``.
    Output ``x`` also needs ``x`` inside the domain.
    """

    kind: str
    entries: tuple = ()

    def __post_init__(self):
        if self.kind not in ("poset", "coloring"):
            raise TableError(f"functional kind must be poset or coloring, not {self.kind!r}")
        for clauses, x in self.entries:
            seen = {}
            for i, j, v in clauses:
                if v not in (0, 1) or min(i, j, x) < 0:
                    raise TableError(f"bad clause {(i, j, v)}")
                key = (i, j) if self.kind == "poset" else (min(i, j), max(i, j))
                if seen.get(key, v) != v:
                    raise TableError(f"contradictory clauses on {key}")
                seen[key] = v

    def fires(self, instance, x: int) -> bool:
        n = instance.n
        if x >= n:
            return False
        for clauses, out in self.entries:
            if out == x and all(max(i, j) < n and _clause_value(self.kind, instance, i, j) == v
                                for i, j, v in clauses):
                return True
        return False


def _clause_value(kind: str, instance, i: int, j: int) -> int:
    if kind == "poset":
        return int(instance.leq(i, j))
    if i == j:
        return -1
    return instance.color(i, j)


def parse_functional(text) -> FunctionalTable:
    lines = _lines(text)
    if not lines or lines[0][1] != "rmwb-fun v1":
        raise InstanceFormatError("expected 'rmwb-fun v1' header", 1)
    if len(lines) < 2 or lines[1][1] not in ("kind poset", "kind coloring"):
        raise InstanceFormatError("expected 'kind poset' or 'kind coloring'", lines[0][0] + 1)
    kind = lines[1][1].split()[1]
    word = "edge" if kind == "poset" else "color"
    entries = []
    for number, line in lines[2:]:
        parts = line.split()
        if parts[0] != "out" or len(parts) < 2 or not parts[1].isdigit():
            raise InstanceFormatError(f"bad entry {line!r}", number)
        clauses, rest = [], parts[2:]
        while rest:
            if rest[0] in ("absent", "undecided", "not"):
                raise InstanceFormatError("non-monotone clause: only decided values may be tested", number)
            if rest[0] != word or len(rest) < 4 or not all(r.isdigit() for r in rest[1:4]):
                raise InstanceFormatError(f"bad clause near {' '.join(rest[:4])!r}", number)
            clauses.append(tuple(int(r) for r in rest[1:4]))
            rest = rest[4:]
        entries.append((tuple(clauses), int(parts[1])))
    try:
        return FunctionalTable(kind, tuple(entries))
    except TableError as exc:
        raise InstanceFormatError(str(exc), lines[1][0]) from exc


def serialize_functional(table: FunctionalTable) -> bytes:
    word = "edge" if table.kind == "poset" else "color"
    lines = ["rmwb-fun v1", f"kind {table.kind}"]
    for clauses, x in table.entries:
        lines.append(" ".join([f"out {x}"] + [f"{word} {i} {j} {v}" for i, j, v in clauses]))
    return ("\n".join(lines) + "\n").encode("ascii")
